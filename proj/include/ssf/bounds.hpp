#pragma once

// Closed-form Fourier decay exponents and the arithmetic conditions built on them.

#include "ssf/dimension.hpp"
#include "ssf/ifs.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssf {

/// (d_q + kappa_p - k) / (2p - k + 2 kappa_* + kappa_p - d_q) with q = p/(p-1), clamped at 0.
/// p = 1 uses d_inf and kappa1, p = 2 uses kappa2 twice. Throws MissingExponent.
double sigma_p(const DimensionProfile& profile, double p);

/// 2 - (d_q + kappa_p - k) / (p + kappa_* + kappa_p - k): the split point at which the
/// two competing exponents agree, so that (2 - gamma)/gamma = sigma_p.
/// Throws NotApplicable when d_q + kappa_p <= k.
double compute_gamma(const DimensionProfile& profile, double p);

/// Hypotheses of the decay bound that a profile alone cannot settle.
struct DecayHypotheses {
  std::optional<bool> curvature_nonvanishing;
  /// Defaults to true for k <= 2.
  std::optional<bool> non_expanding;
};

struct DecayBound {
  std::map<double, double> sigma_p_table;
  double sigma = 0.0;
  double best_p = 2.0;
  std::optional<double> gamma;
  bool applicable = false;
  /// kappa2 / 2, the largest exponent one could hope for.
  double conjectural_ceiling = 0.0;
  std::string formula;
  std::vector<std::string> notes;
};

/// max of the l^2 exponent and, when kappa1 is known, the l^1 exponent.
DecayBound decay_exponent_bound(const DimensionProfile& profile, const DecayHypotheses& hyp = {});

/// sigma_p over a grid of p in [1, 2]; entries without exponents are skipped with a note.
DecayBound decay_bound_table(const DimensionProfile& profile, const std::vector<double>& p_grid,
                             const DecayHypotheses& hyp = {});

/// Exponent for holomorphic pushforwards in the plane whose l-th derivative does not vanish.
/// Basic: d_inf (kappa2 - 1) / (kappa_* l). Refined: (kappa2 - 1) / (1 + kappa_* + (l-2) kappa_* / d_inf).
double vdc_exponent(const DimensionProfile& profile, int l, bool refined);

struct ConditionVerdict {
  bool holds = false;
  /// Left side within 1e-12 of the threshold (reported as false).
  bool boundary = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string formula;
  std::vector<std::string> notes;
};

/// ab + max(1.5a + b, 1.5b + a) > 2.5.
ConditionVerdict two_set_condition(double dim_e, double dim_f);

/// Any rotation with c > 1/2 satisfying a/2 + b/2 + (c - 0.5)/(c + 1.5) > 1.
ConditionVerdict three_set_condition(double dim_e, double dim_f, double dim_g);

struct Thresholds {
  double t2 = 0.0;
  double t3 = 0.0;
  double residual2 = 0.0;
  double residual3 = 0.0;
};

/// Symmetric dimension thresholds of the two- and three-set conditions by root finding.
Thresholds symmetric_thresholds();

struct ProductCriteriaVerdict {
  bool holds = false;
  /// Indices (1..3) of every satisfied criterion.
  std::vector<int> satisfied;
  std::vector<std::string> notes;
};

/// Three sufficient criteria for a product of two measures to be absolutely continuous:
/// min(a, b) > 7/9; max(4a + 5b, 5a + 4b) > 7; and, for AD-regular nu, 2ab + 3a + 2b > 5.
ProductCriteriaVerdict product_measure_conditions(double kappa2_mu, double kappa2_nu, bool nu_ad_regular);

/// (kappa2 - 1/2) / (2 + kappa2 - 1/2). Throws NotApplicable for kappa2 <= 1/2.
double log_pushforward_sigma(double kappa2);

/// kappa2 > 2 + k/2, for k >= 5. Throws NotApplicable for k < 5.
ConditionVerdict high_dim_condition(int k, double kappa2);

/// Earlier published decay exponents for recognised systems (for report comparison).
std::vector<std::string> baseline_notes(const SelfSimilarIFS& ifs);

}  // namespace ssf
