#pragma once

// Dimension exponents of self-similar measures and the profile consumed by the
// decay-bound formulas.

#include "ssf/common.hpp"
#include "ssf/ifs.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ssf {

/// Unique s >= 0 with sum_i r_i^s = 1.
double similarity_dimension_set(std::span<const double> ratios);

/// (sum p_i log p_i) / (sum p_i log r_i).
double similarity_dimension_measure(std::span<const double> weights, std::span<const double> ratios);

struct LqSpectrum {
  double T = 0.0;
  double d_q = 0.0;
};

/// T solves sum p_i^q r_i^{-T} = 1; d_q = min(T / (q - 1), k).
LqSpectrum lq_spectrum(std::span<const double> weights, std::span<const double> ratios, double q,
                       int k = 1);

/// Limit of T(q)/(q-1) as q -> infinity: min_i log p_i / log r_i.
double frostman_exponent_formula(std::span<const double> weights, std::span<const double> ratios);

struct CorrelationConfig {
  std::size_t n_pairs = 1'000'000;
  /// Dyadic scales 2^-scale_lo .. 2^-scale_hi.
  int scale_lo = 4;
  int scale_hi = 12;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct CorrelationEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t pairs = 0;
  std::vector<double> log2_scales;
  std::vector<double> log2_fractions;
};

/// Slope of log C(r) against log r, C(r) being the fraction of sample pairs closer
/// than r. Throws BadConfig when fewer than three usable scales remain.
CorrelationEstimate correlation_dimension_estimate(const SelfSimilarIFS& ifs,
                                                   const CorrelationConfig& config = {});

struct Exponent {
  double value = 0.0;
  Provenance provenance = Provenance::estimated;
};

/// Assouad dimension of the attractor: the similarity dimension under declared
/// SSC/OSC, otherwise the ambient dimension. A user value wins when given.
Exponent assouad_dimension(const SelfSimilarIFS& ifs, Separation declared,
                           std::optional<double> user_value = std::nullopt);

struct DimensionProfile {
  int k = 1;
  Exponent kappa2;
  Exponent kappa_star;
  Exponent d_inf;
  std::optional<Exponent> kappa1;
  /// Fourier l^p dimensions for p other than 1 and 2.
  std::map<double, Exponent> kappa_p;
  /// L^q dimensions for q other than 2 and infinity.
  std::map<double, Exponent> d_q;
  double s_sim_set = 0.0;
  double s_sim_meas = 0.0;
  bool ad_regular = false;
  std::vector<std::string> warnings;

  /// kappa_p with p = 1 -> kappa1, p = 2 -> kappa2, otherwise the table.
  std::optional<double> kappa_at(double p) const;
  /// d_q with q = 2 -> kappa2, q = inf -> d_inf, otherwise the table.
  std::optional<double> d_at(double q) const;
};

/// Throws InconsistentProfile naming the first violated inequality.
void validate(const DimensionProfile& profile);

struct ProfileOverrides {
  std::optional<double> kappa1;
  std::optional<double> kappa2;
  std::optional<double> kappa_star;
  std::optional<double> d_inf;
  std::map<double, double> kappa_p;
  std::map<double, double> d_q;
};

/// Exact formulas where the declared separation allows, estimates otherwise, user
/// overrides last; the result is validated.
DimensionProfile build_profile(const SelfSimilarIFS& ifs, Separation declared,
                               const ProfileOverrides& overrides = {},
                               const CorrelationConfig& correlation = {});

}  // namespace ssf
