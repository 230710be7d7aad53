#pragma once

// Fourier transforms of self-similar measures and of their smooth pushforwards,
// with explicit truncation error bounds.

#include "ssf/common.hpp"
#include "ssf/ifs.hpp"
#include "ssf/pushforward.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace ssf {

enum class Scheme { exact_recursion, order0, order1 };
const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct FrequencySample {
  Vec xi;
  std::complex<double> value;
  double error_bound = 0.0;
  Scheme scheme = Scheme::exact_recursion;
  std::size_t leaves_used = 0;
  /// False when the bound rests on sampled (estimated) derivative bounds.
  bool certified = true;
};

struct MuHatOptions {
  std::size_t budget = default_leaf_budget();
  /// For homogeneous systems evaluate the product formula instead of the full tree.
  bool homogeneous_fast_path = false;
};

/// mu^(xi) = int e^{-2 pi i <xi, x>} dmu(x), expanded through the self-similarity
/// relation until every branch frequency is small enough that replacing mu^ by the
/// barycentre phase costs at most `tol`.
FrequencySample mu_hat(const SelfSimilarIFS& ifs, const Vec& xi, double tol,
                       const MuHatOptions& options = {});

struct PushforwardOptions {
  std::size_t budget = default_leaf_budget();
  /// Homogeneous product formula for the inner transforms of the order-1 scheme.
  bool inner_fast_path = true;
  /// Derivative bounds to use instead of the map's own (for example sampled ones).
  std::optional<MapBounds> bounds_override;
};

/// Weighted exponential sum over a stopping decomposition with anchors f_w(c).
FrequencySample pushforward_hat_order0(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                       const Vec& xi, double tol,
                                       const PushforwardOptions& options = {});

/// Per-cylinder linearisation of the map, each piece integrated exactly through mu^.
FrequencySample pushforward_hat_order1(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                       const Vec& xi, double tol,
                                       const PushforwardOptions& options = {});

/// Parallel over frequencies; each result is independent of the thread count.
/// exact_recursion evaluates the plain transform and ignores `map`; the other
/// schemes require one.
std::vector<FrequencySample> evaluate_batch(const SelfSimilarIFS& ifs, const PushforwardMap* map,
                                            const std::vector<Vec>& xis, Scheme scheme, double tol,
                                            unsigned threads = 0,
                                            const PushforwardOptions& options = {});

struct CurvatureReport {
  double min_abs_hessian_det = 0.0;
  Vec argmin;
  bool vanishing = false;
  std::size_t points_checked = 0;
};

/// min |det Hess f| over measure samples plus the fixed points of short words.
CurvatureReport curvature_diagnostic(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                     std::size_t n_samples, std::uint64_t seed);

struct DirectionalHessian {
  Mat hessian;
  double det = 0.0;
};

/// Hessian of x -> <v, f(x)> for a quadratic map; constant in x.
DirectionalHessian quadratic_directional_hessian(const PushforwardMap& map, const Vec& v);

struct HolomorphicHessian {
  double det = 0.0;
  double eigen_mag_1 = 0.0;
  double eigen_mag_2 = 0.0;
  /// Determinant of the finite-difference Hessian of v1 U + v2 V.
  double fd_det = 0.0;
  double fd_relative_error = 0.0;
};

/// det Hess(v1 U + v2 V) = -|f''(z)|^2 with eigenvalues +-|f''(z)|, for unit v.
HolomorphicHessian holomorphic_hessian_identity(const PushforwardMap& map, std::complex<double> z,
                                                const Vec& v);

}  // namespace ssf
