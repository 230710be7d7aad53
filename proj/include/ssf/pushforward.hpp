#pragma once

// Smooth maps f: R^k -> R^d used to push self-similar measures forward, with
// derivative evaluators and certified derivative bounds on a ball.

#include "ssf/common.hpp"
#include "ssf/ifs.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ssf {

enum class MapKind { generic_c2, quadratic, holomorphic };
const char* to_string(MapKind kind);

/// Sup bounds over a ball: lipschitz >= |Df(x)|_op, hessian >= |Hess(u.f)(x)|_op for unit u.
struct MapBounds {
  std::optional<double> lipschitz;
  std::optional<double> hessian;
  /// Sampled rather than proven; results computed from them are not certified.
  bool estimated = false;
};

/// f(x) = x^T C_i x + a_i . x + b_i per output coordinate, C_i symmetric.
struct QuadraticCoefficients {
  std::vector<Mat> quadratic;
  Mat linear;
  Vec constant;
};

struct HolomorphicFunctions {
  std::function<std::complex<double>(std::complex<double>)> f, df, d2f;
};

class PushforwardMap {
 public:
  using ValueFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;
  /// Hessian of x -> <v, f(x)>.
  using HessianFn = std::function<Mat(const Vec&, const Vec&)>;
  using BoundFn = std::function<MapBounds(const Ball&)>;

  PushforwardMap(std::string name, int in_dim, int out_dim, ValueFn value,
                 JacobianFn jacobian = {}, HessianFn hessian = {}, BoundFn bounds = {});

  static PushforwardMap identity(int k);
  static PushforwardMap constant(const Vec& c, int k);
  /// x -> A x + b with A of shape d x k.
  static PushforwardMap affine(const Mat& a, const Vec& b);
  /// Real polynomial sum_j coeffs[j] x^j on the line.
  static PushforwardMap polynomial(std::vector<double> coeffs);
  static PushforwardMap square() { return polynomial({0.0, 0.0, 1.0}); }
  static PushforwardMap power(int n);
  /// x -> sign * log(x - shift), defined for x > shift.
  static PushforwardMap log_map(double shift, int sign = 1);
  static PushforwardMap quadratic(QuadraticCoefficients coeffs);
  /// z -> f(z) viewed as R^2 -> R^2. `bounds` gives sup |f'| and sup |f''| on a ball.
  static PushforwardMap holomorphic(std::string name, HolomorphicFunctions fns, BoundFn bounds);
  static PushforwardMap holomorphic_power(int n);
  /// x -> (x, f(x)) for scalar f.
  static PushforwardMap graph_lift(const PushforwardMap& f);

  const std::string& name() const { return name_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  MapKind kind() const { return kind_; }
  bool is_affine() const { return affine_; }
  bool is_constant() const { return constant_; }

  Vec value(const Vec& x) const { return value_(x); }
  /// d x k Jacobian; central differences when no evaluator was supplied.
  Mat jacobian(const Vec& x) const;
  /// k x k Hessian of <v, f>; finite differences of the Jacobian when absent.
  Mat hessian(const Vec& x, const Vec& v) const;
  bool has_exact_jacobian() const { return static_cast<bool>(jacobian_); }
  bool has_exact_hessian() const { return static_cast<bool>(hessian_); }

  /// Fixed bounds that take precedence over the analytic ones.
  PushforwardMap with_bounds(std::optional<double> lipschitz, std::optional<double> hessian,
                             bool estimated = false) const;
  MapBounds bounds_on(const Ball& ball) const;

  /// Upper bound for the Lipschitz constant of x -> <xi, f(x)> on `ball`.
  double phase_scale(const Vec& xi, const Ball& ball) const;

  const std::optional<QuadraticCoefficients>& quadratic_coefficients() const { return quadratic_; }
  const std::optional<HolomorphicFunctions>& holomorphic_functions() const { return holomorphic_; }

 private:
  std::string name_;
  int in_dim_;
  int out_dim_;
  MapKind kind_ = MapKind::generic_c2;
  bool affine_ = false;
  bool constant_ = false;
  ValueFn value_;
  JacobianFn jacobian_;
  HessianFn hessian_;
  BoundFn bounds_;
  std::optional<MapBounds> fixed_bounds_;
  std::optional<QuadraticCoefficients> quadratic_;
  std::optional<HolomorphicFunctions> holomorphic_;
  /// Set for graph lifts: the lifted scalar map.
  std::shared_ptr<const PushforwardMap> lifted_;
};

/// 1.5 x the largest sampled derivative norms over `n` measure samples, flagged estimated.
MapBounds estimate_bounds(const PushforwardMap& map, const SelfSimilarIFS& ifs, std::size_t n = 10'000,
                          std::uint64_t seed = 0);

struct DerivativeCheck {
  double max_gradient_error = 0.0;
  double max_hessian_error = 0.0;
};

/// Compares supplied derivative evaluators with finite differences at `points`.
/// Throws ValidationError when a relative error exceeds 1e-5.
DerivativeCheck validate_derivatives(const PushforwardMap& map, const std::vector<Vec>& points);

}  // namespace ssf
