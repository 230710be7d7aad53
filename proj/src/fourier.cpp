#include "ssf/fourier.hpp"

#include "ssf/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ssf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnitRoundoff = 0x1.0p-53;

/// Hull radius and rounding scale used in every bound: the computed radius is
/// inflated slightly so that rounding in the barycentre cannot shrink it.
struct Geometry {
  Vec center;
  double radius;
  /// Upper bound on the distance between the computed and exact barycentre.
  double center_error;
  /// Magnitude scale of coordinates reached while composing maps.
  double magnitude;
  double max_ratio;
};

Geometry geometry(const SelfSimilarIFS& ifs) {
  const Ball& hull = ifs.support_hull();
  Geometry g;
  g.center = hull.center;
  const double cn = hull.center.norm();
  g.radius = hull.radius * (1.0 + 1e-12) + 64.0 * kUnitRoundoff * cn;
  g.center_error = 64.0 * kUnitRoundoff * (cn + hull.radius);
  double tmax = 0.0;
  for (const auto& m : ifs.maps()) tmax = std::max(tmax, m.translation.norm());
  g.max_ratio = ifs.max_ratio();
  g.magnitude = cn + g.radius + tmax / (1.0 - g.max_ratio);
  return g;
}

/// Bound on |mu^(eta) - e^{-2 pi i <eta, c>}|. The linear term of the expansion
/// around the barycentre integrates to zero, leaving the quadratic remainder plus
/// the barycentre's rounding error.
double leaf_error(double eta_norm, const Geometry& g) {
  const double theta = kTwoPi * eta_norm * g.radius;
  return std::min({2.0, theta, 0.5 * theta * theta + kTwoPi * eta_norm * g.center_error});
}

double roundoff_allowance(int depth, double phase_magnitude) {
  return kTwoPi * kUnitRoundoff * (4.0 * depth + 16.0) * phase_magnitude + 16.0 * kUnitRoundoff;
}

FrequencySample unit_sample(const Vec& xi, Scheme scheme) {
  FrequencySample s;
  s.xi = xi;
  s.value = 1.0;
  s.error_bound = 0.0;
  s.scheme = scheme;
  s.leaves_used = 1;
  return s;
}

class TreeTransform {
 public:
  TreeTransform(const SelfSimilarIFS& ifs, double tol, std::size_t budget)
      : ifs_(ifs), g_(geometry(ifs)), tol_(tol), budget_(budget) {
    for (const auto& m : ifs.maps()) adjoints_.push_back(m.ratio * m.orientation.transpose());
  }

  void run(const Vec& xi) { node(xi, 0.0, 1.0, 0); }

  std::complex<double> value() const { return sum_.value(); }
  double error() const { return error_.value(); }
  std::size_t leaves() const { return leaves_; }
  int depth() const { return max_depth_; }
  const Geometry& geom() const { return g_; }

 private:
  void node(const Vec& eta, double phase, double weight, int depth) {
    const double e = leaf_error(eta.norm(), g_);
    if (e <= tol_) {
      if (++leaves_ > budget_) throw ResourceExceeded("leaf", budget_);
      max_depth_ = std::max(max_depth_, depth);
      sum_ += weight * unit_phase(phase + eta.dot(g_.center));
      error_ += weight * e;
      return;
    }
    for (std::size_t i = 0; i < ifs_.size(); ++i) {
      const Vec child = adjoints_[i] * eta;
      node(child, phase + eta.dot(ifs_.map(i).translation), weight * ifs_.weight(i), depth + 1);
    }
  }

  const SelfSimilarIFS& ifs_;
  Geometry g_;
  double tol_;
  std::size_t budget_;
  std::vector<Mat> adjoints_;
  CompensatedComplexSum sum_;
  CompensatedSum error_;
  std::size_t leaves_ = 0;
  int max_depth_ = 0;
};

FrequencySample homogeneous_transform(const SelfSimilarIFS& ifs, const Geometry& g, const Mat& adjoint,
                                      const Vec& xi, double tol, std::size_t budget) {
  std::complex<double> product = 1.0;
  Vec eta = xi;
  std::size_t terms = 0;
  int depth = 0;
  double error = 0.0;
  while (true) {
    const double e = leaf_error(eta.norm(), g);
    if (e <= tol) {
      product *= unit_phase(eta.dot(g.center));
      error = e;
      ++terms;
      break;
    }
    CompensatedComplexSum factor;
    for (std::size_t i = 0; i < ifs.size(); ++i)
      factor += ifs.weight(i) * unit_phase(eta.dot(ifs.map(i).translation));
    product *= factor.value();
    terms += ifs.size();
    if (terms > budget) throw ResourceExceeded("leaf", budget);
    eta = adjoint * eta;
    ++depth;
  }
  FrequencySample s;
  s.xi = xi;
  s.value = product;
  s.scheme = Scheme::exact_recursion;
  s.leaves_used = terms;
  s.error_bound = error + roundoff_allowance(depth, xi.norm() * g.magnitude) +
                  (depth + 2.0) * (ifs.size() + 4.0) * kUnitRoundoff;
  return s;
}

Mat homogeneous_adjoint(const SelfSimilarIFS& ifs) {
  return ifs.map(0).ratio * ifs.map(0).orientation.transpose();
}

void check_tol(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ValidationError("tolerance must be positive");
}

}  // namespace

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::exact_recursion: return "exact_recursion";
    case Scheme::order0: return "order0";
    case Scheme::order1: return "order1";
  }
  return "exact_recursion";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "exact_recursion" || s == "exact") return Scheme::exact_recursion;
  if (s == "order0") return Scheme::order0;
  if (s == "order1") return Scheme::order1;
  throw BadConfig("unknown scheme '" + s + "' (expected exact_recursion, order0 or order1)");
}

FrequencySample mu_hat(const SelfSimilarIFS& ifs, const Vec& xi, double tol,
                       const MuHatOptions& options) {
  check_tol(tol);
  if (xi.size() != ifs.ambient_dim())
    throw ValidationError("frequency dimension differs from the IFS dimension");
  if (xi.isZero(0.0)) return unit_sample(xi, Scheme::exact_recursion);
  if (options.homogeneous_fast_path && is_homogeneous(ifs))
    return homogeneous_transform(ifs, geometry(ifs), homogeneous_adjoint(ifs), xi, tol, options.budget);

  TreeTransform tree(ifs, tol, options.budget);
  tree.run(xi);
  FrequencySample s;
  s.xi = xi;
  s.value = tree.value();
  s.scheme = Scheme::exact_recursion;
  s.leaves_used = tree.leaves();
  s.error_bound = tree.error() + roundoff_allowance(tree.depth(), xi.norm() * tree.geom().magnitude);
  return s;
}

namespace {

void check_map(const SelfSimilarIFS& ifs, const PushforwardMap& map, const Vec& xi) {
  if (map.in_dim() != ifs.ambient_dim())
    throw ValidationError("map input dimension differs from the IFS dimension");
  if (xi.size() != map.out_dim())
    throw ValidationError("frequency dimension differs from the map output dimension");
}

int depth_of(std::size_t letters) { return static_cast<int>(letters); }

}  // namespace

FrequencySample pushforward_hat_order0(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                       const Vec& xi, double tol,
                                       const PushforwardOptions& options) {
  check_tol(tol);
  check_map(ifs, map, xi);
  if (xi.isZero(0.0)) return unit_sample(xi, Scheme::order0);
  const Geometry g = geometry(ifs);
  const Ball& hull = ifs.support_hull();

  bool certified = true;
  double scale_factor;
  if (options.bounds_override) {
    if (!options.bounds_override->lipschitz)
      throw MissingLipschitzBound("no Lipschitz bound for " + map.name());
    scale_factor = xi.norm() * *options.bounds_override->lipschitz;
    certified = !options.bounds_override->estimated;
  } else {
    scale_factor = map.phase_scale(xi, hull);
    if (!map.is_constant()) certified = !map.bounds_on(hull).estimated;
  }

  const double delta =
      scale_factor > 0.0 ? tol / (kTwoPi * scale_factor * g.radius) : std::numeric_limits<double>::infinity();
  const double scale = std::min(delta, 1.0);

  CompensatedComplexSum sum;
  CompensatedSum error;
  double max_phase = 0.0;
  int depth = 0;
  const std::size_t leaves =
      for_each_cylinder(ifs, scale, options.budget, [&](const CylinderView& w) {
        const Vec anchor = w.ratio * (w.orientation * g.center) + w.translation;
        const double phase = xi.dot(map.value(anchor));
        sum += w.weight * unit_phase(phase);
        error += w.weight * kTwoPi * scale_factor * w.ratio * g.radius;
        max_phase = std::max(max_phase, std::abs(phase));
        depth = std::max(depth, depth_of(w.letters.size()));
      });

  FrequencySample s;
  s.xi = xi;
  s.value = sum.value();
  s.scheme = Scheme::order0;
  s.leaves_used = leaves;
  s.certified = certified;
  s.error_bound = map.is_constant()
                      ? 0.0
                      : error.value() + roundoff_allowance(depth, max_phase + scale_factor * g.magnitude);
  return s;
}

FrequencySample pushforward_hat_order1(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                       const Vec& xi, double tol,
                                       const PushforwardOptions& options) {
  check_tol(tol);
  check_map(ifs, map, xi);
  if (xi.isZero(0.0)) return unit_sample(xi, Scheme::order1);
  const Geometry g = geometry(ifs);
  const Ball& hull = ifs.support_hull();

  const MapBounds b = options.bounds_override ? *options.bounds_override : map.bounds_on(hull);
  std::optional<double> hess = b.hessian;
  if (map.is_affine()) hess = 0.0;
  if (!hess) throw MissingHessianBound("no Hessian bound for " + map.name());
  const bool certified = map.is_affine() || !b.estimated;

  const double xi_norm = xi.norm();
  const double h = *hess;
  const double delta = h > 0.0 ? std::sqrt(tol / (kTwoPi * xi_norm * h)) / g.radius
                               : std::numeric_limits<double>::infinity();
  const double scale = std::min(delta, 1.0);
  const double inner_tol = 0.5 * tol;
  MuHatOptions inner_options;
  inner_options.homogeneous_fast_path = options.inner_fast_path;
  const bool fast = options.inner_fast_path && is_homogeneous(ifs);
  const Mat adjoint = fast ? homogeneous_adjoint(ifs) : Mat();

  CompensatedComplexSum sum;
  CompensatedSum error;
  std::size_t total = 0;
  const std::size_t budget = options.budget;
  const std::size_t cylinders =
      for_each_cylinder(ifs, scale, budget, [&](const CylinderView& w) {
        const Vec anchor = w.ratio * (w.orientation * g.center) + w.translation;
        const Vec grad = map.jacobian(anchor).transpose() * xi;
        const Vec eta = w.ratio * (w.orientation.transpose() * grad);
        const double phase = xi.dot(map.value(anchor)) - eta.dot(g.center);
        inner_options.budget = budget > total ? budget - total : 1;
        const FrequencySample inner =
            fast && !eta.isZero(0.0)
                ? homogeneous_transform(ifs, g, adjoint, eta, inner_tol, inner_options.budget)
                : mu_hat(ifs, eta, inner_tol, inner_options);
        total += 1 + inner.leaves_used;
        if (total > budget) throw ResourceExceeded("leaf", budget);
        sum += w.weight * (unit_phase(phase) * inner.value);
        const double rho = w.ratio * g.radius;
        const double taylor = 0.5 * kTwoPi * xi_norm * h * rho * rho;
        const double rounding = roundoff_allowance(
            depth_of(w.letters.size()), std::abs(phase) + (grad.norm() + eta.norm()) * g.magnitude);
        error += w.weight * (taylor + inner.error_bound + rounding);
      });

  FrequencySample s;
  s.xi = xi;
  s.value = sum.value();
  s.scheme = Scheme::order1;
  s.leaves_used = total;
  s.certified = certified;
  s.error_bound = error.value() + 4.0 * kUnitRoundoff * static_cast<double>(cylinders);
  return s;
}

std::vector<FrequencySample> evaluate_batch(const SelfSimilarIFS& ifs, const PushforwardMap* map,
                                            const std::vector<Vec>& xis, Scheme scheme, double tol,
                                            unsigned threads, const PushforwardOptions& options) {
  if (!map && scheme != Scheme::exact_recursion)
    throw BadConfig("pushforward schemes need a map");
  std::vector<FrequencySample> out(xis.size());
  parallel_for(xis.size(), threads, [&](std::size_t i) {
    switch (scheme) {
      case Scheme::exact_recursion: {
        MuHatOptions o;
        o.budget = options.budget;
        o.homogeneous_fast_path = options.inner_fast_path;
        out[i] = mu_hat(ifs, xis[i], tol, o);
        break;
      }
      case Scheme::order0: out[i] = pushforward_hat_order0(ifs, *map, xis[i], tol, options); break;
      case Scheme::order1: out[i] = pushforward_hat_order1(ifs, *map, xis[i], tol, options); break;
    }
  });
  return out;
}

CurvatureReport curvature_diagnostic(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                     std::size_t n_samples, std::uint64_t seed) {
  if (map.out_dim() != 1) throw Unsupported("curvature diagnostic needs a scalar map");
  if (map.in_dim() != ifs.ambient_dim())
    throw ValidationError("map input dimension differs from the IFS dimension");
  std::vector<Vec> points = sample_measure(ifs, n_samples, seed);
  const auto fixed = word_fixed_points(ifs, ifs.size() <= 64 ? 2 : 1);
  points.insert(points.end(), fixed.begin(), fixed.end());

  CurvatureReport report;
  report.min_abs_hessian_det = std::numeric_limits<double>::infinity();
  const Vec one = Vec::Ones(1);
  for (const auto& x : points) {
    const double det = std::abs(map.hessian(x, one).determinant());
    if (det < report.min_abs_hessian_det) {
      report.min_abs_hessian_det = det;
      report.argmin = x;
    }
  }
  report.points_checked = points.size();
  report.vanishing = report.min_abs_hessian_det < 1e-8;
  return report;
}

DirectionalHessian quadratic_directional_hessian(const PushforwardMap& map, const Vec& v) {
  const auto& q = map.quadratic_coefficients();
  if (map.kind() != MapKind::quadratic || !q) throw Unsupported("map is not quadratic");
  if (v.size() != map.out_dim()) throw ValidationError("direction has the wrong dimension");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw ValidationError("direction must be a unit vector");
  DirectionalHessian out;
  const int k = map.in_dim();
  out.hessian = Mat::Zero(k, k);
  for (int i = 0; i < map.out_dim(); ++i) out.hessian += 2.0 * v(i) * q->quadratic[i];
  out.det = out.hessian.determinant();
  return out;
}

HolomorphicHessian holomorphic_hessian_identity(const PushforwardMap& map, std::complex<double> z,
                                                const Vec& v) {
  const auto& fns = map.holomorphic_functions();
  if (map.kind() != MapKind::holomorphic || !fns) throw Unsupported("map is not holomorphic");
  if (v.size() != 2 || std::abs(v.norm() - 1.0) > 1e-12)
    throw ValidationError("direction must be a unit vector in R^2");
  HolomorphicHessian out;
  const double mag = std::abs(fns->d2f(z));
  out.det = -mag * mag;
  out.eigen_mag_1 = mag;
  out.eigen_mag_2 = mag;

  // Second differences of g = v1 U + v2 V.
  auto g = [&](double x, double y) {
    const auto w = fns->f({x, y});
    return v(0) * w.real() + v(1) * w.imag();
  };
  const double x = z.real(), y = z.imag();
  const double h = 1e-3 * std::max(1.0, std::abs(z));
  const double g0 = g(x, y);
  const double gxx = (g(x + h, y) - 2.0 * g0 + g(x - h, y)) / (h * h);
  const double gyy = (g(x, y + h) - 2.0 * g0 + g(x, y - h)) / (h * h);
  const double gxy =
      (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h)) / (4.0 * h * h);
  out.fd_det = gxx * gyy - gxy * gxy;
  out.fd_relative_error = std::abs(out.fd_det - out.det) / std::max(std::abs(out.det), 1e-300);
  return out;
}

}  // namespace ssf
