#include "ssf/pushforward.hpp"

#include "ssf/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace ssf {

namespace {

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m)};
  return svd.singularValues()(0);
}

double symmetric_norm(const Mat& m) {
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(m), Eigen::EigenvaluesOnly};
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Radius of the smallest origin-centred ball containing `ball`.
double reach(const Ball& ball) { return ball.center.norm() + ball.radius; }

}  // namespace

const char* to_string(MapKind kind) {
  switch (kind) {
    case MapKind::generic_c2: return "generic_c2";
    case MapKind::quadratic: return "quadratic";
    case MapKind::holomorphic: return "holomorphic";
  }
  return "generic_c2";
}

PushforwardMap::PushforwardMap(std::string name, int in_dim, int out_dim, ValueFn value,
                               JacobianFn jacobian, HessianFn hessian, BoundFn bounds)
    : name_(std::move(name)),
      in_dim_(in_dim),
      out_dim_(out_dim),
      value_(std::move(value)),
      jacobian_(std::move(jacobian)),
      hessian_(std::move(hessian)),
      bounds_(std::move(bounds)) {
  if (in_dim < 1 || in_dim > kMaxDim || out_dim < 1 || out_dim > kMaxDim)
    throw ValidationError("map dimensions must be in [1, " + std::to_string(kMaxDim) + "]");
}

PushforwardMap PushforwardMap::identity(int k) {
  PushforwardMap m = affine(Mat::Identity(k, k), Vec::Zero(k));
  m.name_ = "identity";
  return m;
}

PushforwardMap PushforwardMap::constant(const Vec& c, int k) {
  const int d = static_cast<int>(c.size());
  PushforwardMap m(
      "constant", k, d, [c](const Vec&) { return c; },
      [d, k](const Vec&) -> Mat { return Mat::Zero(d, k); },
      [k](const Vec&, const Vec&) -> Mat { return Mat::Zero(k, k); },
      [](const Ball&) { return MapBounds{0.0, 0.0, false}; });
  m.affine_ = true;
  m.constant_ = true;
  return m;
}

PushforwardMap PushforwardMap::affine(const Mat& a, const Vec& b) {
  if (a.rows() != b.size()) throw ValidationError("affine map: A rows must match b length");
  const int k = static_cast<int>(a.cols());
  const double lip = spectral_norm(a);
  PushforwardMap m(
      "affine", k, static_cast<int>(a.rows()), [a, b](const Vec& x) -> Vec { return a * x + b; },
      [a](const Vec&) -> Mat { return a; },
      [k](const Vec&, const Vec&) -> Mat { return Mat::Zero(k, k); },
      [lip](const Ball&) { return MapBounds{lip, 0.0, false}; });
  m.affine_ = true;
  m.constant_ = lip == 0.0;
  return m;
}

PushforwardMap PushforwardMap::polynomial(std::vector<double> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back(0.0);
  auto horner = [](const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  std::vector<double> d1, d2;
  for (std::size_t j = 1; j < coeffs.size(); ++j) d1.push_back(static_cast<double>(j) * coeffs[j]);
  for (std::size_t j = 1; j < d1.size(); ++j) d2.push_back(static_cast<double>(j) * d1[j]);
  if (d1.empty()) d1.push_back(0.0);
  if (d2.empty()) d2.push_back(0.0);
  auto abs_at = [horner](std::vector<double> c, double rho) {
    for (double& v : c) v = std::abs(v);
    return horner(c, rho);
  };

  std::string name = "polynomial";
  if (coeffs.size() == 3 && coeffs[0] == 0.0 && coeffs[1] == 0.0 && coeffs[2] == 1.0) name = "square";
  PushforwardMap m(
      name, 1, 1, [coeffs, horner](const Vec& x) { return Vec::Constant(1, horner(coeffs, x(0))); },
      [d1, horner](const Vec& x) -> Mat { return Mat::Constant(1, 1, horner(d1, x(0))); },
      [d2, horner](const Vec& x, const Vec& v) -> Mat {
        return Mat::Constant(1, 1, v(0) * horner(d2, x(0)));
      },
      [d1, d2, abs_at](const Ball& b) {
        const double rho = reach(b);
        return MapBounds{abs_at(d1, rho), abs_at(d2, rho), false};
      });
  m.affine_ = coeffs.size() <= 2;
  m.constant_ = coeffs.size() == 1;
  return m;
}

PushforwardMap PushforwardMap::power(int n) {
  if (n < 0) throw ValidationError("power map needs a non-negative exponent");
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c.back() = 1.0;
  PushforwardMap m = polynomial(std::move(c));
  m.name_ = "power" + std::to_string(n);
  return m;
}

PushforwardMap PushforwardMap::log_map(double shift, int sign) {
  const double s = sign < 0 ? -1.0 : 1.0;
  return PushforwardMap(
      "log", 1, 1,
      [shift, s](const Vec& x) { return Vec::Constant(1, s * std::log(x(0) - shift)); },
      [shift, s](const Vec& x) -> Mat { return Mat::Constant(1, 1, s / (x(0) - shift)); },
      [shift, s](const Vec& x, const Vec& v) -> Mat {
        const double u = x(0) - shift;
        return Mat::Constant(1, 1, -v(0) * s / (u * u));
      },
      [shift](const Ball& b) {
        const double gap = b.center(0) - b.radius - shift;
        if (!(gap > 0.0))
          throw SupportNotPositive("support hull reaches " + format_double(b.center(0) - b.radius) +
                                   ", log map needs points above " + format_double(shift));
        return MapBounds{1.0 / gap, 1.0 / (gap * gap), false};
      });
}

PushforwardMap PushforwardMap::quadratic(QuadraticCoefficients coeffs) {
  const int d = static_cast<int>(coeffs.quadratic.size());
  if (d < 1) throw ValidationError("quadratic map needs at least one component");
  const int k = static_cast<int>(coeffs.quadratic.front().rows());
  if (coeffs.linear.size() == 0) coeffs.linear = Mat::Zero(d, k);
  if (coeffs.constant.size() == 0) coeffs.constant = Vec::Zero(d);
  if (coeffs.linear.rows() != d || coeffs.linear.cols() != k || coeffs.constant.size() != d)
    throw ValidationError("quadratic map: linear part must be d x k and constant of length d");
  bool affine = true;
  for (const auto& c : coeffs.quadratic) {
    if (c.rows() != k || c.cols() != k)
      throw ValidationError("quadratic map: every coefficient matrix must be k x k");
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw ValidationError("quadratic map: coefficient matrices must be symmetric");
    if (c.cwiseAbs().maxCoeff() != 0.0) affine = false;
  }
  const auto& q = coeffs;
  double quad_norm_sq = 0.0;
  std::vector<double> row_quad, row_lin;
  for (int i = 0; i < d; ++i) {
    const double n = symmetric_norm(q.quadratic[i]);
    quad_norm_sq += n * n;
    row_quad.push_back(2.0 * n);
    row_lin.push_back(q.linear.row(i).norm());
  }
  const double hess = 2.0 * std::sqrt(quad_norm_sq);
  PushforwardMap m(
      "quadratic", k, d,
      [q, d](const Vec& x) {
        Vec out(d);
        for (int i = 0; i < d; ++i)
          out(i) = x.dot(q.quadratic[i] * x) + q.linear.row(i).dot(x) + q.constant(i);
        return out;
      },
      [q, d, k](const Vec& x) {
        Mat j(d, k);
        for (int i = 0; i < d; ++i) j.row(i) = (2.0 * (q.quadratic[i] * x)).transpose() + q.linear.row(i);
        return j;
      },
      [q, d, k](const Vec&, const Vec& v) {
        Mat h = Mat::Zero(k, k);
        for (int i = 0; i < d; ++i) h += 2.0 * v(i) * q.quadratic[i];
        return h;
      },
      [row_quad, row_lin, hess, d](const Ball& b) {
        const double rho = reach(b);
        double sq = 0.0;
        for (int i = 0; i < d; ++i) {
          const double r = row_lin[i] + row_quad[i] * rho;
          sq += r * r;
        }
        return MapBounds{std::sqrt(sq), hess, false};
      });
  m.kind_ = MapKind::quadratic;
  m.affine_ = affine;
  m.quadratic_ = std::move(coeffs);
  return m;
}

PushforwardMap PushforwardMap::holomorphic(std::string name, HolomorphicFunctions fns,
                                           BoundFn bounds) {
  const auto f = fns.f, df = fns.df, d2f = fns.d2f;
  PushforwardMap m(
      std::move(name), 2, 2,
      [f](const Vec& x) {
        const auto w = f({x(0), x(1)});
        Vec out(2);
        out << w.real(), w.imag();
        return out;
      },
      [df](const Vec& x) {
        const auto w = df({x(0), x(1)});
        Mat j(2, 2);
        j << w.real(), -w.imag(), w.imag(), w.real();
        return j;
      },
      [d2f](const Vec& x, const Vec& v) {
        const auto w = d2f({x(0), x(1)});
        // U = Re f, V = Im f: U_xx = Re f'', U_xy = -Im f'', V_xx = Im f'', V_xy = Re f''.
        const double a = v(0) * w.real() + v(1) * w.imag();
        const double b = -v(0) * w.imag() + v(1) * w.real();
        Mat h(2, 2);
        h << a, b, b, -a;
        return h;
      },
      std::move(bounds));
  m.kind_ = MapKind::holomorphic;
  m.holomorphic_ = std::move(fns);
  return m;
}

PushforwardMap PushforwardMap::holomorphic_power(int n) {
  if (n < 1) throw ValidationError("holomorphic power needs n >= 1");
  using C = std::complex<double>;
  HolomorphicFunctions fns{
      [n](C z) { return std::pow(z, n); },
      [n](C z) { return n == 1 ? C(1.0) : static_cast<double>(n) * std::pow(z, n - 1); },
      [n](C z) {
        return n < 2 ? C(0.0) : static_cast<double>(n * (n - 1)) * (n == 2 ? C(1.0) : std::pow(z, n - 2));
      }};
  PushforwardMap m = holomorphic("z^" + std::to_string(n), std::move(fns), [n](const Ball& b) {
    const double rho = reach(b);
    const double lip = n * std::pow(rho, n - 1);
    const double hess = n < 2 ? 0.0 : n * (n - 1) * std::pow(rho, n - 2);
    return MapBounds{lip, hess, false};
  });
  m.affine_ = n == 1;
  return m;
}

PushforwardMap PushforwardMap::graph_lift(const PushforwardMap& f) {
  if (f.out_dim() != 1) throw ValidationError("graph lift needs a scalar map");
  auto inner = std::make_shared<const PushforwardMap>(f);
  const int k = f.in_dim();
  PushforwardMap m(
      "graph(" + f.name() + ")", k, k + 1,
      [inner, k](const Vec& x) {
        Vec out(k + 1);
        out.head(k) = x;
        out(k) = inner->value(x)(0);
        return out;
      },
      [inner, k](const Vec& x) {
        Mat j(k + 1, k);
        j.topRows(k) = Mat::Identity(k, k);
        j.row(k) = inner->jacobian(x).row(0);
        return j;
      },
      [inner, k](const Vec& x, const Vec& v) -> Mat {
        return v(k) * inner->hessian(x, Vec::Ones(1));
      },
      [inner](const Ball& b) {
        MapBounds fb = inner->bounds_on(b);
        MapBounds out = fb;
        if (fb.lipschitz) out.lipschitz = std::sqrt(1.0 + *fb.lipschitz * *fb.lipschitz);
        return out;
      });
  m.affine_ = f.is_affine();
  m.lifted_ = std::move(inner);
  return m;
}

Mat PushforwardMap::jacobian(const Vec& x) const {
  if (jacobian_) return jacobian_(x);
  Mat j(out_dim_, in_dim_);
  for (int c = 0; c < in_dim_; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(c)));
    Vec xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    j.col(c) = (value_(xp) - value_(xm)) / (2.0 * h);
  }
  return j;
}

Mat PushforwardMap::hessian(const Vec& x, const Vec& v) const {
  if (hessian_) return hessian_(x, v);
  Mat h(in_dim_, in_dim_);
  for (int c = 0; c < in_dim_; ++c) {
    const double step = 1e-4 * std::max(1.0, std::abs(x(c)));
    Vec xp = x, xm = x;
    xp(c) += step;
    xm(c) -= step;
    h.col(c) = (jacobian(xp).transpose() * v - jacobian(xm).transpose() * v) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

PushforwardMap PushforwardMap::with_bounds(std::optional<double> lipschitz,
                                           std::optional<double> hessian, bool estimated) const {
  for (auto b : {lipschitz, hessian})
    if (b && !(std::isfinite(*b) && *b >= 0.0))
      throw ValidationError("derivative bounds must be finite and non-negative");
  PushforwardMap m = *this;
  m.fixed_bounds_ = MapBounds{lipschitz, hessian, estimated};
  return m;
}

MapBounds PushforwardMap::bounds_on(const Ball& ball) const {
  MapBounds out;
  if (bounds_) out = bounds_(ball);
  if (fixed_bounds_) {
    if (fixed_bounds_->lipschitz) out.lipschitz = fixed_bounds_->lipschitz;
    if (fixed_bounds_->hessian) out.hessian = fixed_bounds_->hessian;
    out.estimated = out.estimated || fixed_bounds_->estimated;
  }
  return out;
}

double PushforwardMap::phase_scale(const Vec& xi, const Ball& ball) const {
  if (constant_) return 0.0;
  if (lifted_) {
    // <(zeta, t), (x, f(x))> has Lipschitz constant at most |zeta| + |t| L_f.
    const auto fb = lifted_->bounds_on(ball);
    if (!fb.lipschitz) throw MissingLipschitzBound("no Lipschitz bound for " + lifted_->name());
    return xi.head(in_dim_).norm() + xi.tail(1).norm() * *fb.lipschitz;
  }
  const auto b = bounds_on(ball);
  if (!b.lipschitz) throw MissingLipschitzBound("no Lipschitz bound for " + name_);
  return xi.norm() * *b.lipschitz;
}

MapBounds estimate_bounds(const PushforwardMap& map, const SelfSimilarIFS& ifs, std::size_t n,
                          std::uint64_t seed) {
  if (map.in_dim() != ifs.ambient_dim())
    throw ValidationError("map input dimension differs from the IFS dimension");
  const auto pts = sample_measure(ifs, n, seed);
  double lip = 0.0, hess = 0.0;
  for (const auto& x : pts) {
    lip = std::max(lip, spectral_norm(map.jacobian(x)));
    double sq = 0.0;
    for (int i = 0; i < map.out_dim(); ++i) {
      const double h = symmetric_norm(map.hessian(x, Vec::Unit(map.out_dim(), i)));
      sq += h * h;
    }
    hess = std::max(hess, std::sqrt(sq));
  }
  return MapBounds{1.5 * lip, 1.5 * hess, true};
}

DerivativeCheck validate_derivatives(const PushforwardMap& map, const std::vector<Vec>& points) {
  DerivativeCheck out;
  const int k = map.in_dim(), d = map.out_dim();
  for (const auto& x : points) {
    const Mat j = map.jacobian(x);
    for (int c = 0; c < k; ++c) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(c)));
      Vec xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      const Vec fd = (map.value(xp) - map.value(xm)) / (2.0 * h);
      const double err = (fd - j.col(c)).norm() / std::max(1.0, j.col(c).norm());
      out.max_gradient_error = std::max(out.max_gradient_error, err);
    }
    for (int i = 0; i < d; ++i) {
      const Vec v = Vec::Unit(d, i);
      const Mat h = map.hessian(x, v);
      for (int c = 0; c < k; ++c) {
        const double step = 1e-4 * std::max(1.0, std::abs(x(c)));
        Vec xp = x, xm = x;
        xp(c) += step;
        xm(c) -= step;
        const Vec fd = (map.jacobian(xp).transpose() * v - map.jacobian(xm).transpose() * v) / (2.0 * step);
        const double err = (fd - h.col(c)).norm() / std::max(1.0, h.col(c).norm());
        out.max_hessian_error = std::max(out.max_hessian_error, err);
      }
    }
  }
  if (out.max_gradient_error > 1e-5 || out.max_hessian_error > 1e-5)
    throw ValidationError("derivative evaluators disagree with finite differences (gradient " +
                          format_double(out.max_gradient_error) + ", hessian " +
                          format_double(out.max_hessian_error) + ")");
  return out;
}

}  // namespace ssf
