#include "ssf/bounds.hpp"

#include "ssf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ssf {

namespace {

constexpr double kBoundaryTol = 1e-12;

double conjugate_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

struct Exponents {
  double kp;
  double dq;
};

Exponents exponents_for(const DimensionProfile& pr, double p) {
  if (!(p >= 1.0 && p <= 2.0)) {
    throw BadConfig("p must lie in [1, 2], got " + format_double(p));
  }
  const double q = conjugate_exponent(p);
  const auto kp = pr.kappa_at(p);
  if (!kp) throw MissingExponent("kappa_p missing for p = " + format_double(p));
  const auto dq = pr.d_at(q);
  if (!dq) throw MissingExponent("d_q missing for q = " + format_double(q));
  return {*kp, *dq};
}

ConditionVerdict compare(double lhs, double rhs, std::string formula) {
  ConditionVerdict v;
  v.lhs = lhs;
  v.rhs = rhs;
  v.formula = std::move(formula);
  v.boundary = std::abs(lhs - rhs) <= kBoundaryTol;
  v.holds = lhs > rhs && !v.boundary;
  if (v.boundary) v.notes.push_back("boundary case: strict inequality fails");
  return v;
}

double sigma_of(double kappa) { return (kappa - 0.5) / (kappa + 1.5); }

void finish(DecayBound& out, const DimensionProfile& pr, const DecayHypotheses& hyp) {
  out.conjectural_ceiling = pr.kappa2.value / 2.0;
  const bool curvature = hyp.curvature_nonvanishing.value_or(false);
  const bool non_expanding = hyp.non_expanding.value_or(pr.k <= 2);
  out.applicable = true;
  if (pr.kappa2.value <= pr.k / 2.0) {
    out.applicable = false;
    out.notes.push_back("kappa2 <= k/2: no decay can be inferred from these exponents");
  }
  if (!hyp.curvature_nonvanishing) {
    out.applicable = false;
    out.notes.push_back("curvature of the map not verified");
  } else if (!curvature) {
    out.applicable = false;
    out.notes.push_back("map has vanishing curvature");
  }
  if (!non_expanding) {
    out.applicable = false;
    out.notes.push_back(hyp.non_expanding ? "orientation group is expanding"
                                          : "non-expanding orientations not verified");
  }
  if (out.sigma > 0.0) {
    out.gamma = compute_gamma(pr, out.best_p);
  }
}

}  // namespace

double sigma_p(const DimensionProfile& pr, double p) {
  const auto [kp, dq] = exponents_for(pr, p);
  const double k = pr.k;
  const double num = dq + kp - k;
  if (num <= 0.0) return 0.0;
  const double den = 2.0 * p - k + 2.0 * pr.kappa_star.value + kp - dq;
  if (den <= 0.0) throw InconsistentProfile("kappa2 <= kappa_star", "non-positive denominator");
  return num / den;
}

double compute_gamma(const DimensionProfile& pr, double p) {
  const auto [kp, dq] = exponents_for(pr, p);
  const double k = pr.k;
  const double num = dq + kp - k;
  if (num <= 0.0) {
    throw NotApplicable("d_q + kappa_p <= k at p = " + format_double(p) + ": no split point");
  }
  return 2.0 - num / (p + pr.kappa_star.value + kp - k);
}

DecayBound decay_exponent_bound(const DimensionProfile& pr, const DecayHypotheses& hyp) {
  DecayBound out;
  out.formula = "max over p in {1, 2} of (d_q + kappa_p - k) / (2p - k + 2 kappa_* + kappa_p - d_q)";
  const double s2 = sigma_p(pr, 2.0);
  out.sigma_p_table[2.0] = s2;
  out.sigma = s2;
  out.best_p = 2.0;
  if (pr.kappa1) {
    const double s1 = sigma_p(pr, 1.0);
    out.sigma_p_table[1.0] = s1;
    if (s1 > out.sigma) {
      out.sigma = s1;
      out.best_p = 1.0;
    }
  } else {
    out.notes.push_back("kappa1 unknown: l^1 branch skipped");
  }
  finish(out, pr, hyp);
  return out;
}

DecayBound decay_bound_table(const DimensionProfile& pr, const std::vector<double>& p_grid,
                             const DecayHypotheses& hyp) {
  DecayBound out;
  out.formula = "max over p of (d_q + kappa_p - k) / (2p - k + 2 kappa_* + kappa_p - d_q), q = p/(p-1)";
  bool any = false;
  for (const double p : p_grid) {
    try {
      const double s = sigma_p(pr, p);
      out.sigma_p_table[p] = s;
      if (!any || s > out.sigma) {
        out.sigma = s;
        out.best_p = p;
      }
      any = true;
    } catch (const MissingExponent& e) {
      out.notes.push_back(std::string("skipped: ") + e.what());
    }
  }
  if (!any) throw MissingExponent("no p in the grid has both kappa_p and d_q");
  finish(out, pr, hyp);
  return out;
}

double vdc_exponent(const DimensionProfile& pr, int l, bool refined) {
  if (pr.k != 2) throw NotApplicable("holomorphic exponent needs k = 2");
  if (l < 2) throw BadConfig("derivative order l must be >= 2");
  const double k2 = pr.kappa2.value;
  if (k2 <= 1.0) throw NotApplicable("kappa2 <= 1");
  const double ks = pr.kappa_star.value;
  const double dinf = pr.d_inf.value;
  if (!refined) return dinf * (k2 - 1.0) / (ks * l);
  const double eta = l - 2;
  return (k2 - 1.0) / (1.0 + ks + eta * ks / dinf);
}

ConditionVerdict two_set_condition(double a, double b) {
  const double lhs = a * b + std::max(1.5 * a + b, 1.5 * b + a);
  return compare(lhs, 2.5, "dim E dim F + max(1.5 dim E + dim F, 1.5 dim F + dim E) > 2.5");
}

ConditionVerdict three_set_condition(double a, double b, double c) {
  const double dims[3] = {a, b, c};
  ConditionVerdict best;
  bool have = false;
  for (int r = 0; r < 3; ++r) {
    const double e = dims[r];
    const double f = dims[(r + 1) % 3];
    const double g = dims[(r + 2) % 3];
    if (g <= 0.5) continue;
    auto v = compare(0.5 * e + 0.5 * f + sigma_of(g), 1.0,
                     "dim E/2 + dim F/2 + (dim G - 0.5)/(dim G + 1.5) > 1 for some ordering");
    if (!have || v.holds || (!best.holds && v.lhs > best.lhs)) {
      best = v;
      have = true;
    }
    if (best.holds) break;
  }
  if (!have) {
    best.formula = "dim E/2 + dim F/2 + (dim G - 0.5)/(dim G + 1.5) > 1 for some ordering";
    best.rhs = 1.0;
    best.notes.push_back("no set has dimension above 1/2");
  }
  return best;
}

Thresholds symmetric_thresholds() {
  Thresholds t;
  // t2: 2 sigma(k) + k = 1; t3: sigma(k) + k = 1, with sigma(k) = (k - 0.5)/(k + 1.5).
  auto dsig = [](double k) { return 2.0 / ((k + 1.5) * (k + 1.5)); };
  auto f2 = [](double k) { return 2.0 * sigma_of(k) + k - 1.0; };
  auto f3 = [](double k) { return sigma_of(k) + k - 1.0; };
  t.t2 = bracketed_root(f2, [&](double k) { return 2.0 * dsig(k) + 1.0; }, 0.5, 1.0);
  t.t3 = bracketed_root(f3, [&](double k) { return dsig(k) + 1.0; }, 0.5, 1.0);
  t.residual2 = std::abs(f2(t.t2));
  t.residual3 = std::abs(f3(t.t3));
  return t;
}

ProductCriteriaVerdict product_measure_conditions(double a, double b, bool nu_ad_regular) {
  ProductCriteriaVerdict v;
  const auto c1 = compare(std::min(a, b), 7.0 / 9.0, "min(a, b) > 7/9");
  const auto c2 = compare(std::max(4.0 * a + 5.0 * b, 5.0 * a + 4.0 * b), 7.0,
                          "max(4a + 5b, 5a + 4b) > 7");
  if (c1.holds) v.satisfied.push_back(1);
  if (c2.holds) v.satisfied.push_back(2);
  if (c1.boundary || c2.boundary) v.notes.push_back("boundary case: strict inequality fails");
  if (nu_ad_regular) {
    const auto c3 = compare(2.0 * a * b + 3.0 * a + 2.0 * b, 5.0, "2ab + 3a + 2b > 5");
    if (c3.holds) v.satisfied.push_back(3);
    if (c3.boundary) v.notes.push_back("boundary case in the AD-regular criterion");
  } else {
    v.notes.push_back("third criterion skipped: nu not AD-regular");
  }
  v.notes.push_back("second criterion threshold is 7, matching 7/9 at a = b");
  v.holds = !v.satisfied.empty();
  return v;
}

double log_pushforward_sigma(double kappa2) {
  if (kappa2 <= 0.5) throw NotApplicable("kappa2 <= 1/2");
  return sigma_of(kappa2);
}

ConditionVerdict high_dim_condition(int k, double kappa2) {
  if (k < 5) throw NotApplicable("high-dimensional criterion needs k >= 5");
  return compare(kappa2, 2.0 + k / 2.0, "kappa2 > 2 + k/2");
}

std::vector<std::string> baseline_notes(const SelfSimilarIFS& ifs) {
  std::vector<std::string> notes;
  if (ifs.ambient_dim() != 1 || ifs.size() != 2) return notes;
  const auto& maps = ifs.maps();
  const auto& w = ifs.weights();
  constexpr double eps = 1e-12;
  bool cantor = std::abs(w[0] - 0.5) < eps && std::abs(w[1] - 0.5) < eps;
  double lo = std::min(maps[0].translation[0], maps[1].translation[0]);
  double hi = std::max(maps[0].translation[0], maps[1].translation[0]);
  for (const auto& m : maps) {
    cantor = cantor && std::abs(m.ratio - 1.0 / 3.0) < eps && m.orientation(0, 0) > 0.0;
  }
  cantor = cantor && std::abs(lo) < eps && std::abs(hi - 2.0 / 3.0) < eps;
  if (cantor) {
    notes.push_back("earlier published decay exponent for nonlinear images of this measure: 0.016");
  }
  return notes;
}

}  // namespace ssf
