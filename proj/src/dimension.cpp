#include "ssf/dimension.hpp"

#include "ssf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssf {

namespace {

constexpr double kChainSlack = 1e-12;
constexpr double kAdTol = 1e-9;

void check_lists(std::span<const double> weights, std::span<const double> ratios) {
  if (ratios.size() < 2) throw ValidationError("at least two ratios are required");
  if (weights.size() != ratios.size())
    throw ValidationError("weights and ratios have different lengths");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("ratios must lie in (0, 1)");
  for (double p : weights)
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("weights must lie in (0, 1)");
}

/// Smallest power-of-two multiple of `start` at which `f` turns negative (f decreasing).
template <class F>
double expand_until_negative(F f, double start) {
  double hi = start;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw Error("root bracket expansion failed");
  }
  return hi;
}

}  // namespace

double similarity_dimension_set(std::span<const double> ratios) {
  if (ratios.size() < 2) throw ValidationError("at least two ratios are required");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("ratios must lie in (0, 1)");
  auto f = [&](double s) {
    CompensatedSum sum;
    for (double r : ratios) sum += std::pow(r, s);
    sum += -1.0;
    return sum.value();
  };
  auto df = [&](double s) {
    double d = 0.0;
    for (double r : ratios) d += std::pow(r, s) * std::log(r);
    return d;
  };
  const double hi = expand_until_negative(f, 1.0);
  return bracketed_root(f, df, 0.0, hi);
}

double similarity_dimension_measure(std::span<const double> weights,
                                    std::span<const double> ratios) {
  check_lists(weights, ratios);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    num += weights[i] * std::log(weights[i]);
    den += weights[i] * std::log(ratios[i]);
  }
  return num / den;
}

LqSpectrum lq_spectrum(std::span<const double> weights, std::span<const double> ratios, double q,
                       int k) {
  check_lists(weights, ratios);
  if (!(q > 1.0)) throw ValidationError("lq spectrum needs q > 1");
  // g(T) = 1 - sum p^q r^-T is decreasing in T and positive at T = 0.
  auto g = [&](double t) {
    CompensatedSum sum;
    sum += 1.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      sum += -std::pow(weights[i], q) * std::pow(ratios[i], -t);
    return sum.value();
  };
  auto dg = [&](double t) {
    double d = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      d += std::pow(weights[i], q) * std::pow(ratios[i], -t) * std::log(ratios[i]);
    return d;
  };
  const double hi = expand_until_negative(g, 1.0);
  LqSpectrum out;
  out.T = bracketed_root(g, dg, 0.0, hi);
  out.d_q = std::min(out.T / (q - 1.0), static_cast<double>(k));
  return out;
}

double frostman_exponent_formula(std::span<const double> weights, std::span<const double> ratios) {
  check_lists(weights, ratios);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i)
    best = std::min(best, std::log(weights[i]) / std::log(ratios[i]));
  return best;
}

CorrelationEstimate correlation_dimension_estimate(const SelfSimilarIFS& ifs,
                                                   const CorrelationConfig& config) {
  if (config.scale_hi - config.scale_lo + 1 < 3)
    throw BadConfig("correlation fit needs at least three dyadic scales");
  if (config.n_pairs < 2) throw BadConfig("correlation estimate needs pairs");
  // All pairs among m samples, m(m-1)/2 >= n_pairs.
  const auto m = static_cast<std::size_t>(
      std::ceil(0.5 * (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(config.n_pairs)))));
  const auto samples = sample_measure(ifs, m, config.seed, config.threads);

  const int n_scales = config.scale_hi - config.scale_lo + 1;
  std::vector<double> radii(n_scales);
  for (int j = 0; j < n_scales; ++j) radii[j] = std::ldexp(1.0, -(config.scale_lo + j));

  // Per-row integer counts keep the result independent of the thread count.
  std::vector<std::vector<std::uint64_t>> row_counts(m, std::vector<std::uint64_t>(n_scales, 0));
  parallel_for(m, config.threads, [&](std::size_t i) {
    auto& counts = row_counts[i];
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = (samples[i] - samples[j]).norm();
      for (int s = 0; s < n_scales; ++s) {
        if (d < radii[s])
          ++counts[s];
        else
          break;
      }
    }
  });
  std::vector<std::uint64_t> totals(n_scales, 0);
  for (const auto& row : row_counts)
    for (int s = 0; s < n_scales; ++s) totals[s] += row[s];

  const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  CorrelationEstimate est;
  est.pairs = static_cast<std::size_t>(pairs);
  for (int s = 0; s < n_scales; ++s) {
    if (totals[s] == 0) continue;
    est.log2_scales.push_back(std::log2(radii[s]));
    est.log2_fractions.push_back(std::log2(static_cast<double>(totals[s]) / pairs));
  }
  if (est.log2_scales.size() < 3)
    throw BadConfig("fewer than three scales contain any sample pairs");
  const LineFit fit = fit_line(est.log2_scales, est.log2_fractions);
  est.estimate = fit.slope;
  est.stderr_ = fit.slope_stderr;
  return est;
}

Exponent assouad_dimension(const SelfSimilarIFS& ifs, Separation declared,
                           std::optional<double> user_value) {
  if (user_value) return {*user_value, Provenance::user_supplied};
  const double k = ifs.ambient_dim();
  if (implies_open_set(declared))
    return {std::min(similarity_dimension_set(ifs.ratios()), k), Provenance::exact_under_separation};
  return {k, Provenance::estimated};
}

std::optional<double> DimensionProfile::kappa_at(double p) const {
  if (p == 2.0) return kappa2.value;
  if (p == 1.0) {
    if (kappa1) return kappa1->value;
    return std::nullopt;
  }
  const auto it = kappa_p.find(p);
  if (it == kappa_p.end()) return std::nullopt;
  return it->second.value;
}

std::optional<double> DimensionProfile::d_at(double q) const {
  if (q == 2.0) return kappa2.value;
  if (std::isinf(q)) return d_inf.value;
  const auto it = d_q.find(q);
  if (it == d_q.end()) return std::nullopt;
  return it->second.value;
}

void validate(const DimensionProfile& pr) {
  auto fail = [](const std::string& inequality, const std::string& detail) {
    throw InconsistentProfile(inequality, detail);
  };
  auto finite = [&](const char* name, double v) {
    if (!std::isfinite(v)) fail(std::string(name) + " finite", "value " + format_double(v));
  };
  finite("kappa2", pr.kappa2.value);
  finite("kappa_star", pr.kappa_star.value);
  finite("d_inf", pr.d_inf.value);
  if (pr.kappa1) finite("kappa1", pr.kappa1->value);
  const double k = pr.k;

  if (pr.kappa1) {
    if (pr.kappa1->value < -kChainSlack) fail("0 <= kappa1", "kappa1 = " + format_double(pr.kappa1->value));
    if (pr.kappa1->value > pr.d_inf.value + kChainSlack)
      fail("kappa1 <= d_inf", format_double(pr.kappa1->value) + " > " + format_double(pr.d_inf.value));
  } else if (pr.d_inf.value < -kChainSlack) {
    fail("0 <= d_inf", "d_inf = " + format_double(pr.d_inf.value));
  }
  if (pr.d_inf.value > pr.kappa2.value + kChainSlack)
    fail("d_inf <= kappa2", format_double(pr.d_inf.value) + " > " + format_double(pr.kappa2.value));
  if (pr.kappa2.value > pr.kappa_star.value + kChainSlack)
    fail("kappa2 <= kappa_star",
         format_double(pr.kappa2.value) + " > " + format_double(pr.kappa_star.value));
  if (pr.kappa_star.value > k + kChainSlack)
    fail("kappa_star <= k", format_double(pr.kappa_star.value) + " > " + format_double(k));

  if (pr.ad_regular) {
    const double s = pr.s_sim_set;
    for (double v : {pr.kappa2.value, pr.d_inf.value, pr.kappa_star.value})
      if (std::abs(v - s) > kAdTol)
        fail("ad_regular: kappa2 = d_inf = kappa_star = s_sim_set",
             "value " + format_double(v) + " vs s = " + format_double(s));
  }

  std::vector<std::pair<double, double>> lp;
  if (pr.kappa1) lp.emplace_back(1.0, pr.kappa1->value);
  lp.emplace_back(2.0, pr.kappa2.value);
  for (const auto& [p, e] : pr.kappa_p) {
    finite("kappa_p", e.value);
    if (p != 1.0 && p != 2.0) lp.emplace_back(p, e.value);
  }
  std::sort(lp.begin(), lp.end());
  for (std::size_t i = 0; i < lp.size(); ++i)
    for (std::size_t j = i + 1; j < lp.size(); ++j) {
      const auto [p, kp] = lp[i];
      const auto [q, kq] = lp[j];
      if (kp > kq + kChainSlack || (p / q) * kq > kp + kChainSlack)
        fail("(p/q) kappa_q <= kappa_p <= kappa_q",
             "p = " + format_double(p) + ", q = " + format_double(q) + ", kappa_p = " +
                 format_double(kp) + ", kappa_q = " + format_double(kq));
    }
}

DimensionProfile build_profile(const SelfSimilarIFS& ifs, Separation declared,
                               const ProfileOverrides& overrides,
                               const CorrelationConfig& correlation) {
  DimensionProfile pr;
  pr.k = ifs.ambient_dim();
  const double k = pr.k;
  const auto ratios = ifs.ratios();
  const auto& weights = ifs.weights();
  pr.s_sim_set = similarity_dimension_set(ratios);
  pr.s_sim_meas = similarity_dimension_measure(weights, ratios);

  const bool open_set = implies_open_set(declared);
  // L^q formulas hold under the open set condition in every dimension and under
  // exponential separation on the line.
  const bool lq_exact = open_set || (declared == Separation::ESC && pr.k == 1);
  const Provenance lq_tag = lq_exact ? Provenance::exact_under_separation : Provenance::estimated;

  if (lq_exact) {
    pr.kappa2 = {lq_spectrum(weights, ratios, 2.0, pr.k).d_q, lq_tag};
    pr.d_inf = {std::min(frostman_exponent_formula(weights, ratios), k), lq_tag};
  } else if (declared == Separation::ESC) {
    pr.kappa2 = {lq_spectrum(weights, ratios, 2.0, pr.k).d_q, Provenance::estimated};
    pr.d_inf = {std::min(frostman_exponent_formula(weights, ratios), pr.kappa2.value),
                Provenance::estimated};
    pr.warnings.push_back("L^q formulas are only established on the line; values are estimates");
  } else {
    const auto est = correlation_dimension_estimate(ifs, correlation);
    pr.kappa2 = {std::clamp(est.estimate, 0.0, k), Provenance::estimated};
    pr.d_inf = {std::min(frostman_exponent_formula(weights, ratios), pr.kappa2.value),
                Provenance::estimated};
    pr.warnings.push_back("no separation declared: kappa2 from the pair-correlation estimator (stderr " +
                          format_double(est.stderr_) + "), d_inf capped by it");
  }
  pr.kappa_star = assouad_dimension(ifs, declared);
  if (!open_set) pr.warnings.push_back("no open set condition: kappa_star set to the ambient dimension");

  bool weights_natural = true;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (std::abs(weights[i] - std::pow(ratios[i], pr.s_sim_set)) > kAdTol) weights_natural = false;
  pr.ad_regular = open_set && weights_natural && pr.s_sim_set <= k;
  if (pr.ad_regular) {
    const Exponent s{pr.s_sim_set, Provenance::exact_under_separation};
    pr.kappa2 = pr.d_inf = pr.kappa_star = s;
  }

  auto user = [](double v) { return Exponent{v, Provenance::user_supplied}; };
  if (overrides.kappa1) pr.kappa1 = user(*overrides.kappa1);
  if (overrides.kappa2) pr.kappa2 = user(*overrides.kappa2);
  if (overrides.kappa_star) pr.kappa_star = user(*overrides.kappa_star);
  if (overrides.d_inf) pr.d_inf = user(*overrides.d_inf);
  for (const auto& [p, v] : overrides.kappa_p) {
    if (!(p >= 1.0)) throw BadConfig("kappa_p table keys must be >= 1");
    pr.kappa_p[p] = user(v);
  }
  // Each tabulated kappa_p with 1 < p < 2 needs d_q at the dual exponent q = p/(p-1).
  for (const auto& [p, v] : pr.kappa_p) {
    if (!(p > 1.0 && p < 2.0)) continue;
    const double q = p / (p - 1.0);
    pr.d_q[q] = {lq_spectrum(weights, ratios, q, pr.k).d_q, lq_tag};
  }
  for (const auto& [q, v] : overrides.d_q) {
    if (!(q > 1.0)) throw BadConfig("d_q table keys must be > 1");
    pr.d_q[q] = user(v);
  }
  if (pr.ad_regular && (overrides.kappa2 || overrides.kappa_star || overrides.d_inf))
    pr.warnings.push_back("overrides applied to an AD-regular profile");
  validate(pr);
  return pr;
}

}  // namespace ssf
