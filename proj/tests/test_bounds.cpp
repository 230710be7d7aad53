#include "helpers.hpp"

#include "ssf/bounds.hpp"
#include "ssf/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace ssf;

namespace {

DimensionProfile make_profile(int k, double kappa2, double kappa_star, double d_inf,
                              std::optional<double> kappa1 = std::nullopt) {
  DimensionProfile pr;
  pr.k = k;
  pr.kappa2 = {kappa2, Provenance::user_supplied};
  pr.kappa_star = {kappa_star, Provenance::user_supplied};
  pr.d_inf = {d_inf, Provenance::user_supplied};
  if (kappa1) pr.kappa1 = Exponent{*kappa1, Provenance::user_supplied};
  return pr;
}

DimensionProfile random_profile(Rng& rng) {
  const int k = 1 + static_cast<int>(rng.bits() % 3);
  const double ks = rng.uniform(0.05, 1.0) * k;
  const double k2 = rng.uniform(0.05, 1.0) * ks;
  const double dinf = rng.uniform(0.5, 1.0) * k2;
  const double k1 = rng.uniform(0.5 * k2, dinf);
  return make_profile(k, k2, ks, dinf, k1);
}

// Direct l^2 exponent for the case kappa_* = kappa2 = d_2 = s on the line.
double sigma2_line(double s) { return (2 * s - 1) / (3 + 2 * s); }

}  // namespace

TEST_CASE("Cantor measure exponents") {
  const auto pr = build_profile(cantor_ifs(), Separation::SSC);
  const double s = std::log(2.0) / std::log(3.0);
  const double sigma = sigma_p(pr, 2.0);
  CHECK(std::abs(sigma - sigma2_line(s)) < 1e-12);
  CHECK(std::abs(sigma - 0.061442) < 1e-6);
  const double gamma = compute_gamma(pr, 2.0);
  CHECK(std::abs(gamma - (2.0 - (2 * s - 1) / (1 + 2 * s))) < 1e-12);
  CHECK(std::abs(gamma - 1.884228) < 1e-6);

  const auto bound = decay_exponent_bound(pr, {.curvature_nonvanishing = true, .non_expanding = {}});
  CHECK(bound.applicable);
  CHECK(bound.sigma == doctest::Approx(sigma).epsilon(1e-12));
  REQUIRE(bound.gamma);
  CHECK(std::abs((2 - *bound.gamma) / *bound.gamma - bound.sigma) < 1e-12);
  CHECK(bound.conjectural_ceiling == doctest::Approx(s / 2));
  CHECK(baseline_notes(cantor_ifs()).size() == 1);
  CHECK(baseline_notes(uniform_interval_ifs(0, 1)).empty());
}

TEST_CASE("missing-digit measure in base 5") {
  const auto ifs = missing_digit_ifs(5, std::vector<int>{0, 1, 2, 3});
  const auto pr = build_profile(ifs, Separation::OSC);
  const double s = std::log(4.0) / std::log(5.0);
  CHECK(std::abs(sigma_p(pr, 2.0) - sigma2_line(s)) < 1e-12);
  CHECK(std::abs(sigma_p(pr, 2.0) - 0.153028) < 5e-7);
}

TEST_CASE("no decay below half the ambient dimension") {
  const auto pr = make_profile(1, 0.4, 0.5, 0.3, 0.2);
  CHECK(sigma_p(pr, 2.0) == 0.0);
  CHECK(sigma_p(pr, 1.0) == 0.0);
  const auto b = decay_exponent_bound(pr, {.curvature_nonvanishing = true, .non_expanding = {}});
  CHECK_FALSE(b.applicable);
  CHECK(b.sigma == 0.0);
  CHECK_FALSE(b.gamma);
  CHECK_THROWS_AS(compute_gamma(pr, 2.0), NotApplicable);
}

TEST_CASE("hypotheses gate applicability") {
  const auto pr = make_profile(1, 0.9, 0.9, 0.9);
  CHECK_FALSE(decay_exponent_bound(pr).applicable);
  CHECK_FALSE(decay_exponent_bound(pr, {.curvature_nonvanishing = false, .non_expanding = {}}).applicable);
  CHECK(decay_exponent_bound(pr, {.curvature_nonvanishing = true, .non_expanding = {}}).applicable);
  const auto p3 = make_profile(3, 2.0, 2.5, 1.8);
  CHECK_FALSE(decay_exponent_bound(p3, {.curvature_nonvanishing = true, .non_expanding = {}}).applicable);
  CHECK(decay_exponent_bound(p3, {.curvature_nonvanishing = true, .non_expanding = true}).applicable);
  CHECK_FALSE(decay_exponent_bound(p3, {.curvature_nonvanishing = true, .non_expanding = false}).applicable);
}

TEST_CASE("missing exponents are reported") {
  auto pr = make_profile(1, 0.9, 0.9, 0.9);
  CHECK_THROWS_AS(sigma_p(pr, 1.0), MissingExponent);
  CHECK_THROWS_AS(sigma_p(pr, 1.5), MissingExponent);
  CHECK_THROWS_AS(sigma_p(pr, 2.5), BadConfig);
  pr.kappa_p[1.5] = {0.8, Provenance::user_supplied};
  CHECK_THROWS_AS(sigma_p(pr, 1.5), MissingExponent);
  pr.d_q[3.0] = {0.85, Provenance::user_supplied};
  // (0.85 + 0.8 - 1) / (3 - 1 + 1.8 + 0.8 - 0.85)
  CHECK(sigma_p(pr, 1.5) == doctest::Approx(0.65 / 3.75).epsilon(1e-14));
  const auto t = decay_bound_table(pr, {1.0, 1.5, 2.0}, {.curvature_nonvanishing = true, .non_expanding = {}});
  CHECK(t.sigma_p_table.size() == 2);
  CHECK(t.notes.size() >= 1);
  CHECK(t.sigma == doctest::Approx(std::max(0.65 / 3.75, sigma_p(pr, 2.0))));
}

TEST_CASE("split point identity and monotonicity on random profiles") {
  Rng rng(101, 0);
  int positive = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pr = random_profile(rng);
    validate(pr);
    for (const double p : {1.0, 2.0}) {
      const double s = sigma_p(pr, p);
      CHECK(s >= 0.0);
      CHECK(s <= pr.kappa2.value / 2 + 1e-15);
      if (s > 0.0) {
        ++positive;
        const double g = compute_gamma(pr, p);
        CHECK(g > 1.0);
        CHECK(g < 2.0);
        CHECK(std::abs((2 - g) / g - s) <= 1e-12);
      }
    }
    // Raising kappa2 never lowers the l^2 exponent; raising kappa_* never raises it.
    auto up = pr;
    up.kappa2.value = std::min(pr.kappa_star.value, pr.kappa2.value * 1.1);
    CHECK(sigma_p(up, 2.0) >= sigma_p(pr, 2.0));
    auto wide = pr;
    wide.kappa_star.value = std::min<double>(pr.k, pr.kappa_star.value * 1.1);
    CHECK(sigma_p(wide, 2.0) <= sigma_p(pr, 2.0));
  }
  CHECK(positive > 100);
}

TEST_CASE("holomorphic exponents") {
  const auto pr = make_profile(2, 1.2, 1.2, 1.2);
  CHECK(vdc_exponent(pr, 2, false) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(vdc_exponent(pr, 2, true) == doctest::Approx(0.2 / 2.2).epsilon(1e-14));
  CHECK(vdc_exponent(pr, 2, true) == doctest::Approx(sigma_p(pr, 2.0)).epsilon(1e-14));
  CHECK(vdc_exponent(pr, 3, true) == doctest::Approx(0.2 / 3.2).epsilon(1e-14));
  CHECK(vdc_exponent(pr, 3, false) == doctest::Approx(0.2 / 3).epsilon(1e-14));
  CHECK_THROWS_AS(vdc_exponent(make_profile(2, 0.9, 1.0, 0.8), 2, false), NotApplicable);
  CHECK_THROWS_AS(vdc_exponent(make_profile(1, 0.9, 1.0, 0.8), 2, false), NotApplicable);
}

TEST_CASE("two- and three-set thresholds") {
  const auto t = symmetric_thresholds();
  CHECK(std::abs(t.t2 - (std::sqrt(65.0) - 5) / 4) <= 1e-12);
  CHECK(std::abs(t.t3 - (std::sqrt(41.0) - 3) / 4) <= 1e-12);
  CHECK(t.residual2 <= 1e-12);
  CHECK(t.residual3 <= 1e-12);

  CHECK(two_set_condition(0.8, 0.8).holds);
  CHECK_FALSE(two_set_condition(0.7, 0.7).holds);
  const auto edge = two_set_condition(t.t2, t.t2);
  CHECK_FALSE(edge.holds);
  CHECK(edge.boundary);
  CHECK(two_set_condition(t.t2 + 1e-6, t.t2 + 1e-6).holds);

  CHECK(three_set_condition(0.9, 0.9, 0.9).holds);
  CHECK_FALSE(three_set_condition(0.8, 0.8, 0.8).holds);
  CHECK_FALSE(three_set_condition(0.6, 0.6, 0.6).holds);
  CHECK(three_set_condition(t.t3, t.t3, t.t3).boundary);
  CHECK_FALSE(three_set_condition(0.4, 0.5, 0.3).holds);
}

TEST_CASE("condition verdicts are symmetric") {
  Rng rng(7, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = rng.uniform(0, 1), b = rng.uniform(0, 1), c = rng.uniform(0, 1);
    CHECK(two_set_condition(a, b).holds == two_set_condition(b, a).holds);
    const bool h = three_set_condition(a, b, c).holds;
    CHECK(three_set_condition(b, a, c).holds == h);
    CHECK(three_set_condition(c, b, a).holds == h);
    CHECK(three_set_condition(a, c, b).holds == h);
    CHECK(product_measure_conditions(a, b, false).holds == product_measure_conditions(b, a, false).holds);
    // The two-set condition is monotone in each argument.
    if (two_set_condition(a, b).holds) CHECK(two_set_condition(std::min(1.0, a + 0.01), b).holds);
  }
}

TEST_CASE("product-measure criteria") {
  const auto v = product_measure_conditions(0.9, 0.7, true);
  CHECK(v.holds);
  CHECK(std::find(v.satisfied.begin(), v.satisfied.end(), 3) != v.satisfied.end());
  CHECK(product_measure_conditions(0.8, 0.8, false).holds);
  CHECK_FALSE(product_measure_conditions(0.7, 0.7, true).holds);
  // Equal dimensions: the first two criteria share the threshold 7/9.
  const auto eq = product_measure_conditions(7.0 / 9, 7.0 / 9, false);
  CHECK_FALSE(eq.holds);
  // 2ab + 3a + 2b = 5 at a = 1, b = 1/2; so is the second criterion.
  CHECK_FALSE(product_measure_conditions(1.0, 0.5, true).holds);
  CHECK(product_measure_conditions(1.0, 0.51, true).holds);
}

TEST_CASE("log pushforward and high-dimensional criteria") {
  CHECK(log_pushforward_sigma(1.0) == doctest::Approx(0.5 / 2.5));
  CHECK_THROWS_AS(log_pushforward_sigma(0.5), NotApplicable);
  CHECK(high_dim_condition(6, 5.5).holds);
  CHECK_FALSE(high_dim_condition(6, 5.0).holds);
  CHECK(high_dim_condition(6, 5.0).boundary);
  CHECK_THROWS_AS(high_dim_condition(4, 3.5), NotApplicable);
}
