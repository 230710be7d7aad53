#include "helpers.hpp"

#include "ssf/ifs.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace ssf;
using testing::scalar;
using testing::vec;

namespace {

SelfSimilarIFS two_ratio_ifs() {
  const double r[] = {0.5, 0.25};
  const double t[] = {0.0, 0.75};
  const double p[] = {0.5, 0.5};
  return make_line_ifs(r, t, p);
}

SelfSimilarIFS random_line_ifs(Rng& rng) {
  const int n = 2 + static_cast<int>(rng.uniform() * 4);
  std::vector<SimilarityMap> maps;
  std::vector<double> w;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    maps.push_back(SimilarityMap::line(rng.uniform(0.05, std::min(0.7, 1.2 / n)), rng.uniform(-1, 1), rng.uniform() < 0.3 ? -1 : 1));
    w.push_back(rng.uniform(0.1, 1.0));
    total += w.back();
  }
  for (double& x : w) x /= total;
  // Renormalise so the weights sum to one to the last bit.
  double s = 0;
  for (int i = 0; i + 1 < n; ++i) s += w[i];
  w.back() = 1.0 - s;
  return SelfSimilarIFS(maps, w);
}

}  // namespace

TEST_CASE("fixed points of simple maps") {
  CHECK(fixed_point(SimilarityMap::line(1.0 / 3, 0.0))(0) == 0.0);
  CHECK(std::abs(fixed_point(SimilarityMap::line(1.0 / 3, 2.0 / 3))(0) - 1.0) < 1e-15);

  SimilarityMap rot{0.5, testing::rotation2(std::numbers::pi / 2), vec({1.0, 0.0})};
  const Vec x = fixed_point(rot);
  CHECK((rot.apply(x) - x).norm() <= 1e-10);
  // (I - rO) x = t solved by hand: x = (0.8, 0.4).
  CHECK((x - vec({0.8, 0.4})).norm() < 1e-14);
}

TEST_CASE("fixed point residual over random maps") {
  Rng rng(11, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + trial % 5;
    Vec t(k);
    for (int i = 0; i < k; ++i) t(i) = rng.uniform(-10, 10);
    SimilarityMap m{rng.uniform(0.01, 0.99), testing::random_orthogonal(rng, k), t};
    validate(m);
    const Vec x = fixed_point(m);
    CHECK((m.apply(x) - x).norm() <= 1e-10);
  }
}

TEST_CASE("map and system validation") {
  CHECK_THROWS_AS(validate(SimilarityMap::line(1.0, 0.0)), ValidationError);
  CHECK_THROWS_AS(validate(SimilarityMap::line(0.0, 0.0)), ValidationError);
  SimilarityMap skew{0.5, Mat::Identity(2, 2), vec({0, 0})};
  skew.orientation(0, 1) = 1e-6;
  CHECK_THROWS_WITH_AS(validate(skew), doctest::Contains("not orthogonal"), ValidationError);

  const double r[] = {1.0 / 3, 1.0 / 3};
  const double t[] = {0.0, 2.0 / 3};
  const double bad[] = {0.5, 0.4};
  CHECK_THROWS_WITH_AS(make_line_ifs(r, t, bad), doctest::Contains("sum to 1"), ValidationError);
  const double same_t[] = {0.0, 0.0};
  const double p[] = {0.5, 0.5};
  CHECK_THROWS_WITH_AS(make_line_ifs(r, same_t, p), doctest::Contains("atomic"), ValidationError);
  const double one_r[] = {0.5};
  const double one_t[] = {0.0};
  const double one_p[] = {0.999};
  CHECK_THROWS_AS(make_line_ifs(one_r, one_t, one_p), ValidationError);

  std::vector<SimilarityMap> mixed{SimilarityMap::line(0.5, 0.0),
                                   SimilarityMap{0.5, Mat::Identity(2, 2), vec({1, 0})}};
  CHECK_THROWS_AS(SelfSimilarIFS(mixed, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(SelfSimilarIFS({SimilarityMap::line(0.5, 0), SimilarityMap::line(0.5, 1)}, {1.0}),
                  ValidationError);
}

TEST_CASE("support hull of the Cantor measure is [0, 1]") {
  const auto c = cantor_ifs();
  CHECK(std::abs(c.barycenter()(0) - 0.5) < 1e-15);
  CHECK(std::abs(c.support_hull().radius - 0.5) < 1e-15);
}

TEST_CASE("support hull is invariant and contains samples") {
  Rng rng(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ifs = random_line_ifs(rng);
    const Ball& b = ifs.support_hull();
    for (const auto& m : ifs.maps())
      CHECK((m.apply(b.center) - b.center).norm() + m.ratio * b.radius <= b.radius * (1 + 1e-12) + 1e-15);
    for (const auto& x : sample_measure(ifs, 200, trial)) CHECK((x - b.center).norm() <= b.radius * (1 + 1e-9));
  }
}

TEST_CASE("stopping decomposition of the Cantor system") {
  const auto c = cantor_ifs();
  for (double scale : {1.0 / 9.0, 0.25}) {
    const auto d = stopping_decomposition(c, scale);
    REQUIRE(d.words.size() == 4);
    for (const auto& w : d.words) {
      CHECK(w.letters.size() == 2);
      CHECK(std::abs(w.ratio - 1.0 / 9.0) < 1e-16);
      CHECK(w.weight == 0.25);
    }
  }
  CHECK_THROWS_AS(stopping_decomposition(c, 1.0), ValidationError);
  CHECK_THROWS_AS(stopping_decomposition(c, 0.0), ValidationError);
}

TEST_CASE("stopping decomposition with unequal ratios") {
  const auto d = stopping_decomposition(two_ratio_ifs(), 0.25);
  REQUIRE(d.words.size() == 3);
  CHECK(d.words[0].letters == std::vector<int>{0, 0});
  CHECK(d.words[1].letters == std::vector<int>{0, 1});
  CHECK(d.words[2].letters == std::vector<int>{1});
  CHECK(d.words[0].ratio == 0.25);
  CHECK(d.words[1].ratio == 0.125);
  CHECK(d.words[2].ratio == 0.25);
}

TEST_CASE("stopping decomposition invariants on random systems") {
  Rng rng(17, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const auto ifs = random_line_ifs(rng);
    const double scale = std::pow(10.0, rng.uniform(-3.0, -0.5));
    const auto d = stopping_decomposition(ifs, scale);
    CompensatedSum total;
    for (const auto& w : d.words) {
      total += w.weight;
      CHECK(w.ratio <= scale * (1 + 1e-12));
      CHECK(w.ratio >= d.ratio_floor * (1 - 1e-12));
      double ratio = 1, weight = 1, parent = 1;
      SimilarityMap f{1.0, Mat::Identity(1, 1), Vec::Zero(1)};
      for (std::size_t j = 0; j < w.letters.size(); ++j) {
        const auto& m = ifs.map(w.letters[j]);
        if (j + 1 == w.letters.size()) parent = ratio;
        ratio *= m.ratio;
        weight *= ifs.weight(w.letters[j]);
        f.translation = f.ratio * (f.orientation * m.translation) + f.translation;
        f.orientation = f.orientation * m.orientation;
        f.ratio *= m.ratio;
      }
      CHECK(parent > scale);
      CHECK(std::abs(w.ratio - ratio) <= 1e-12 * ratio);
      CHECK(std::abs(w.weight - weight) <= 1e-12 * weight);
      CHECK((w.anchor - f.apply(ifs.barycenter())).norm() < 1e-12);
      CHECK(w.diameter_bound(ifs.support_hull()) == doctest::Approx(w.ratio * 2 * ifs.support_hull().radius));
    }
    CHECK(std::abs(total.value() - 1.0) <= 1e-10);
  }
}

TEST_CASE("refining a decomposition reproduces the direct one") {
  for (const auto& ifs : {cantor_ifs(), two_ratio_ifs()}) {
    const double coarse = 0.2, fine = 0.003;
    const auto direct = stopping_decomposition(ifs, fine);
    std::vector<std::vector<int>> refined;
    for (const auto& w : stopping_decomposition(ifs, coarse).words) {
      const double sub = fine / w.ratio;
      if (sub >= 1.0) {
        refined.push_back(w.letters);
        continue;
      }
      for (const auto& u : stopping_decomposition(ifs, sub).words) {
        auto letters = w.letters;
        letters.insert(letters.end(), u.letters.begin(), u.letters.end());
        refined.push_back(letters);
      }
    }
    std::vector<std::vector<int>> expected;
    for (const auto& w : direct.words) expected.push_back(w.letters);
    CHECK(refined == expected);
  }
}

TEST_CASE("homogeneous systems give one ratio per decomposition") {
  const auto c = cantor_ifs();
  CHECK(is_homogeneous(c));
  for (double s : {0.3, 0.01, 1e-4}) {
    const auto d = stopping_decomposition(c, s);
    for (const auto& w : d.words) CHECK(w.ratio == d.words.front().ratio);
  }
  CHECK_FALSE(is_homogeneous(two_ratio_ifs()));
  std::vector<SimilarityMap> maps{SimilarityMap{0.5, Mat::Identity(2, 2), vec({0, 0})},
                                  SimilarityMap{0.5, -Mat::Identity(2, 2), vec({1, 0})}};
  CHECK_FALSE(is_homogeneous(SelfSimilarIFS(maps, {0.5, 0.5})));
}

TEST_CASE("decomposition budget is enforced") {
  CHECK_THROWS_AS(stopping_decomposition(cantor_ifs(), 1e-9, 1000), ResourceExceeded);
}

TEST_CASE("non-expanding heuristic") {
  CHECK(non_expanding_heuristic(cantor_ifs(), 10, 10000).verdict == ExpansionVerdict::NonExpanding);

  auto make3 = [](const Mat& a, const Mat& b) {
    std::vector<SimilarityMap> maps{SimilarityMap{0.4, a, vec({0, 0, 0})},
                                    SimilarityMap{0.4, b, vec({1, 0, 0})}};
    return SelfSimilarIFS(maps, {0.5, 0.5});
  };
  const auto cyclic = make3(Mat::Identity(3, 3), testing::rotation_z(std::numbers::pi / 2));
  CHECK(non_expanding_heuristic(cyclic, 12, 10000).verdict == ExpansionVerdict::NonExpanding);

  // Quarter turns about two axes generate the rotation group of the cube (order 24).
  Mat rx(3, 3);
  rx << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  const auto cube = make3(testing::rotation_z(std::numbers::pi / 2), rx);
  const auto rep = non_expanding_heuristic(cube, 12, 10000);
  CHECK(rep.verdict == ExpansionVerdict::NonExpanding);
  CHECK(rep.distinct_total == 24);

  Rng rng(3, 0);
  const auto free_like = make3(testing::random_orthogonal(rng, 3), testing::random_orthogonal(rng, 3));
  const auto grow = non_expanding_heuristic(free_like, 12, 10000);
  CHECK(grow.verdict == ExpansionVerdict::Expanding);
  CHECK(grow.level_counts.back() == 4096);
}

TEST_CASE("separation diagnostic") {
  const auto cantor = separation_diagnostic(cantor_ifs(), 5);
  CHECK(cantor.verdict == SeparationVerdict::SSC_ok);
  CHECK(cantor.ssc_ok);
  CHECK(cantor.diagnostic_only);
  CHECK(std::abs(cantor.esc_distance - 2.0 / 243.0) < 1e-15);
  CHECK(cantor.overlap_measure <= 1e-12);

  const auto touching = separation_diagnostic(uniform_interval_ifs(), 3);
  CHECK_FALSE(touching.ssc_ok);
  CHECK(touching.overlap_measure <= 1e-12);
  CHECK(touching.verdict == SeparationVerdict::no_overlap_detected);

  const double r[] = {2.0 / 3, 2.0 / 3};
  const double t[] = {0.0, 1.0 / 3};
  const double p[] = {0.5, 0.5};
  const auto heavy = separation_diagnostic(make_line_ifs(r, t, p), 4);
  CHECK(heavy.verdict == SeparationVerdict::overlaps_detected);
  CHECK(heavy.overlap_measure > 0.1);

  const double r3[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const double t3[] = {0.0, 0.0, 2.0 / 3};
  const double p3[] = {0.25, 0.25, 0.5};
  CHECK(separation_diagnostic(make_line_ifs(r3, t3, p3), 2).esc_distance == 0.0);

  CHECK_THROWS_AS(separation_diagnostic(cantor_ifs(), 30), ResourceExceeded);
}

TEST_CASE("porosity flag") {
  const double s = std::log(2.0) / std::log(3.0);
  CHECK(porosity_flag(cantor_ifs(), Separation::SSC, s));
  CHECK_FALSE(porosity_flag(uniform_interval_ifs(), Separation::OSC, 1.0));
  CHECK_FALSE(porosity_flag(cantor_ifs(), Separation::none, s));
  std::vector<SimilarityMap> maps{SimilarityMap{0.5, Mat::Identity(2, 2), vec({0, 0})},
                                  SimilarityMap{0.5, Mat::Identity(2, 2), vec({1, 0})}};
  CHECK_THROWS_AS(porosity_flag(SelfSimilarIFS(maps, {0.5, 0.5}), Separation::SSC, 1.0), Unsupported);
}

TEST_CASE("measure samples are deterministic and land on the attractor") {
  const auto c = cantor_ifs();
  const auto a = sample_measure(c, 10000, 42, 1);
  const auto b = sample_measure(c, 10000, 42, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i](0) == b[i](0));
  for (std::size_t i = 0; i < 500; ++i) {
    // No ternary digit equal to 1 among the first ten.
    double x = a[i](0);
    for (int d = 0; d < 10; ++d) {
      x *= 3;
      const int digit = static_cast<int>(std::floor(x));
      CHECK(digit != 1);
      x -= digit;
    }
  }
  CHECK(word_fixed_points(c, 2).size() == 6);
}
