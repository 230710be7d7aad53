// Acceptance run: one PASS/FAIL line per criterion with the measured quantity, the
// pinned tolerance and the wall time against its limit. Exit status 1 if any fail.

#include "helpers.hpp"
#include "oracles.hpp"

#include "ssf/arith_lab.hpp"
#include "ssf/bounds.hpp"
#include "ssf/dimension.hpp"
#include "ssf/fourier.hpp"
#include "ssf/ifs.hpp"
#include "ssf/numerics.hpp"
#include "ssf/pushforward.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace ssf;
using testing::random_unit;
using testing::scalar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0 || t < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::string timing = limit_s > 0 ? fmt("%.3gs < %.3gs", t, limit_s) : fmt("%.3gs", t);
  if (!in_time) timing += " TOO SLOW";
  std::cout << fmt("AC%02d %s  %s: %s [%s]", id, pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                   timing.c_str())
            << std::endl;
}

DimensionProfile chain_profile(int k, double ks, double k2, double dinf, double k1) {
  DimensionProfile pr;
  pr.k = k;
  pr.kappa_star = {ks, Provenance::user_supplied};
  pr.kappa2 = {k2, Provenance::user_supplied};
  pr.d_inf = {dinf, Provenance::user_supplied};
  pr.kappa1 = Exponent{k1, Provenance::user_supplied};
  return pr;
}

/// Valid profile with strict gaps along the chain kappa1 < d_inf < kappa2 < kappa_* < k.
DimensionProfile random_chain(Rng& rng, bool above_half) {
  const int k = 1 + static_cast<int>(rng.bits() % 3);
  const double ks = rng.uniform(above_half ? 0.6 : 0.1, 0.95) * k;
  const double k2 = above_half ? rng.uniform(0.5 * k + 0.01 * k, ks * 0.999) : rng.uniform(0.1, 0.95) * ks;
  const double dinf = rng.uniform(0.6, 0.95) * k2;
  const double k1 = rng.uniform(0.55 * k2, 0.95 * dinf);
  return chain_profile(k, ks, k2, dinf, k1);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome moran() {
  const std::vector<double> r{1.0 / 3.0, 1.0 / 3.0};
  const double s = similarity_dimension_set(r);
  const double err = std::abs(s - std::log(2.0) / std::log(3.0));
  const double residual = std::abs(2.0 * std::pow(1.0 / 3.0, s) - 1.0);
  return {err <= 1e-12 && residual <= 1e-13,
          fmt("s = %.15f, |s - log2/log3| = %.1e <= 1e-12, residual %.1e <= 1e-13", s, err, residual)};
}

Outcome cantor_sigma() {
  const auto ifs = cantor_ifs();
  const auto pr = build_profile(ifs, Separation::SSC);
  const auto bound = decay_exponent_bound(pr, {.curvature_nonvanishing = true, .non_expanding = {}});
  const auto notes = baseline_notes(ifs);
  const bool cited = std::any_of(notes.begin(), notes.end(),
                                 [](const std::string& n) { return n.find("0.016") != std::string::npos; });
  const double err = std::abs(bound.sigma - 0.0614);
  return {err <= 5e-4 && bound.applicable && cited,
          fmt("sigma = %.7f, |sigma - 0.0614| = %.1e <= 5e-4, applicable %d, 0.016 baseline cited %d",
              bound.sigma, err, bound.applicable, cited)};
}

Outcome thresholds() {
  const auto t = symmetric_thresholds();
  const double c2 = (std::sqrt(65.0) - 5.0) / 4.0;
  const double c3 = (std::sqrt(41.0) - 3.0) / 4.0;
  const double e2 = std::abs(t.t2 - c2), e3 = std::abs(t.t3 - c3);
  return {e2 <= 1e-9 && e3 <= 1e-9,
          fmt("t2 = %.12f (err %.1e), t3 = %.12f (err %.1e), tolerance 1e-9", t.t2, e2, t.t3, e3)};
}

Outcome mu_hat_oracle() {
  const auto c = cantor_ifs();
  Rng rng(4, 0);
  std::vector<Vec> xis;
  for (int i = 0; i < 1000; ++i) xis.push_back(scalar(rng.uniform(-1e4, 1e4)));
  // Full cylinder-tree recursion; the homogeneous product shortcut would mirror the oracle.
  PushforwardOptions tree;
  tree.inner_fast_path = false;
  const auto res = evaluate_batch(c, nullptr, xis, Scheme::exact_recursion, 1e-7, 0, tree);
  int within_bound = 0, within_abs = 0;
  double worst = 0, worst_bound = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double d = std::abs(res[i].value - oracle::cantor_transform(xis[i](0)));
    within_bound += d <= res[i].error_bound;
    within_abs += d <= 1e-6;
    worst = std::max(worst, d);
    worst_bound = std::max(worst_bound, res[i].error_bound);
  }
  return {within_bound == 1000 && within_abs == 1000,
          fmt("%d/1000 within error_bound, %d/1000 within 1e-6; max diff %.2e, max bound %.2e", within_bound,
              within_abs, worst, worst_bound)};
}

Outcome certified_honesty() {
  const auto c = cantor_ifs();
  const auto sq = PushforwardMap::square();
  Rng rng(5, 0);
  std::vector<Vec> xis;
  for (int i = 0; i < 1000; ++i) xis.push_back(scalar(rng.uniform(256.0, 16384.0)));
  const auto r0 = evaluate_batch(c, &sq, xis, Scheme::order0, 1e-3);
  const auto r1 = evaluate_batch(c, &sq, xis, Scheme::order1, 1e-3);
  const auto pts = oracle::cantor_midpoints(20);
  const double rho = 0.5 * std::pow(3.0, -20);
  int ok0 = 0, ok1 = 0, certified = 0;
  double ratio = 0;
  for (std::size_t i = 0; i < xis.size(); ++i) {
    const double xi = xis[i](0);
    const auto ref = oracle::point_sum(pts, xi, [](double x) { return x * x; });
    // The depth-20 sum is itself a quadrature; its own error is added to the allowance.
    const double ref_err = oracle::midpoint_error(xi, 2.0, 2.0, rho);
    const double d0 = std::abs(r0[i].value - ref), d1 = std::abs(r1[i].value - ref);
    ok0 += d0 <= r0[i].error_bound + ref_err;
    ok1 += d1 <= r1[i].error_bound + ref_err;
    certified += r0[i].certified && r1[i].certified;
    ratio = std::max({ratio, d0 / (r0[i].error_bound + ref_err), d1 / (r1[i].error_bound + ref_err)});
  }
  return {ok0 == 1000 && ok1 == 1000 && certified == 1000,
          fmt("order0 %d/1000, order1 %d/1000 within error_bound (+ brute-force error <= %.1e); "
              "max |diff|/bound %.3f; certified %d/1000",
              ok0, ok1, oracle::midpoint_error(16384.0, 2.0, 2.0, rho), ratio, certified)};
}

Outcome cantor_decay() {
  DecayConfig cfg;
  cfg.octave_lo = 8;
  cfg.octave_hi = 18;
  cfg.samples_per_octave = 64;
  const double sigma = 0.0614;
  const auto exp = measure_decay_slope(cantor_ifs(), PushforwardMap::square(), cfg, sigma);
  const double e = exp.envelope_exponent();
  const auto reliable = std::count_if(exp.octaves.begin(), exp.octaves.end(),
                                      [](const OctaveResult& o) { return o.reliable; });
  return {e >= sigma - 0.02,
          fmt("envelope exponent %.4f >= %.4f (sigma - 0.02); %zd/%zu octaves reliable", e, sigma - 0.02,
              reliable, exp.octaves.size())};
}

Outcome quadratic_hessian() {
  Mat c1(2, 2), c2(2, 2);
  c1 << 1, 0, 0, -1;
  c2 << 0, 1, 1, 0;
  const auto f = PushforwardMap::quadratic({{c1, c2}, Mat(), Vec()});
  Rng rng(7, 0);
  double worst_a = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec v = random_unit(rng, 2);
    worst_a = std::max(worst_a, std::abs(quadratic_directional_hessian(f, v).det + 4.0));
  }
  double worst_b = 0;
  for (int k = 1; k <= 6; ++k) {
    std::vector<Mat> cs;
    for (int i = 0; i < k; ++i) {
      Mat e = Mat::Zero(k, k);
      e(i, i) = 1.0;
      cs.push_back(e);
    }
    const auto g = PushforwardMap::quadratic({cs, Mat(), Vec()});
    for (int trial = 0; trial < 100; ++trial) {
      const Vec v = random_unit(rng, k);
      double expect = std::exp2(k);
      for (int i = 0; i < k; ++i) expect *= v(i);
      worst_b = std::max(worst_b, std::abs(quadratic_directional_hessian(g, v).det - expect));
    }
  }
  return {worst_a <= 1e-12 && worst_b <= 1e-10,
          fmt("two-coordinate saddle max |det + 4| = %.1e <= 1e-12; sum of squares (k <= 6) max "
              "|det - 2^k prod v| = %.1e <= 1e-10",
              worst_a, worst_b)};
}

Outcome holomorphic_identity() {
  const auto f = PushforwardMap::holomorphic_power(3);
  Rng rng(8, 0);
  double worst_fd = 0, worst_det = 0, worst_spread = 0;
  for (int i = 0; i < 100; ++i) {
    // |z| in [0.25, 2]: at the critical point z = 0 a relative error is undefined.
    const double r = rng.uniform(0.25, 2.0), th = rng.uniform(0.0, 2 * std::numbers::pi);
    const std::complex<double> z = std::polar(r, th);
    const double expect = -std::norm(6.0 * z);
    double first = 0;
    for (int j = 0; j < 10; ++j) {
      const auto h = holomorphic_hessian_identity(f, z, random_unit(rng, 2));
      worst_fd = std::max(worst_fd, h.fd_relative_error);
      worst_det = std::max(worst_det, std::abs(h.det - expect) / std::abs(expect));
      if (j == 0) first = h.det;
      worst_spread = std::max(worst_spread, std::abs(h.det - first) / std::abs(expect));
    }
  }
  return {worst_fd <= 1e-6 && worst_det <= 1e-12 && worst_spread <= 1e-10,
          fmt("finite-difference relative error %.1e <= 1e-6; |det + |f''|^2| relative %.1e; "
              "spread over v %.1e <= 1e-10",
              worst_fd, worst_det, worst_spread)};
}

Outcome gamma_consistency() {
  Rng rng(9, 0);
  int checked = 0, identity_fail = 0, range_fail = 0;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pr = random_chain(rng, true);
    validate(pr);
    const auto bound = decay_exponent_bound(pr, {.curvature_nonvanishing = true, .non_expanding = true});
    if (bound.applicable) {
      if (!bound.gamma || !(*bound.gamma > 1.0 && *bound.gamma < 2.0)) ++range_fail;
    }
    for (const double p : {1.0, 2.0}) {
      const double s = sigma_p(pr, p);
      if (s <= 0.0) continue;
      const double g = compute_gamma(pr, p);
      const double d = std::abs((2.0 - g) / g - s);
      worst = std::max(worst, d);
      identity_fail += d > 1e-12;
      if (bound.applicable && !(g > 1.0 && g < 2.0)) ++range_fail;
      ++checked;
    }
  }
  return {identity_fail == 0 && range_fail == 0 && checked >= 1000,
          fmt("%d (profile, p) pairs, max |(2 - gamma)/gamma - sigma_p| = %.1e <= 1e-12, gamma outside "
              "(1, 2): %d",
              checked, worst, range_fail)};
}

Outcome convolution_oracle() {
  const LogFactor u{uniform_interval_ifs(1, 2), 0.0, 1};
  const auto exp = multiplicative_convolution({u, u});
  double err = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double w = 1.05 + (3.95 - 1.05) * i / 2000.0;
    err = std::max(err, std::abs(exp.density_exp_at(w) - oracle::uniform_product_density(w)));
  }
  const double mass_err = std::abs(exp.mass - 1.0);
  return {err <= 0.02 && mass_err <= 0.02,
          fmt("sup |density - analytic| on [1.05, 3.95] = %.4f <= 0.02; mass %.5f (within 2%%)", err, exp.mass)};
}

Outcome profile_invariants() {
  Rng rng(11, 0);
  int rejected = 0, named = 0, accepted = 0;
  std::string first_miss;
  for (int trial = 0; trial < 1000; ++trial) {
    auto pr = random_chain(rng, rng.uniform() < 0.5);
    const double k = pr.k;
    const double delta = rng.uniform(1e-6, 0.5);
    std::string expect;
    switch (rng.bits() % 5) {
      case 0:
        pr.kappa1->value = -delta;
        expect = "0 <= kappa1";
        break;
      case 1:
        pr.kappa1->value = pr.d_inf.value + delta * (pr.kappa2.value - pr.d_inf.value);
        expect = "kappa1 <= d_inf";
        break;
      case 2:
        pr.d_inf.value = pr.kappa2.value + delta * (pr.kappa_star.value - pr.kappa2.value);
        expect = "d_inf <= kappa2";
        break;
      case 3:
        pr.kappa2.value = pr.kappa_star.value + delta * (k - pr.kappa_star.value);
        expect = "kappa2 <= kappa_star";
        break;
      default:
        pr.kappa_star.value = k + delta;
        expect = "kappa_star <= k";
        break;
    }
    try {
      validate(pr);
      if (first_miss.empty()) first_miss = "accepted a profile violating " + expect;
    } catch (const InconsistentProfile& e) {
      ++rejected;
      if (e.inequality() == expect && std::string(e.what()).find(expect) != std::string::npos)
        ++named;
      else if (first_miss.empty())
        first_miss = "expected '" + expect + "', got '" + e.inequality() + "'";
    }
  }
  for (int trial = 0; trial < 1000; ++trial) {
    try {
      validate(random_chain(rng, rng.uniform() < 0.5));
      ++accepted;
    } catch (const InconsistentProfile& e) {
      if (first_miss.empty()) first_miss = std::string("rejected a valid profile: ") + e.what();
    }
  }
  return {rejected == 1000 && named == 1000 && accepted == 1000,
          fmt("invalid rejected %d/1000 with the right inequality %d/1000; valid accepted %d/1000%s", rejected,
              named, accepted, first_miss.empty() ? "" : ("; " + first_miss).c_str())};
}

Outcome van_der_corput() {
  DecayConfig cfg;
  cfg.octave_lo = 6;
  cfg.octave_hi = 16;
  cfg.samples_per_octave = 64;
  const auto exp = measure_decay_slope(uniform_interval_ifs(0, 1), PushforwardMap::square(), cfg);
  return {exp.fitted_slope <= -0.45,
          fmt("fitted envelope slope %.4f <= -0.45 (classical rate -0.5)", exp.fitted_slope)};
}

Outcome determinism() {
  const fs::path data = SSF_DATA_DIR;
  const fs::path scratch = fs::temp_directory_path() / "ssf_acceptance";
  fs::remove_all(scratch);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"fourier", "fourier_cantor_sweep.json"},      {"fourier", "fourier_cantor_square_order0.json"},
      {"fourier", "fourier_cantor_square.json"},     {"decay", "decay_cantor_square.json"},
      {"convolve", "convolve_uniform_product.json"},
  };
  int identical = 0;
  std::size_t files = 0;
  std::string problem;
  for (const auto& [cmd, cfg] : runs) {
    std::vector<fs::path> dirs;
    for (const int threads : {1, 4}) {
      const auto dir = scratch / (fs::path(cfg).stem().string() + "_t" + std::to_string(threads));
      fs::create_directories(dir);
      const std::string line = "\"" + std::string(FRACTAL_FOURIER_BIN) + "\" --threads " +
                               std::to_string(threads) + " " + cmd + " \"" + (data / "configs" / cfg).string() +
                               "\" --out \"" + dir.string() + "\" > \"" + (dir / "stdout.txt").string() + "\"";
      if (std::system(line.c_str()) != 0 && problem.empty()) problem = cfg + " exited non-zero";
      dirs.push_back(dir);
    }
    bool same = true;
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto other = dirs[1] / entry.path().filename();
      // stdout names the output directory, which differs by construction.
      auto a = slurp(entry.path()), b = fs::exists(other) ? slurp(other) : std::string("\x01missing");
      if (entry.path().filename() == "stdout.txt") {
        for (auto [text, dir] : {std::pair{&a, dirs[0]}, std::pair{&b, dirs[1]}})
          for (auto pos = text->find(dir.string()); pos != std::string::npos; pos = text->find(dir.string()))
            text->replace(pos, dir.string().size(), "<out>");
      }
      same = same && a == b;
      ++n;
    }
    same = same && n == static_cast<std::size_t>(std::distance(fs::directory_iterator(dirs[1]), {}));
    if (same) ++identical;
    else if (problem.empty()) problem = cfg + " differs";
    files += n;
  }
  return {identical == static_cast<int>(runs.size()) && problem.empty(),
          fmt("%d/%zu configurations byte-identical across --threads 1 and 4 (%zu files compared per thread count)%s", identical,
              runs.size(), files, problem.empty() ? "" : ("; " + problem).c_str())};
}

}  // namespace

int main() {
  criterion(1, "Moran solver", 1e-3, moran);
  criterion(2, "decay exponent for the Cantor measure under x^2", 1e-3, cantor_sigma);
  criterion(3, "two-set and three-set thresholds", 1e-3, thresholds);
  criterion(4, "recursion vs Cantor closed-form product", 30, mu_hat_oracle);
  criterion(5, "order0/order1 error bounds vs depth-20 brute force", 300, certified_honesty);
  criterion(6, "Cantor + x^2 decay envelope over octaves 8..18", 300, cantor_decay);
  criterion(7, "quadratic Hessian determinants", 1, quadratic_hessian);
  criterion(8, "holomorphic Hessian identity for z^3", 1, holomorphic_identity);
  criterion(9, "gamma consistency on random profiles", 1, gamma_consistency);
  criterion(10, "uniform [1, 2] product density", 120, convolution_oracle);
  criterion(11, "profile invariant enforcement", 1, profile_invariants);
  criterion(12, "uniform + x^2 envelope slope over octaves 6..16", 60, van_der_corput);
  criterion(13, "thread-count determinism of criteria 4-6 and 10 outputs", 0, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
