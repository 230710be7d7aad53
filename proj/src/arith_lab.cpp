#include "ssf/arith_lab.hpp"

#include "ssf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssf {

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

Vec random_frequency(Rng& rng, int octave, int dim) {
  const double magnitude = std::exp2(octave + rng.uniform());
  if (dim == 1) {
    Vec xi(1);
    xi(0) = rng.uniform() < 0.5 ? -magnitude : magnitude;
    return xi;
  }
  Vec dir(dim);
  do {
    for (int i = 0; i < dim; ++i) dir(i) = rng.normal();
  } while (dir.norm() < 1e-12);
  return magnitude * dir / dir.norm();
}

struct OctaveStats {
  double max_abs = 0.0;
  double q95 = 0.0;
  double max_error = 0.0;
  std::size_t leaves = 0;
};

OctaveStats octave_stats(const std::vector<FrequencySample>& batch) {
  OctaveStats st;
  std::vector<double> mags;
  mags.reserve(batch.size());
  for (const auto& s : batch) {
    const double m = std::abs(s.value);
    mags.push_back(m);
    st.max_abs = std::max(st.max_abs, m);
    st.max_error = std::max(st.max_error, s.error_bound);
    st.leaves += s.leaves_used;
  }
  st.q95 = quantile(std::move(mags), 0.95);
  return st;
}

}  // namespace

DecayExperiment measure_decay_slope(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                    const DecayConfig& config,
                                    std::optional<double> theoretical_sigma) {
  if (config.octave_hi < config.octave_lo) throw BadConfig("octave range is empty");
  if (config.samples_per_octave == 0) throw BadConfig("samples_per_octave must be positive");
  if (!(config.tol > 0.0)) throw BadConfig("tol must be positive");
  if (map.in_dim() != ifs.ambient_dim())
    throw ValidationError("map input dimension differs from the IFS dimension");

  DecayExperiment exp;
  exp.config = config;
  exp.theoretical_sigma = theoretical_sigma;

  if (map.out_dim() == 1) {
    const auto curv = curvature_diagnostic(ifs, map, 1000, config.seed);
    if (curv.vanishing) {
      exp.warnings.push_back("Hessian determinant vanishes on the support (min |det| = " +
                             format_double(curv.min_abs_hessian_det) + "); no decay is guaranteed");
    }
  } else {
    exp.warnings.push_back("curvature check skipped for vector-valued map");
  }

  PushforwardOptions options;
  options.budget = config.budget;
  std::vector<double> xs, ys;
  for (int j = config.octave_lo; j <= config.octave_hi; ++j) {
    Rng rng(config.seed, static_cast<std::uint64_t>(j));
    std::vector<Vec> xis;
    xis.reserve(config.samples_per_octave);
    for (std::size_t s = 0; s < config.samples_per_octave; ++s) {
      xis.push_back(random_frequency(rng, j, map.out_dim()));
    }

    OctaveResult res;
    res.octave = j;
    double tol = config.tol;
    std::vector<FrequencySample> batch;
    for (int attempt = 0;; ++attempt) {
      batch = evaluate_batch(ifs, &map, xis, config.scheme, tol, config.threads, options);
      const auto st = octave_stats(batch);
      res.max_abs = st.max_abs;
      res.q95 = st.q95;
      res.max_error = st.max_error;
      res.leaves += st.leaves;
      res.tol_used = tol;
      if (st.max_error <= 0.1 * st.max_abs) break;
      if (attempt >= config.max_retries) {
        res.reliable = false;
        exp.warnings.push_back("octave " + std::to_string(j) +
                               ": error bounds exceed 10% of the octave maximum");
        break;
      }
      tol = st.max_abs > 0.0 ? std::min(tol / 4.0, 0.05 * st.max_abs) : tol / 4.0;
    }
    exp.samples.insert(exp.samples.end(), batch.begin(), batch.end());
    exp.octaves.push_back(res);
    if (res.max_abs > 0.0) {
      xs.push_back(j);
      ys.push_back(std::log2(res.max_abs));
    }
  }
  if (xs.size() >= 2) {
    const auto fit = fit_line(xs, ys);
    exp.fitted_slope = fit.slope;
    exp.fit_residual = fit.residual_rms;
    exp.slope_stderr = fit.slope_stderr;
  } else {
    exp.warnings.push_back("fewer than two octaves with nonzero maxima; no slope fitted");
  }
  return exp;
}

SelfSimilarIFS reflect(const SelfSimilarIFS& ifs) {
  if (ifs.ambient_dim() != 1) throw Unsupported("reflection is implemented on the line");
  std::vector<SimilarityMap> maps = ifs.maps();
  for (auto& m : maps) m.translation = -m.translation;
  return SelfSimilarIFS(std::move(maps), ifs.weights());
}

double ConvolutionExperiment::density_at(double zv) const {
  if (product.empty()) return 0.0;
  CompensatedSum sum;
  sum.add(product[0].real());
  for (std::size_t n = 1; n < product.size(); ++n) {
    sum.add(2.0 * (product[n] * unit_phase(-frequencies[n] * zv)).real());
  }
  return step * sum.value();
}

double ConvolutionExperiment::density_exp_at(double w) const {
  if (!(w > 0.0)) return 0.0;
  return density_at(std::log(w)) / w;
}

ConvolutionExperiment multiplicative_convolution(const std::vector<LogFactor>& factors,
                                                 const ConvolutionGrid& grid) {
  if (factors.empty()) throw BadConfig("at least one factor is required");
  if (!(grid.max_frequency > 0.0)) throw BadConfig("max_frequency must be positive");
  if (!(grid.tol > 0.0)) throw BadConfig("tol must be positive");

  ConvolutionExperiment exp;
  exp.factors = factors;

  std::vector<PushforwardMap> maps;
  double total = 0.0;
  for (const auto& f : factors) {
    if (f.ifs.ambient_dim() != 1) throw Unsupported("log factors must live on the line");
    const Ball& hull = f.ifs.support_hull();
    const double lo = hull.center(0) - hull.radius - f.shift;
    const double hi = hull.center(0) + hull.radius - f.shift;
    if (!(lo > 0.0)) {
      throw SupportNotPositive("factor hull [" + format_double(lo + f.shift) + ", " +
                               format_double(hi + f.shift) + "] is not above " +
                               format_double(f.shift));
    }
    const double s = f.sign < 0 ? -1.0 : 1.0;
    const double a = s * std::log(lo);
    const double b = s * std::log(hi);
    exp.z_lo += std::min(a, b);
    exp.z_hi += std::max(a, b);
    total += std::abs(b - a);
    maps.push_back(PushforwardMap::log_map(f.shift, f.sign));
  }

  exp.step = grid.step > 0.0 ? grid.step : 1.0 / (4.0 * total);
  if (exp.step * (exp.z_hi - exp.z_lo) > 1.0) {
    throw BadConfig("frequency step " + format_double(exp.step) +
                    " aliases the log support of length " + format_double(exp.z_hi - exp.z_lo));
  }
  const auto n_freq = static_cast<std::size_t>(std::floor(grid.max_frequency / exp.step)) + 1;
  exp.frequencies.resize(n_freq);
  std::vector<Vec> xis(n_freq);
  for (std::size_t n = 0; n < n_freq; ++n) {
    exp.frequencies[n] = static_cast<double>(n) * exp.step;
    xis[n] = Vec::Constant(1, exp.frequencies[n]);
  }

  PushforwardOptions options;
  options.budget = grid.budget;
  std::vector<std::vector<FrequencySample>> values;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    values.push_back(
        evaluate_batch(factors[i].ifs, &maps[i], xis, Scheme::order1, grid.tol, grid.threads, options));
  }

  // Multiply in a canonical order so that the product does not depend on the factor order.
  exp.product.resize(n_freq);
  exp.product_error.resize(n_freq);
  std::vector<std::pair<std::complex<double>, double>> terms(factors.size());
  for (std::size_t n = 0; n < n_freq; ++n) {
    for (std::size_t i = 0; i < factors.size(); ++i) {
      terms[i] = {values[i][n].value, values[i][n].error_bound};
    }
    std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) {
      if (x.first.real() != y.first.real()) return x.first.real() < y.first.real();
      if (x.first.imag() != y.first.imag()) return x.first.imag() < y.first.imag();
      return x.second < y.second;
    });
    std::complex<double> prod = 1.0;
    double upper = 1.0, exact = 1.0;
    for (const auto& [v, e] : terms) {
      prod *= v;
      upper *= std::abs(v) + e;
      exact *= std::abs(v);
    }
    exp.product[n] = prod;
    exp.product_error[n] = (upper - exact) + 4.0 * factors.size() * 0x1.0p-53;
  }

  // Octave sums of |P| and |P|^2 over full octaves [2^j, 2^(j+1)) inside the grid.
  const int j_lo = static_cast<int>(std::ceil(std::log2(std::max(exp.step, 1e-300))));
  const int j_hi = static_cast<int>(std::floor(std::log2(grid.max_frequency))) - 1;
  std::vector<double> oct_x, oct_max;
  for (int j = std::max(j_lo, 0); j <= j_hi; ++j) {
    double l1 = 0.0, l2 = 0.0, mx = 0.0;
    for (std::size_t n = 1; n < n_freq; ++n) {
      const double f = exp.frequencies[n];
      if (f < std::exp2(j) || f >= std::exp2(j + 1)) continue;
      const double a = std::abs(exp.product[n]);
      l1 += a * exp.step;
      l2 += a * a * exp.step;
      mx = std::max(mx, a);
    }
    exp.l1_octaves.push_back(l1);
    exp.l2_octaves.push_back(l2);
    if (mx > 0.0) {
      oct_x.push_back(j);
      oct_max.push_back(std::log2(mx));
    }
  }
  auto octave_slope = [&](const std::vector<double>& sums) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < sums.size(); ++i) {
      if (sums[i] > 0.0) {
        x.push_back(std::max(j_lo, 0) + static_cast<int>(i));
        y.push_back(std::log2(sums[i]));
      }
    }
    return x.size() >= 2 ? fit_line(x, y).slope : 0.0;
  };
  exp.l1_slope = octave_slope(exp.l1_octaves);
  exp.l2_slope = octave_slope(exp.l2_octaves);

  // Tail beyond the grid from the envelope C f^alpha fitted on the last four octaves.
  const double f_max = exp.frequencies.back();
  if (oct_x.size() >= 2) {
    const std::size_t first = oct_x.size() > 4 ? oct_x.size() - 4 : 0;
    const std::vector<double> tx(oct_x.begin() + first, oct_x.end());
    const std::vector<double> ty(oct_max.begin() + first, oct_max.end());
    const auto fit = fit_line(tx, ty);
    const double alpha = fit.slope;
    const double c = std::exp2(fit.intercept);
    if (alpha < -1.0) {
      exp.tail_estimate = 2.0 * c * std::pow(f_max, alpha + 1.0) / (-alpha - 1.0);
    } else {
      exp.tail_estimate = std::numeric_limits<double>::infinity();
      exp.notes.push_back("envelope slope " + format_double(alpha) +
                          " >= -1: truncated inversion has no summable tail estimate");
    }
  } else {
    exp.tail_estimate = std::numeric_limits<double>::infinity();
    exp.notes.push_back("grid too short for a tail estimate");
  }

  CompensatedSum err_sum;
  err_sum.add(exp.product_error[0]);
  for (std::size_t n = 1; n < n_freq; ++n) err_sum.add(2.0 * exp.product_error[n]);
  const double density_err = exp.step * err_sum.value() + exp.tail_estimate;

  // Inversion on one period, then restriction to the support window.
  const double period = 1.0 / exp.step;
  std::size_t m_points = grid.inversion_points;
  if (m_points == 0) {
    m_points = 1;
    while (m_points < 2 * n_freq + 1) m_points *= 2;
  }
  if (m_points < 2 * n_freq + 1) {
    exp.notes.push_back("fewer inversion points than 2N + 1: the discrete Parseval check is approximate");
  }
  const double h = period / static_cast<double>(m_points);
  const double zc = 0.5 * (exp.z_lo + exp.z_hi);
  const double margin = 0.05 * (exp.z_hi - exp.z_lo);
  CompensatedSum parseval_space, mass;
  double imag = 0.0;
  double min_density = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < m_points; ++m) {
    const double zv = zc - 0.5 * period + static_cast<double>(m) * h;
    CompensatedComplexSum sum;
    sum += exp.product[0];
    for (std::size_t n = 1; n < n_freq; ++n) {
      const auto e = unit_phase(-exp.frequencies[n] * zv);
      sum += exp.product[n] * e;
      sum += std::conj(exp.product[n]) * std::conj(e);
    }
    const std::complex<double> g = exp.step * sum.value();
    imag = std::max(imag, std::abs(g.imag()));
    parseval_space.add(g.real() * g.real() * h);
    if (zv >= exp.z_lo - margin && zv <= exp.z_hi + margin) {
      exp.z.push_back(zv);
      exp.density.push_back(g.real());
      exp.density_error.push_back(density_err);
      mass.add(g.real() * h);
      min_density = std::min(min_density, g.real());
    }
  }
  CompensatedSum parseval_freq;
  parseval_freq.add(std::norm(exp.product[0]) * exp.step);
  for (std::size_t n = 1; n < n_freq; ++n) parseval_freq.add(2.0 * std::norm(exp.product[n]) * exp.step);

  exp.imag_residue = imag;
  exp.min_density = min_density;
  exp.mass = mass.value();
  exp.parseval_frequency = parseval_freq.value();
  exp.parseval_space = parseval_space.value();
  if (exp.imag_residue > 1e-8) exp.notes.push_back("imaginary residue above 1e-8");
  if (exp.min_density < -1e-3) exp.notes.push_back("density undershoots below -1e-3 (truncation ripple)");
  if (exp.mass < 0.98 || exp.mass > 1.02) exp.notes.push_back("mass on the support window outside [0.98, 1.02]");
  exp.notes.push_back("absolute-continuity indicators are diagnostics, not proofs");
  return exp;
}

ConvolutionExperiment radial_projection_experiment(const SelfSimilarIFS& ifs_e,
                                                   const SelfSimilarIFS& ifs_f, double a, double b,
                                                   const ConvolutionGrid& grid) {
  if (ifs_e.ambient_dim() != 1 || ifs_f.ambient_dim() != 1)
    throw Unsupported("radial projections are implemented for products of sets on the line");
  struct Side {
    bool above, below;
  };
  auto side = [](const SelfSimilarIFS& ifs, double p) {
    const Ball& h = ifs.support_hull();
    return Side{h.center(0) - h.radius > p, h.center(0) + h.radius < p};
  };
  const Side se = side(ifs_e, a);
  const Side sf = side(ifs_f, b);
  const bool e_straddles = !se.above && !se.below;
  const bool f_straddles = !sf.above && !sf.below;
  if (e_straddles && f_straddles) {
    throw CenterInsideSupport("(" + format_double(a) + ", " + format_double(b) +
                              ") lies inside the product of the support hulls");
  }
  if (e_straddles || f_straddles) {
    throw Unsupported(std::string("the hull of ") + (e_straddles ? "E" : "F") +
                      " straddles the centre coordinate; split the set first");
  }
  // log|x - a| - log|y - b|; a set below its coordinate is reflected so the log argument is positive.
  LogFactor fe{se.above ? ifs_e : reflect(ifs_e), se.above ? a : -a, 1};
  LogFactor ff{sf.above ? ifs_f : reflect(ifs_f), sf.above ? b : -b, -1};
  auto exp = multiplicative_convolution({fe, ff}, grid);
  exp.notes.push_back("density is that of log|x - a| - log|y - b|");
  return exp;
}

}  // namespace ssf
