#pragma once

// Desk-scale experiments: empirical decay of pushforward transforms and densities
// of products and ratios recovered from their log-space transforms.

#include "ssf/fourier.hpp"
#include "ssf/ifs.hpp"
#include "ssf/pushforward.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ssf {

struct DecayConfig {
  int octave_lo = 8;
  int octave_hi = 18;
  std::size_t samples_per_octave = 64;
  std::uint64_t seed = 0;
  /// Initial per-sample tolerance; tightened per octave while bounds exceed 10% of the octave max.
  double tol = 1e-3;
  int max_retries = 4;
  Scheme scheme = Scheme::order1;
  unsigned threads = 0;
  std::size_t budget = default_leaf_budget();
};

struct OctaveResult {
  int octave = 0;
  double max_abs = 0.0;
  double q95 = 0.0;
  double max_error = 0.0;
  double tol_used = 0.0;
  std::size_t leaves = 0;
  bool reliable = true;
};

struct DecayExperiment {
  DecayConfig config;
  std::vector<OctaveResult> octaves;
  /// Frequencies and values of the final pass, octave by octave.
  std::vector<FrequencySample> samples;
  /// Least-squares slope of log2(octave max) against the octave index.
  double fitted_slope = 0.0;
  double fit_residual = 0.0;
  double slope_stderr = 0.0;
  std::optional<double> theoretical_sigma;
  std::vector<std::string> warnings;

  /// -fitted_slope, comparable with a decay exponent.
  double envelope_exponent() const { return -fitted_slope; }
};

/// Evaluates the pushforward transform at `samples_per_octave` log-uniform random
/// frequencies in each octave [2^j, 2^(j+1)) (stream (seed, j) per octave, so results
/// do not depend on the thread count) and fits the envelope slope.
DecayExperiment measure_decay_slope(const SelfSimilarIFS& ifs, const PushforwardMap& map,
                                    const DecayConfig& config,
                                    std::optional<double> theoretical_sigma = std::nullopt);

/// A factor measure pushed to log space by x -> sign * log(x - shift).
struct LogFactor {
  SelfSimilarIFS ifs;
  double shift = 0.0;
  int sign = 1;
};

struct ConvolutionGrid {
  /// Frequency step; 0 means 1 / (4 * total log-support length).
  double step = 0.0;
  double max_frequency = 256.0;
  double tol = 1e-5;
  /// Inversion points over one period; 0 means the next power of two >= 2N + 1.
  std::size_t inversion_points = 0;
  unsigned threads = 0;
  std::size_t budget = default_leaf_budget();
};

struct ConvolutionExperiment {
  std::vector<LogFactor> factors;
  double step = 0.0;
  /// Frequencies n * step for n = 0..N.
  std::vector<double> frequencies;
  std::vector<std::complex<double>> product;
  std::vector<double> product_error;
  /// Hull of Z = sum of the log factors.
  double z_lo = 0.0;
  double z_hi = 0.0;

  /// Density of Z on the support window (uniform grid), with error estimates.
  std::vector<double> z;
  std::vector<double> density;
  std::vector<double> density_error;

  double imag_residue = 0.0;
  double min_density = 0.0;
  /// Integral of the recovered density over the support window.
  double mass = 0.0;
  /// sum |product|^2 step (both signs) against the grid integral of density^2 over a period.
  double parseval_frequency = 0.0;
  double parseval_space = 0.0;
  /// Extrapolated contribution of the frequencies beyond the grid to the density.
  double tail_estimate = 0.0;
  /// Octave slopes of log2 of the per-octave sums of |product| and |product|^2.
  double l1_slope = 0.0;
  double l2_slope = 0.0;
  std::vector<double> l1_octaves;
  std::vector<double> l2_octaves;
  std::vector<std::string> notes;

  /// Density of Z at z by direct Fourier inversion.
  double density_at(double z) const;
  /// Density of exp(Z) at w > 0: density_at(log w) / w.
  double density_exp_at(double w) const;
};

/// Law of sum_i sign_i log(X_i - shift_i) for independent X_i from the factors. With
/// zero shifts and positive signs this is the log of the product of the factors.
/// Throws SupportNotPositive when a factor hull reaches the log singularity.
ConvolutionExperiment multiplicative_convolution(const std::vector<LogFactor>& factors,
                                                 const ConvolutionGrid& grid = {});

/// Law of log(x - a) - log(y - b) for x from E and y from F, i.e. the log of the
/// slope ratio seen from (a, b). Sets lying entirely below or left of (a, b) are
/// reflected first. Throws CenterInsideSupport when (a, b) lies in the product of
/// the hulls and Unsupported when one hull straddles its coordinate.
ConvolutionExperiment radial_projection_experiment(const SelfSimilarIFS& ifs_e,
                                                   const SelfSimilarIFS& ifs_f, double a, double b,
                                                   const ConvolutionGrid& grid = {});

/// x -> -x applied to a system on the line.
SelfSimilarIFS reflect(const SelfSimilarIFS& ifs);

}  // namespace ssf
