#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace ssf {

/*!
  Neumaier-compensated accumulator. Tracks the rounding error of each
  addition and folds it back in when the value is read, so long sums of
  mixed-magnitude terms keep close to full precision.
*/
struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double value) {
    const double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      compensation += (sum - t) + value;
    } else {
      compensation += (value - t) + sum;
    }
    sum = t;
  }

  CompensatedSum& operator+=(double value) {
    add(value);
    return *this;
  }

  double value() const { return sum + compensation; }
};

struct CompensatedComplexSum {
  CompensatedSum re;
  CompensatedSum im;

  CompensatedComplexSum& operator+=(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
    return *this;
  }

  std::complex<double> value() const { return {re.value(), im.value()}; }
};

/// e^{-2 pi i phase}, with the phase reduced mod 1 first. Odd in phase bit for bit.
inline std::complex<double> unit_phase(double phase) {
  const double frac = phase - std::round(phase);
  const double angle = 2.0 * std::numbers::pi * frac;
  return {std::cos(angle), -std::sin(angle)};
}

// Deterministic random streams. A stream is identified by (seed, stream id),
// which is how parallel work keeps results independent of the thread count.

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (implementation independent of libstdc++ distributions).
  double normal();

  /// Index drawn from a discrete distribution with cumulative weights `cdf` (last entry ~1).
  std::size_t discrete(std::span<const double> cdf);

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Runs body(i) for i in [0, n) on up to `threads` worker threads with a fixed
/// contiguous chunking. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Process-wide default for parallel_for when a caller passes threads = 0.
unsigned default_threads();
void set_default_threads(unsigned threads);

/// Root of a monotone function on a bracket [lo, hi] with f(lo), f(hi) of opposite sign:
/// bisection to width `width`, then `newton_steps` Newton polish steps (kept only
/// when they stay inside the final bracket and do not increase |f|).
double bracketed_root(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double lo, double hi,
                      double width = 1e-13, int newton_steps = 2);

/// Ordinary least squares y = a + b x. Returns {slope, intercept, residual_rms, slope_stderr}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double slope_stderr = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace ssf
