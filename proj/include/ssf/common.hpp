#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssf {

/// Largest ambient dimension supported by the small fixed-capacity vector types.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Default cap on enumerated leaves / cylinders.
inline constexpr std::size_t kDefaultLeafBudget = 10'000'000;

/// Reads FRACTAL_FOURIER_BUDGET when set, otherwise kDefaultLeafBudget.
std::size_t default_leaf_budget();

// Error hierarchy. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (bad weights, non-orthogonal matrix, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A leaf / word / sample budget would be exceeded.
class ResourceExceeded : public Error {
 public:
  ResourceExceeded(const std::string& budget_name, std::size_t budget)
      : Error("resource exceeded: " + budget_name + " budget of " + std::to_string(budget)),
        budget_name_(budget_name),
        budget_(budget) {}

  const std::string& budget_name() const { return budget_name_; }
  std::size_t budget() const { return budget_; }

 private:
  std::string budget_name_;
  std::size_t budget_;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class BadConfig : public Error {
 public:
  using Error::Error;
};

class MissingExponent : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

/// A dimension profile breaks the exponent chain; what() names the inequality.
class InconsistentProfile : public Error {
 public:
  InconsistentProfile(const std::string& inequality, const std::string& detail)
      : Error("inconsistent profile: " + inequality + " violated (" + detail + ")"),
        inequality_(inequality) {}

  const std::string& inequality() const { return inequality_; }

 private:
  std::string inequality_;
};

class MissingHessianBound : public Error {
 public:
  using Error::Error;
};

class MissingLipschitzBound : public Error {
 public:
  using Error::Error;
};

class SupportNotPositive : public Error {
 public:
  using Error::Error;
};

class CenterInsideSupport : public Error {
 public:
  using Error::Error;
};

/// Where a value in a profile or report came from.
enum class Provenance { exact_under_separation, estimated, user_supplied, derived_bound };

const char* to_string(Provenance p);

/// Shortest round-trip decimal form, stable across runs (used for every CSV/JSON number).
std::string format_double(double x);

}  // namespace ssf
