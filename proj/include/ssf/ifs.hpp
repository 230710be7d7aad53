#pragma once

// Self-similar iterated function systems: maps, validation, support hull,
// stopping-time cylinder decompositions and structural diagnostics.

#include "ssf/common.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ssf {

enum class Separation { none, SSC, OSC, ESC };

const char* to_string(Separation s);
Separation separation_from_string(const std::string& s);

/// True for declarations under which the set has no overlaps in the open-set sense.
inline bool implies_open_set(Separation s) { return s == Separation::SSC || s == Separation::OSC; }

/// x -> ratio * orientation * x + translation.
struct SimilarityMap {
  double ratio = 0.5;
  Mat orientation;
  Vec translation;

  int dim() const { return static_cast<int>(translation.size()); }
  Mat linear() const { return ratio * orientation; }
  Vec apply(const Vec& x) const { return ratio * (orientation * x) + translation; }

  /// One-dimensional map x -> ratio * sign * x + t.
  static SimilarityMap line(double ratio, double translation, int sign = 1);
};

/// Throws ValidationError naming the broken invariant.
void validate(const SimilarityMap& map);

/// Unique x with map(x) = x, from (I - rO) x = t.
Vec fixed_point(const SimilarityMap& map);

struct Ball {
  Vec center;
  double radius = 0.0;

  double diameter() const { return 2.0 * radius; }
};

class SelfSimilarIFS {
 public:
  /// Validates every invariant; throws ValidationError otherwise.
  SelfSimilarIFS(std::vector<SimilarityMap> maps, std::vector<double> weights);

  int ambient_dim() const { return dim_; }
  std::size_t size() const { return maps_.size(); }
  const std::vector<SimilarityMap>& maps() const { return maps_; }
  const std::vector<double>& weights() const { return weights_; }
  const SimilarityMap& map(std::size_t i) const { return maps_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  std::vector<double> ratios() const;
  double min_ratio() const;
  double max_ratio() const;

  /// Mean of the self-similar measure: solves (I - sum p_i r_i O_i) m = sum p_i t_i.
  const Vec& barycenter() const { return barycenter_; }

  /// Closed ball around the barycenter mapped into itself by every map, hence
  /// containing the attractor. Radius = max_i |f_i(c) - c| / (1 - r_i).
  const Ball& support_hull() const { return hull_; }

  /// Cumulative weights, for sampling.
  const std::vector<double>& weight_cdf() const { return cdf_; }

 private:
  std::vector<SimilarityMap> maps_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
  int dim_ = 0;
  Vec barycenter_;
  Ball hull_;
};

// Common systems on the line.
SelfSimilarIFS make_line_ifs(std::span<const double> ratios, std::span<const double> translations,
                             std::span<const double> weights);
/// Middle-third Cantor measure, maps x/3 and x/3 + 2/3, equal weights.
SelfSimilarIFS cantor_ifs();
/// Lebesgue measure on [a, b] as the two-map system with ratio 1/2.
SelfSimilarIFS uniform_interval_ifs(double a = 0.0, double b = 1.0);
/// Base-b missing digit measure on [0, 1] keeping `digits`, equal weights.
SelfSimilarIFS missing_digit_ifs(int base, std::span<const int> digits);

/// A finite composition f_w = f_{w_1} o ... o f_{w_n} with its accumulated data.
struct CylinderWord {
  std::vector<int> letters;
  double ratio = 1.0;
  Mat orientation;
  Vec translation;
  double weight = 1.0;
  /// Image of the support barycenter under f_w.
  Vec anchor;

  /// Diameter bound of f_w(hull).
  double diameter_bound(const Ball& hull) const { return ratio * hull.diameter(); }
};

struct StoppingDecomposition {
  double scale = 0.0;
  std::vector<CylinderWord> words;
  double ratio_floor = 0.0;
};

/// Light-weight view of a cylinder handed to streaming visitors.
struct CylinderView {
  double ratio;
  const Mat& orientation;
  const Vec& translation;
  double weight;
  std::span<const int> letters;
};

/// Visits, in lexicographic order, every minimal word with ratio <= scale. A scale
/// >= 1 yields just the empty word. Throws ResourceExceeded past `budget` leaves.
/// Returns the number of leaves visited.
std::size_t for_each_cylinder(const SelfSimilarIFS& ifs, double scale, std::size_t budget,
                              const std::function<void(const CylinderView&)>& visit);

/// Materialised stopping-time decomposition at `scale` in (0, 1).
StoppingDecomposition stopping_decomposition(const SelfSimilarIFS& ifs, double scale,
                                             std::size_t budget = default_leaf_budget());

/// All r_i O_i agree entrywise within 1e-12.
bool is_homogeneous(const SelfSimilarIFS& ifs);

enum class ExpansionVerdict { NonExpanding, Expanding, Inconclusive };
const char* to_string(ExpansionVerdict v);

struct ExpansionReport {
  ExpansionVerdict verdict = ExpansionVerdict::Inconclusive;
  /// Number of distinct orientation products of length exactly n, n = 1..levels reached.
  std::vector<std::size_t> level_counts;
  std::size_t distinct_total = 0;
  std::string reason;
};

/// Growth heuristic for the semigroup generated by the orientation parts.
/// `cap` bounds the number of distinct products enumerated.
ExpansionReport non_expanding_heuristic(const SelfSimilarIFS& ifs, int depth, std::size_t cap);

enum class SeparationVerdict { SSC_ok, no_overlap_detected, overlaps_detected };
const char* to_string(SeparationVerdict v);

/// Finite-depth diagnostic; never a proof of any separation property.
struct SeparationReport {
  SeparationVerdict verdict = SeparationVerdict::no_overlap_detected;
  bool ssc_ok = false;
  /// min |f_i(0) - f_j(0)| over distinct depth-n words with equal (ratio, orientation); inf if none.
  double esc_distance = 0.0;
  /// Total overlap of the depth-n hull images (sum of lengths minus length of union, k = 1)
  /// or the largest pairwise ball penetration depth (k > 1).
  double overlap_measure = 0.0;
  int depth = 0;
  bool diagnostic_only = true;
};

SeparationReport separation_diagnostic(const SelfSimilarIFS& ifs, int depth,
                                       std::size_t budget = 1u << 20);

/// Porosity characterisation on the line: declared separation implies the weak
/// separation condition and the similarity dimension is below 1. Unsupported for k != 1.
bool porosity_flag(const SelfSimilarIFS& ifs, Separation declared, double similarity_dim);

/// Independent approximate samples from the self-similar measure: each is a random
/// word of depth deep enough that f_w(hull) has radius below 1e-12 * hull radius,
/// applied to the barycenter. Deterministic in (seed, n).
std::vector<Vec> sample_measure(const SelfSimilarIFS& ifs, std::size_t n, std::uint64_t seed,
                                unsigned threads = 0);

/// Fixed points of all words of length 1..depth; each lies in the attractor.
std::vector<Vec> word_fixed_points(const SelfSimilarIFS& ifs, int depth);

}  // namespace ssf
