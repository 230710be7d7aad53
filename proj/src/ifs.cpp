#include "ssf/ifs.hpp"

#include "ssf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace ssf {

namespace {

constexpr double kOrthogonalityTol = 1e-9;
constexpr double kWeightSumTol = 1e-12;
constexpr double kDedupTol = 1e-8;
// Relative slack when comparing an accumulated ratio with the stopping scale, so
// that products such as (1/3)^2 against 1/9 stop where exact arithmetic would.
constexpr double kScaleSlack = 1e-12;

double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

const char* to_string(Separation s) {
  switch (s) {
    case Separation::none: return "none";
    case Separation::SSC: return "SSC";
    case Separation::OSC: return "OSC";
    case Separation::ESC: return "ESC";
  }
  return "none";
}

Separation separation_from_string(const std::string& s) {
  if (s == "none") return Separation::none;
  if (s == "SSC") return Separation::SSC;
  if (s == "OSC") return Separation::OSC;
  if (s == "ESC") return Separation::ESC;
  throw ValidationError("declared_separation must be one of SSC, OSC, ESC, none (got '" + s + "')");
}

SimilarityMap SimilarityMap::line(double ratio, double translation, int sign) {
  SimilarityMap m;
  m.ratio = ratio;
  m.orientation = Mat::Constant(1, 1, sign < 0 ? -1.0 : 1.0);
  m.translation = Vec::Constant(1, translation);
  return m;
}

void validate(const SimilarityMap& map) {
  if (!(map.ratio > 0.0 && map.ratio < 1.0))
    throw ValidationError("map ratio must lie in (0, 1), got " + format_double(map.ratio));
  const auto k = map.translation.size();
  if (k < 1 || k > kMaxDim)
    throw ValidationError("ambient dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (map.orientation.rows() != k || map.orientation.cols() != k)
    throw ValidationError("orientation must be a k x k matrix matching the translation length");
  if (!map.orientation.allFinite() || !map.translation.allFinite())
    throw ValidationError("map entries must be finite");
  const Mat gram = map.orientation.transpose() * map.orientation;
  const double dev = max_abs_diff(gram, Mat::Identity(k, k));
  if (dev > kOrthogonalityTol)
    throw ValidationError("orientation is not orthogonal: |O^T O - I|_max = " + format_double(dev));
}

Vec fixed_point(const SimilarityMap& map) {
  const auto k = map.translation.size();
  const Mat a = Mat::Identity(k, k) - map.linear();
  Vec x = a.partialPivLu().solve(map.translation);
  // One step of iterative refinement.
  const Vec residual = map.translation - a * x;
  x += a.partialPivLu().solve(residual);
  return x;
}

SelfSimilarIFS::SelfSimilarIFS(std::vector<SimilarityMap> maps, std::vector<double> weights)
    : maps_(std::move(maps)), weights_(std::move(weights)) {
  if (maps_.size() < 2) throw ValidationError("an IFS needs at least two maps");
  if (weights_.size() != maps_.size())
    throw ValidationError("weights and maps have different lengths (" +
                          std::to_string(weights_.size()) + " vs " + std::to_string(maps_.size()) +
                          ")");
  for (const auto& m : maps_) validate(m);
  dim_ = maps_.front().dim();
  for (const auto& m : maps_)
    if (m.dim() != dim_) throw ValidationError("all maps must share the ambient dimension");

  CompensatedSum total;
  for (double p : weights_) {
    if (!(p > 0.0 && p < 1.0))
      throw ValidationError("weights must lie in (0, 1), got " + format_double(p));
    total += p;
  }
  if (std::abs(total.value() - 1.0) > kWeightSumTol)
    throw ValidationError("weights must sum to 1 within 1e-12, sum = " +
                          format_double(total.value()));

  // A common fixed point of every map makes the measure a point mass.
  const Vec first = fixed_point(maps_.front());
  bool all_shared = true;
  for (std::size_t i = 1; i < maps_.size() && all_shared; ++i)
    if ((fixed_point(maps_[i]) - first).norm() >= 1e-12) all_shared = false;
  if (all_shared) throw ValidationError("all maps share a fixed point, the measure is atomic");

  cdf_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf_.begin());

  Mat a = Mat::Identity(dim_, dim_);
  Vec b = Vec::Zero(dim_);
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    a -= weights_[i] * maps_[i].linear();
    b += weights_[i] * maps_[i].translation;
  }
  barycenter_ = a.partialPivLu().solve(b);

  double radius = 0.0;
  for (const auto& m : maps_)
    radius = std::max(radius, (m.apply(barycenter_) - barycenter_).norm() / (1.0 - m.ratio));
  hull_ = Ball{barycenter_, radius};
}

std::vector<double> SelfSimilarIFS::ratios() const {
  std::vector<double> r;
  r.reserve(maps_.size());
  for (const auto& m : maps_) r.push_back(m.ratio);
  return r;
}

double SelfSimilarIFS::min_ratio() const {
  double r = 1.0;
  for (const auto& m : maps_) r = std::min(r, m.ratio);
  return r;
}

double SelfSimilarIFS::max_ratio() const {
  double r = 0.0;
  for (const auto& m : maps_) r = std::max(r, m.ratio);
  return r;
}

SelfSimilarIFS make_line_ifs(std::span<const double> ratios, std::span<const double> translations,
                             std::span<const double> weights) {
  if (ratios.size() != translations.size())
    throw ValidationError("ratios and translations have different lengths");
  std::vector<SimilarityMap> maps;
  for (std::size_t i = 0; i < ratios.size(); ++i)
    maps.push_back(SimilarityMap::line(ratios[i], translations[i]));
  return SelfSimilarIFS(std::move(maps), std::vector<double>(weights.begin(), weights.end()));
}

SelfSimilarIFS cantor_ifs() {
  const double r[] = {1.0 / 3.0, 1.0 / 3.0};
  const double t[] = {0.0, 2.0 / 3.0};
  const double p[] = {0.5, 0.5};
  return make_line_ifs(r, t, p);
}

SelfSimilarIFS uniform_interval_ifs(double a, double b) {
  if (!(b > a)) throw ValidationError("uniform interval needs a < b");
  const double r[] = {0.5, 0.5};
  const double t[] = {0.5 * a, 0.5 * b};
  const double p[] = {0.5, 0.5};
  return make_line_ifs(r, t, p);
}

SelfSimilarIFS missing_digit_ifs(int base, std::span<const int> digits) {
  if (base < 2) throw ValidationError("base must be at least 2");
  std::vector<double> r, t, p;
  for (int d : digits) {
    if (d < 0 || d >= base) throw ValidationError("digit out of range for base");
    r.push_back(1.0 / base);
    t.push_back(static_cast<double>(d) / base);
    p.push_back(1.0 / static_cast<double>(digits.size()));
  }
  return make_line_ifs(r, t, p);
}

namespace {

class CylinderWalker {
 public:
  CylinderWalker(const SelfSimilarIFS& ifs, double scale, std::size_t budget,
                 const std::function<void(const CylinderView&)>& visit)
      : ifs_(ifs), limit_(scale * (1.0 + kScaleSlack)), budget_(budget), visit_(visit) {}

  std::size_t run() {
    const int k = ifs_.ambient_dim();
    descend(1.0, Mat::Identity(k, k), Vec::Zero(k), 1.0);
    return count_;
  }

 private:
  void descend(double ratio, const Mat& orientation, const Vec& translation, double weight) {
    if (ratio <= limit_) {
      if (++count_ > budget_) throw ResourceExceeded("leaf", budget_);
      visit_(CylinderView{ratio, orientation, translation, weight, letters_});
      return;
    }
    for (std::size_t i = 0; i < ifs_.size(); ++i) {
      const auto& m = ifs_.map(i);
      letters_.push_back(static_cast<int>(i));
      const Mat o = orientation * m.orientation;
      const Vec t = ratio * (orientation * m.translation) + translation;
      descend(ratio * m.ratio, o, t, weight * ifs_.weight(i));
      letters_.pop_back();
    }
  }

  const SelfSimilarIFS& ifs_;
  double limit_;
  std::size_t budget_;
  const std::function<void(const CylinderView&)>& visit_;
  std::size_t count_ = 0;
  std::vector<int> letters_;
};

}  // namespace

std::size_t for_each_cylinder(const SelfSimilarIFS& ifs, double scale, std::size_t budget,
                              const std::function<void(const CylinderView&)>& visit) {
  if (!(scale > 0.0)) throw ValidationError("stopping scale must be positive");
  return CylinderWalker(ifs, scale, budget, visit).run();
}

StoppingDecomposition stopping_decomposition(const SelfSimilarIFS& ifs, double scale,
                                             std::size_t budget) {
  if (!(scale > 0.0 && scale < 1.0))
    throw ValidationError("stopping scale must lie in (0, 1), got " + format_double(scale));
  StoppingDecomposition out;
  out.scale = scale;
  out.ratio_floor = ifs.min_ratio() * scale;
  const Vec& c = ifs.barycenter();
  for_each_cylinder(ifs, scale, budget, [&](const CylinderView& v) {
    CylinderWord w;
    w.letters.assign(v.letters.begin(), v.letters.end());
    w.ratio = v.ratio;
    w.orientation = v.orientation;
    w.translation = v.translation;
    w.weight = v.weight;
    w.anchor = v.ratio * (v.orientation * c) + v.translation;
    out.words.push_back(std::move(w));
  });
  return out;
}

bool is_homogeneous(const SelfSimilarIFS& ifs) {
  const Mat first = ifs.map(0).linear();
  for (std::size_t i = 1; i < ifs.size(); ++i)
    if (max_abs_diff(ifs.map(i).linear(), first) > 1e-12) return false;
  return true;
}

const char* to_string(ExpansionVerdict v) {
  switch (v) {
    case ExpansionVerdict::NonExpanding: return "NonExpanding";
    case ExpansionVerdict::Expanding: return "Expanding";
    case ExpansionVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

namespace {

// Set of matrices deduplicated at max-entry tolerance kDedupTol. Buckets are keyed
// by the quantised (0,0) entry; neighbouring buckets are searched as well.
class MatrixSet {
 public:
  bool insert(const Mat& m) {
    const long long key = std::llround(m(0, 0) / kBucket);
    for (long long b = key - 1; b <= key + 1; ++b) {
      const auto it = buckets_.find(b);
      if (it == buckets_.end()) continue;
      for (std::size_t idx : it->second)
        if (max_abs_diff(items_[idx], m) <= kDedupTol) return false;
    }
    buckets_[key].push_back(items_.size());
    items_.push_back(m);
    return true;
  }

  std::size_t size() const { return items_.size(); }

 private:
  static constexpr double kBucket = 1e-6;
  std::vector<Mat> items_;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

}  // namespace

ExpansionReport non_expanding_heuristic(const SelfSimilarIFS& ifs, int depth, std::size_t cap) {
  if (depth < 1) throw ValidationError("non-expanding heuristic needs depth >= 1");
  ExpansionReport report;
  const int k = ifs.ambient_dim();
  if (k <= 2) {
    report.verdict = ExpansionVerdict::NonExpanding;
    report.reason = "orthogonal groups in dimension <= 2 are virtually abelian";
    return report;
  }

  std::vector<Mat> gens;
  MatrixSet gen_set;
  for (const auto& m : ifs.maps())
    if (gen_set.insert(m.orientation)) gens.push_back(m.orientation);

  bool commuting = true;
  for (std::size_t i = 0; i < gens.size() && commuting; ++i)
    for (std::size_t j = i + 1; j < gens.size() && commuting; ++j)
      if (max_abs_diff(gens[i] * gens[j], gens[j] * gens[i]) > 1e-10) commuting = false;
  if (commuting) {
    report.verdict = ExpansionVerdict::NonExpanding;
    report.reason = "orientation parts commute";
    return report;
  }

  MatrixSet seen;
  std::vector<Mat> frontier;
  for (const auto& g : gens)
    if (seen.insert(g)) frontier.push_back(g);
  report.level_counts.push_back(frontier.size());
  bool capped = false;
  for (int level = 2; level <= depth && !frontier.empty() && !capped; ++level) {
    std::vector<Mat> next;
    for (const auto& a : frontier) {
      for (const auto& g : gens) {
        Mat prod = a * g;
        if (seen.insert(prod)) next.push_back(std::move(prod));
        if (seen.size() > cap) {
          capped = true;
          break;
        }
      }
      if (capped) break;
    }
    if (!capped) report.level_counts.push_back(next.size());
    frontier = std::move(next);
  }
  report.distinct_total = seen.size();

  if (!capped && report.level_counts.back() == 0) {
    report.verdict = ExpansionVerdict::NonExpanding;
    report.reason = "distinct orientation products stop growing (finite group)";
    return report;
  }

  // Exponential growth test: the newest levels beat polynomial growth of degree
  // dim SO(k) = k(k-1)/2 and keep growing geometrically.
  const auto& counts = report.level_counts;
  const std::size_t n = counts.size();
  if (n >= 4) {
    const double degree = 0.5 * k * (k - 1);
    bool geometric = true;
    for (std::size_t i = n - 3; i < n; ++i)
      if (static_cast<double>(counts[i]) < 1.5 * static_cast<double>(counts[i - 1])) geometric = false;
    const double poly = std::pow(static_cast<double>(n + 1), degree);
    if (geometric && static_cast<double>(counts[n - 1]) > poly) {
      report.verdict = ExpansionVerdict::Expanding;
      report.reason = "distinct products grow geometrically beyond polynomial rate";
      return report;
    }
  }
  report.verdict = ExpansionVerdict::Inconclusive;
  report.reason = capped ? "enumeration cap reached before growth pattern was clear"
                         : "growth neither stopped nor clearly exponential at this depth";
  return report;
}

const char* to_string(SeparationVerdict v) {
  switch (v) {
    case SeparationVerdict::SSC_ok: return "SSC_ok";
    case SeparationVerdict::no_overlap_detected: return "no_overlap_detected";
    case SeparationVerdict::overlaps_detected: return "overlaps_detected";
  }
  return "no_overlap_detected";
}

SeparationReport separation_diagnostic(const SelfSimilarIFS& ifs, int depth, std::size_t budget) {
  if (depth < 1) throw ValidationError("separation diagnostic needs depth >= 1");
  const double n_words = std::pow(static_cast<double>(ifs.size()), depth);
  if (n_words > static_cast<double>(budget)) throw ResourceExceeded("word", budget);

  SeparationReport report;
  report.depth = depth;
  const Ball& hull = ifs.support_hull();

  report.ssc_ok = true;
  for (std::size_t i = 0; i < ifs.size(); ++i)
    for (std::size_t j = i + 1; j < ifs.size(); ++j) {
      const double dist = (ifs.map(i).apply(hull.center) - ifs.map(j).apply(hull.center)).norm();
      if (!(dist > (ifs.map(i).ratio + ifs.map(j).ratio) * hull.radius)) report.ssc_ok = false;
    }

  struct Word {
    double ratio;
    Mat orientation;
    Vec translation;
    Vec anchor;
  };
  std::vector<Word> words;
  words.reserve(static_cast<std::size_t>(n_words));
  std::vector<int> idx(depth, 0);
  const int k = ifs.ambient_dim();
  while (true) {
    Word w{1.0, Mat::Identity(k, k), Vec::Zero(k), Vec()};
    for (int letter : idx) {
      const auto& m = ifs.map(letter);
      w.translation = w.ratio * (w.orientation * m.translation) + w.translation;
      w.orientation = w.orientation * m.orientation;
      w.ratio *= m.ratio;
    }
    w.anchor = w.ratio * (w.orientation * hull.center) + w.translation;
    words.push_back(std::move(w));
    int pos = depth - 1;
    while (pos >= 0 && ++idx[pos] == static_cast<int>(ifs.size())) idx[pos--] = 0;
    if (pos < 0) break;
  }

  // Equal (ratio, orientation) classes, then a sorted sweep on the first coordinate.
  std::vector<std::size_t> order(words.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::size_t> representative;
  for (std::size_t i : order) {
    bool placed = false;
    for (std::size_t c = 0; c < classes.size() && !placed; ++c) {
      const Word& r = words[representative[c]];
      if (std::abs(words[i].ratio - r.ratio) <= 1e-12 * r.ratio &&
          max_abs_diff(words[i].orientation, r.orientation) <= kOrthogonalityTol) {
        classes[c].push_back(i);
        placed = true;
      }
    }
    if (!placed) {
      classes.push_back({i});
      representative.push_back(i);
    }
  }
  double esc = std::numeric_limits<double>::infinity();
  for (auto& cls : classes) {
    std::sort(cls.begin(), cls.end(), [&](std::size_t a, std::size_t b) {
      return words[a].translation(0) < words[b].translation(0);
    });
    for (std::size_t a = 0; a < cls.size(); ++a)
      for (std::size_t b = a + 1; b < cls.size(); ++b) {
        const double dx = words[cls[b]].translation(0) - words[cls[a]].translation(0);
        if (dx >= esc) break;
        esc = std::min(esc, (words[cls[b]].translation - words[cls[a]].translation).norm());
      }
  }
  report.esc_distance = esc;

  if (k == 1) {
    std::vector<std::pair<double, double>> intervals;
    intervals.reserve(words.size());
    CompensatedSum total;
    for (const auto& w : words) {
      const double half = w.ratio * hull.radius;
      intervals.emplace_back(w.anchor(0) - half, w.anchor(0) + half);
      total += 2.0 * half;
    }
    std::sort(intervals.begin(), intervals.end());
    CompensatedSum covered;
    double lo = intervals.front().first, hi = intervals.front().second;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
      if (intervals[i].first > hi) {
        covered += hi - lo;
        lo = intervals[i].first;
        hi = intervals[i].second;
      } else {
        hi = std::max(hi, intervals[i].second);
      }
    }
    covered += hi - lo;
    report.overlap_measure = std::max(0.0, total.value() - covered.value());
  } else {
    double max_radius = 0.0;
    for (const auto& w : words) max_radius = std::max(max_radius, w.ratio * hull.radius);
    std::vector<std::size_t> by_x(words.size());
    std::iota(by_x.begin(), by_x.end(), 0);
    std::sort(by_x.begin(), by_x.end(),
              [&](std::size_t a, std::size_t b) { return words[a].anchor(0) < words[b].anchor(0); });
    double worst = 0.0;
    for (std::size_t a = 0; a < by_x.size(); ++a)
      for (std::size_t b = a + 1; b < by_x.size(); ++b) {
        const Word& u = words[by_x[a]];
        const Word& v = words[by_x[b]];
        if (v.anchor(0) - u.anchor(0) > 2.0 * max_radius) break;
        const double depth_in = (u.ratio + v.ratio) * hull.radius - (u.anchor - v.anchor).norm();
        worst = std::max(worst, depth_in);
      }
    report.overlap_measure = worst;
  }

  // Ball hulls overestimate the attractor in k > 1, so there the overlap measure is
  // reported but does not decide the verdict.
  const bool overlaps = esc < 1e-12 || (k == 1 && report.overlap_measure > 1e-12);
  if (overlaps)
    report.verdict = SeparationVerdict::overlaps_detected;
  else if (report.ssc_ok)
    report.verdict = SeparationVerdict::SSC_ok;
  else
    report.verdict = SeparationVerdict::no_overlap_detected;
  return report;
}

bool porosity_flag(const SelfSimilarIFS& ifs, Separation declared, double similarity_dim) {
  if (ifs.ambient_dim() != 1) throw Unsupported("porosity flag is only defined on the line");
  return implies_open_set(declared) && similarity_dim < 1.0;
}

std::vector<Vec> sample_measure(const SelfSimilarIFS& ifs, std::size_t n, std::uint64_t seed,
                                unsigned threads) {
  constexpr std::size_t kChunk = 4096;
  const int steps =
      std::max(1, static_cast<int>(std::ceil(std::log(1e-12) / std::log(ifs.max_ratio()))));
  std::vector<Vec> out(n);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const auto& cdf = ifs.weight_cdf();
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    Rng rng(seed, chunk);
    const std::size_t end = std::min(n, (chunk + 1) * kChunk);
    for (std::size_t s = chunk * kChunk; s < end; ++s) {
      Vec x = ifs.barycenter();
      for (int j = 0; j < steps; ++j) x = ifs.map(rng.discrete(cdf)).apply(x);
      out[s] = x;
    }
  });
  return out;
}

std::vector<Vec> word_fixed_points(const SelfSimilarIFS& ifs, int depth) {
  std::vector<Vec> out;
  const int k = ifs.ambient_dim();
  for (int len = 1; len <= depth; ++len) {
    std::vector<int> idx(len, 0);
    while (true) {
      SimilarityMap w{1.0, Mat::Identity(k, k), Vec::Zero(k)};
      for (int letter : idx) {
        const auto& m = ifs.map(letter);
        w.translation = w.ratio * (w.orientation * m.translation) + w.translation;
        w.orientation = w.orientation * m.orientation;
        w.ratio *= m.ratio;
      }
      out.push_back(fixed_point(w));
      int pos = len - 1;
      while (pos >= 0 && ++idx[pos] == static_cast<int>(ifs.size())) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return out;
}

}  // namespace ssf
