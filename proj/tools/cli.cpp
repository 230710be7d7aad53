#include "cli.hpp"

#include "ssf/arith_lab.hpp"
#include "ssf/bounds.hpp"
#include "ssf/dimension.hpp"
#include "ssf/fourier.hpp"
#include "ssf/ifs.hpp"
#include "ssf/io.hpp"
#include "ssf/numerics.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace ssf::cli {

namespace {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

std::string fixed6(double x) {
  if (!std::isfinite(x)) return format_double(x);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw BadConfig("cannot write " + path.string());
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

double number_field(const Json& cfg, const char* key, double fallback, const std::string& ctx) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number()) throw BadConfig(ctx + ": '" + key + "' must be a number");
  return cfg.at(key).get<double>();
}

std::int64_t integer_field(const Json& cfg, const char* key, std::int64_t fallback, const std::string& ctx) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number_integer()) throw BadConfig(ctx + ": '" + key + "' must be an integer");
  return cfg.at(key).get<std::int64_t>();
}

std::uint64_t seed_field(const Json& cfg, const std::string& ctx) {
  const auto s = integer_field(cfg, "seed", 0, ctx);
  if (s < 0) throw BadConfig(ctx + ": 'seed' must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::string string_field(const Json& cfg, const char* key, const std::string& fallback, const std::string& ctx) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_string()) throw BadConfig(ctx + ": '" + key + "' must be a string");
  return cfg.at(key).get<std::string>();
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw BadConfig(std::string(name) + " must be positive and finite");
}

/// Output directory: --out wins over the config's output_dir; empty means stdout.
fs::path output_dir(const std::string& flag, const Json& cfg, const fs::path& base, const std::string& ctx) {
  if (!flag.empty()) return fs::path(flag);
  const auto dir = string_field(cfg, "output_dir", "", ctx);
  return dir.empty() ? fs::path() : resolve(base, dir);
}

struct Hypotheses {
  DecayHypotheses hyp;
  Json report = Json::object();
};

Hypotheses check_hypotheses(const SelfSimilarIFS& ifs, const std::optional<PushforwardMap>& map,
                            std::uint64_t seed) {
  Hypotheses h;
  const auto expansion = non_expanding_heuristic(ifs, 8, 1u << 16);
  h.report["orientations"] = to_json(expansion);
  if (expansion.verdict == ExpansionVerdict::NonExpanding) h.hyp.non_expanding = true;
  if (expansion.verdict == ExpansionVerdict::Expanding) h.hyp.non_expanding = false;
  if (map && map->out_dim() == 1 && map->in_dim() == ifs.ambient_dim()) {
    const auto curv = curvature_diagnostic(ifs, *map, 1000, seed);
    h.hyp.curvature_nonvanishing = !curv.vanishing;
    h.report["curvature"] = Json{{"map", map->name()},
                                 {"min_abs_hessian_det", number(curv.min_abs_hessian_det)},
                                 {"points_checked", curv.points_checked},
                                 {"vanishing", curv.vanishing}};
  }
  return h;
}

// ---------------------------------------------------------------- dims

struct DimsOptions {
  std::string ifs_path;
  std::string out;
  bool json = false;
  std::size_t pairs = 1'000'000;
  std::uint64_t seed = 0;
  int depth = 4;
};

int cmd_dims(const DimsOptions& o, const Io& io) {
  const auto doc = load_ifs(o.ifs_path);
  CorrelationConfig cc;
  cc.n_pairs = o.pairs;
  cc.seed = o.seed;
  const auto profile = build_profile(doc.ifs, doc.declared, doc.overrides, cc);
  const auto sep = separation_diagnostic(doc.ifs, o.depth);
  const auto expansion = non_expanding_heuristic(doc.ifs, 8, 1u << 16);

  Json report{{"name", doc.name},
              {"declared_separation", to_string(doc.declared)},
              {"profile", to_json(profile)},
              {"separation", to_json(sep)},
              {"orientations", to_json(expansion)}};
  if (doc.ifs.ambient_dim() == 1) report["porous"] = porosity_flag(doc.ifs, doc.declared, profile.s_sim_set);

  if (!o.out.empty()) write_text(fs::path(o.out) / "profile.json", dump(report));
  if (o.json) {
    io.out << dump(report);
    return kOk;
  }
  auto row = [&](const std::string& label, const std::string& value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-14s", label.c_str());
    io.out << buf << value << '\n';
  };
  auto exponent_row = [&](const std::string& label, const Exponent& e) {
    row(label, fixed6(e.value) + "  (" + to_string(e.provenance) + ")");
  };
  row("system", (doc.name.empty() ? o.ifs_path : doc.name) + "  (k = " + std::to_string(profile.k) + ", " +
                    std::to_string(doc.ifs.size()) + " maps)");
  row("declared", to_string(doc.declared));
  row("s", fixed6(profile.s_sim_set));
  row("s_measure", fixed6(profile.s_sim_meas));
  exponent_row("kappa2", profile.kappa2);
  exponent_row("kappa_star", profile.kappa_star);
  exponent_row("d_inf", profile.d_inf);
  if (profile.kappa1) exponent_row("kappa1", *profile.kappa1);
  else row("kappa1", "-  (not supplied)");
  for (const auto& [p, e] : profile.kappa_p) exponent_row("kappa_" + format_double(p), e);
  for (const auto& [q, e] : profile.d_q) exponent_row("d_" + format_double(q), e);
  row("ad_regular", profile.ad_regular ? "true" : "false");
  row("separation", std::string(to_string(sep.verdict)) + "  (depth " + std::to_string(sep.depth) +
                        ", diagnostic only)");
  row("orientations", to_string(expansion.verdict));
  if (report.contains("porous")) row("porous", report["porous"].get<bool>() ? "true" : "false");
  for (const auto& w : profile.warnings) io.err << "warning: " << w << '\n';
  return kOk;
}

// ---------------------------------------------------------------- bounds

struct BoundsOptions {
  std::string ifs_path;
  std::string map_path;
  std::string map_kind;
  std::vector<double> p_grid;
  bool thresholds = false;
  int vdc_l = 0;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_bounds(const BoundsOptions& o, const Io& io) {
  if (o.ifs_path.empty() && !o.thresholds)
    throw BadConfig("bounds needs an IFS file or --thresholds");
  Json report = Json::object();
  if (!o.ifs_path.empty()) {
    const auto doc = load_ifs(o.ifs_path);
    CorrelationConfig cc;
    cc.seed = o.seed;
    const auto profile = build_profile(doc.ifs, doc.declared, doc.overrides, cc);
    std::optional<PushforwardMap> map;
    if (!o.map_path.empty()) map = parse_map(read_json_file(o.map_path), doc.ifs.ambient_dim());
    if (!o.map_kind.empty()) map = parse_map(Json{{"kind", o.map_kind}}, doc.ifs.ambient_dim());
    const auto h = check_hypotheses(doc.ifs, map, o.seed);

    report["name"] = doc.name;
    report["profile"] = to_json(profile);
    report["hypotheses"] = h.report;
    const auto bound =
        o.p_grid.empty() ? decay_exponent_bound(profile, h.hyp) : decay_bound_table(profile, o.p_grid, h.hyp);
    report["bound"] = to_json(bound);
    Json baselines = Json::array();
    for (const auto& n : baseline_notes(doc.ifs)) baselines.push_back(n);
    report["baselines"] = baselines;
    if (o.vdc_l > 0) {
      report["holomorphic"] = Json{{"l", o.vdc_l},
                                   {"basic", number(vdc_exponent(profile, o.vdc_l, false))},
                                   {"refined", number(vdc_exponent(profile, o.vdc_l, true))}};
    }
    if (!bound.applicable) {
      for (const auto& n : bound.notes) io.err << "warning: " << n << '\n';
    }
  }
  if (o.thresholds) report["thresholds"] = to_json(symmetric_thresholds());
  if (!o.out.empty()) write_text(fs::path(o.out) / "bounds.json", dump(report));
  io.out << dump(report);
  return kOk;
}

// ---------------------------------------------------------------- fourier

struct ConfigOptions {
  std::string config;
  std::string out;
};

std::vector<Vec> frequency_list(const Json& freq, int dim, std::uint64_t seed, const std::string& ctx) {
  std::vector<Vec> xis;
  if (freq.is_array()) {
    for (const auto& v : freq) {
      if (v.is_number() && dim == 1) {
        xis.push_back(Vec::Constant(1, v.get<double>()));
      } else if (v.is_array()) {
        Vec x(dim);
        if (v.size() != static_cast<std::size_t>(dim)) throw BadConfig(ctx + ": frequency of wrong dimension");
        for (int i = 0; i < dim; ++i) {
          if (!v[static_cast<std::size_t>(i)].is_number()) throw BadConfig(ctx + ": frequencies must be numbers");
          x(i) = v[static_cast<std::size_t>(i)].get<double>();
        }
        xis.push_back(x);
      } else {
        throw BadConfig(ctx + ": frequencies must be numbers (k = 1) or arrays");
      }
    }
    return xis;
  }
  require_known_fields(freq, {"from", "to", "count", "spacing", "direction"}, ctx);
  const double from = number_field(freq, "from", 0.0, ctx);
  const double to = number_field(freq, "to", 0.0, ctx);
  const auto count = integer_field(freq, "count", 0, ctx);
  if (count < 1) throw BadConfig(ctx + ": 'count' must be at least 1");
  const auto spacing = string_field(freq, "spacing", "linear", ctx);
  Vec dir = Vec::Ones(dim);
  if (freq.contains("direction")) {
    const auto d = freq.at("direction");
    if (!d.is_array() || d.size() != static_cast<std::size_t>(dim))
      throw BadConfig(ctx + ": 'direction' must have the map's output dimension");
    for (int i = 0; i < dim; ++i) dir(i) = d[static_cast<std::size_t>(i)].get<double>();
  } else if (dim > 1) {
    throw BadConfig(ctx + ": 'direction' is required for vector-valued frequencies");
  }
  if (!(dir.norm() > 0.0)) throw BadConfig(ctx + ": direction must be non-zero");
  dir /= dir.norm();
  Rng rng(seed, 0);
  for (std::int64_t i = 0; i < count; ++i) {
    double t;
    if (spacing == "linear") {
      t = count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
    } else if (spacing == "random") {
      t = rng.uniform(from, to);
    } else if (spacing == "log") {
      if (!(from > 0.0 && to > 0.0)) throw BadConfig(ctx + ": log spacing needs positive bounds");
      const double u = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      t = from * std::pow(to / from, u);
    } else {
      throw BadConfig(ctx + ": spacing must be linear, random or log");
    }
    xis.push_back(t * dir);
  }
  return xis;
}

int cmd_fourier(const ConfigOptions& o, unsigned threads, const Io& io) {
  const fs::path cfg_path(o.config);
  const Json cfg = read_json_file(cfg_path);
  const std::string ctx = "fourier config";
  require_known_fields(cfg, {"ifs", "map", "scheme", "tol", "frequencies", "seed", "budget",
                             "homogeneous_fast_path", "estimate_bounds", "output_dir"},
                       ctx);
  const fs::path base = cfg_path.parent_path();
  if (!cfg.contains("ifs")) throw BadConfig(ctx + ": missing 'ifs'");
  const auto doc = load_ifs(resolve(base, string_field(cfg, "ifs", "", ctx)));
  const auto scheme = scheme_from_string(string_field(cfg, "scheme", "exact_recursion", ctx));
  const double tol = number_field(cfg, "tol", 1e-6, ctx);
  require_positive(tol, "tol");
  const auto seed = seed_field(cfg, ctx);

  std::optional<PushforwardMap> map;
  if (cfg.contains("map")) {
    if (scheme == Scheme::exact_recursion)
      throw BadConfig(ctx + ": exact_recursion transforms the measure itself; drop 'map' or pick order0/order1");
    map = parse_map(cfg.at("map"), doc.ifs.ambient_dim());
  } else if (scheme != Scheme::exact_recursion) {
    throw BadConfig(ctx + ": scheme " + to_string(scheme) + " needs a 'map'");
  }
  const int dim = map ? map->out_dim() : doc.ifs.ambient_dim();
  if (!cfg.contains("frequencies")) throw BadConfig(ctx + ": missing 'frequencies'");
  const auto xis = frequency_list(cfg.at("frequencies"), dim, seed, ctx + ".frequencies");

  PushforwardOptions options;
  const auto budget = integer_field(cfg, "budget", static_cast<std::int64_t>(default_leaf_budget()), ctx);
  if (budget < 1) throw BadConfig(ctx + ": 'budget' must be positive");
  options.budget = static_cast<std::size_t>(budget);
  if (cfg.contains("homogeneous_fast_path")) options.inner_fast_path = cfg.at("homogeneous_fast_path").get<bool>();
  else if (scheme == Scheme::exact_recursion) options.inner_fast_path = false;
  if (map && cfg.value("estimate_bounds", false)) options.bounds_override = estimate_bounds(*map, doc.ifs, 10'000, seed);

  const auto samples = evaluate_batch(doc.ifs, map ? &*map : nullptr, xis, scheme, tol, threads, options);
  std::ostringstream csv;
  write_samples_csv(csv, samples);
  const auto dir = output_dir(o.out, cfg, base, ctx);
  if (dir.empty()) {
    io.out << csv.str();
  } else {
    write_text(dir / "fourier.csv", csv.str());
    io.out << "wrote " << (dir / "fourier.csv").string() << " (" << samples.size() << " rows)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- decay

int cmd_decay(const ConfigOptions& o, unsigned threads, const Io& io) {
  const fs::path cfg_path(o.config);
  const Json cfg = read_json_file(cfg_path);
  const std::string ctx = "decay config";
  require_known_fields(cfg, {"ifs", "map", "octaves", "samples_per_octave", "seed", "tol", "scheme",
                             "max_retries", "budget", "output_dir"},
                       ctx);
  const fs::path base = cfg_path.parent_path();
  if (!cfg.contains("ifs") || !cfg.contains("map")) throw BadConfig(ctx + ": 'ifs' and 'map' are required");
  const auto doc = load_ifs(resolve(base, string_field(cfg, "ifs", "", ctx)));
  const auto map = parse_map(cfg.at("map"), doc.ifs.ambient_dim());

  DecayConfig dc;
  if (cfg.contains("octaves")) {
    const auto& oct = cfg.at("octaves");
    if (!oct.is_array() || oct.size() != 2 || !oct[0].is_number_integer() || !oct[1].is_number_integer())
      throw BadConfig(ctx + ": 'octaves' must be [first, last] integers");
    dc.octave_lo = oct[0].get<int>();
    dc.octave_hi = oct[1].get<int>();
  }
  if (dc.octave_lo < 0 || dc.octave_hi > 40 || dc.octave_hi < dc.octave_lo)
    throw BadConfig(ctx + ": octaves must satisfy 0 <= first <= last <= 40");
  const auto samples = integer_field(cfg, "samples_per_octave", 64, ctx);
  if (samples < 1 || samples > 100000) throw BadConfig(ctx + ": samples_per_octave must be in [1, 100000]");
  dc.samples_per_octave = static_cast<std::size_t>(samples);
  dc.seed = seed_field(cfg, ctx);
  dc.tol = number_field(cfg, "tol", dc.tol, ctx);
  require_positive(dc.tol, "tol");
  dc.scheme = scheme_from_string(string_field(cfg, "scheme", "order1", ctx));
  if (dc.scheme == Scheme::exact_recursion) throw BadConfig(ctx + ": decay experiments use order0 or order1");
  const auto retries = integer_field(cfg, "max_retries", dc.max_retries, ctx);
  if (retries < 0 || retries > 20) throw BadConfig(ctx + ": max_retries must be in [0, 20]");
  dc.max_retries = static_cast<int>(retries);
  const auto budget = integer_field(cfg, "budget", static_cast<std::int64_t>(dc.budget), ctx);
  if (budget < 1) throw BadConfig(ctx + ": 'budget' must be positive");
  dc.budget = static_cast<std::size_t>(budget);
  dc.threads = threads;

  std::optional<double> sigma;
  std::vector<std::string> notes;
  {
    const auto profile = build_profile(doc.ifs, doc.declared, doc.overrides, CorrelationConfig{.seed = dc.seed});
    const auto h = check_hypotheses(doc.ifs, map, dc.seed);
    const auto bound = decay_exponent_bound(profile, h.hyp);
    sigma = bound.sigma;
    notes = bound.notes;
  }
  auto exp = measure_decay_slope(doc.ifs, map, dc, sigma);
  exp.warnings.insert(exp.warnings.end(), notes.begin(), notes.end());

  std::ostringstream octaves, samples_csv;
  write_octaves_csv(octaves, exp);
  write_samples_csv(samples_csv, exp.samples);
  const Json summary = summary_json(exp);
  const auto dir = output_dir(o.out, cfg, base, ctx);
  if (!dir.empty()) {
    write_text(dir / "octaves.csv", octaves.str());
    write_text(dir / "samples.csv", samples_csv.str());
    write_text(dir / "summary.json", dump(summary));
  }
  io.out << dump(summary);
  return kOk;
}

// ---------------------------------------------------------------- convolve

int cmd_convolve(const ConfigOptions& o, unsigned threads, const Io& io) {
  const fs::path cfg_path(o.config);
  const Json cfg = read_json_file(cfg_path);
  const std::string ctx = "convolve config";
  require_known_fields(cfg, {"mode", "factors", "ifs_e", "ifs_f", "a", "b", "max_frequency", "step", "tol",
                             "inversion_points", "budget", "output_dir"},
                       ctx);
  const fs::path base = cfg_path.parent_path();
  ConvolutionGrid grid;
  grid.max_frequency = number_field(cfg, "max_frequency", grid.max_frequency, ctx);
  require_positive(grid.max_frequency, "max_frequency");
  grid.step = number_field(cfg, "step", 0.0, ctx);
  if (grid.step < 0.0) throw BadConfig(ctx + ": 'step' must be non-negative (0 = automatic)");
  grid.tol = number_field(cfg, "tol", grid.tol, ctx);
  require_positive(grid.tol, "tol");
  const auto points = integer_field(cfg, "inversion_points", 0, ctx);
  if (points < 0 || points > (1 << 24)) throw BadConfig(ctx + ": inversion_points must be in [0, 2^24]");
  grid.inversion_points = static_cast<std::size_t>(points);
  const auto budget = integer_field(cfg, "budget", static_cast<std::int64_t>(grid.budget), ctx);
  if (budget < 1) throw BadConfig(ctx + ": 'budget' must be positive");
  grid.budget = static_cast<std::size_t>(budget);
  grid.threads = threads;

  const auto mode = string_field(cfg, "mode", "product", ctx);
  ConvolutionExperiment exp;
  if (mode == "product") {
    if (!cfg.contains("factors") || !cfg.at("factors").is_array())
      throw BadConfig(ctx + ": 'factors' must be an array");
    std::vector<LogFactor> factors;
    for (const auto& f : cfg.at("factors")) {
      require_known_fields(f, {"ifs", "shift", "sign"}, ctx + ".factors[]");
      const auto doc = load_ifs(resolve(base, string_field(f, "ifs", "", ctx)));
      const auto sign = integer_field(f, "sign", 1, ctx);
      if (sign != 1 && sign != -1) throw BadConfig(ctx + ": factor sign must be 1 or -1");
      factors.push_back({doc.ifs, number_field(f, "shift", 0.0, ctx), static_cast<int>(sign)});
    }
    exp = multiplicative_convolution(factors, grid);
  } else if (mode == "radial") {
    const auto e = load_ifs(resolve(base, string_field(cfg, "ifs_e", "", ctx)));
    const auto f = load_ifs(resolve(base, string_field(cfg, "ifs_f", "", ctx)));
    exp = radial_projection_experiment(e.ifs, f.ifs, number_field(cfg, "a", 0.0, ctx),
                                       number_field(cfg, "b", 0.0, ctx), grid);
  } else {
    throw BadConfig(ctx + ": mode must be 'product' or 'radial'");
  }

  std::ostringstream transform, density;
  write_transform_csv(transform, exp);
  write_density_csv(density, exp);
  const Json summary = summary_json(exp);
  const auto dir = output_dir(o.out, cfg, base, ctx);
  if (!dir.empty()) {
    write_text(dir / "transform.csv", transform.str());
    write_text(dir / "density.csv", density.str());
    write_text(dir / "summary.json", dump(summary));
  }
  io.out << dump(summary);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const Io io{out, err};
  CLI::App app{"Fourier decay of self-similar measures and their smooth images"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
      ->check(CLI::Range(1u, 256u));
  app.footer(
      "Exit codes: 0 ok, 2 invalid input or configuration, 3 inconsistent profile,\n"
      "4 resource budget exceeded, 5 internal error.\n"
      "FRACTAL_FOURIER_BUDGET overrides the default leaf budget.");

  DimsOptions dims;
  auto* c_dims = app.add_subcommand("dims", "Dimension profile of an IFS file");
  c_dims->add_option("ifs", dims.ifs_path, "IFS description (JSON)")->required();
  c_dims->add_option("--out", dims.out, "Directory for profile.json");
  c_dims->add_flag("--json", dims.json, "Print the JSON report instead of the table");
  c_dims->add_option("--pairs", dims.pairs, "Sample pairs for the correlation estimate")
      ->check(CLI::Range(std::size_t{100}, std::size_t{100'000'000}));
  c_dims->add_option("--seed", dims.seed, "Seed for sampling");
  c_dims->add_option("--depth", dims.depth, "Depth of the separation diagnostic")->check(CLI::Range(1, 12));

  BoundsOptions bounds;
  auto* c_bounds = app.add_subcommand("bounds", "Decay exponent and related conditions");
  c_bounds->add_option("ifs", bounds.ifs_path, "IFS description (JSON)");
  c_bounds->add_option("--map", bounds.map_path, "Map description (JSON), checked for curvature");
  c_bounds->add_option("--map-kind", bounds.map_kind, "Parameter-free map kind, e.g. square");
  c_bounds->add_option("--p-grid", bounds.p_grid, "Values of p in [1, 2] to tabulate")->delimiter(',');
  c_bounds->add_flag("--thresholds", bounds.thresholds, "Report the two- and three-set thresholds");
  c_bounds->add_option("--vdc-l", bounds.vdc_l, "Derivative order for the holomorphic exponent (k = 2)")
      ->check(CLI::Range(2, 64));
  c_bounds->add_option("--out", bounds.out, "Directory for bounds.json");
  c_bounds->add_option("--seed", bounds.seed, "Seed for sampling");

  ConfigOptions fourier, decay, convolve;
  auto* c_fourier = app.add_subcommand("fourier", "Transform values with error bounds (CSV)");
  c_fourier->add_option("config", fourier.config, "Fourier config (JSON)")->required()->check(CLI::ExistingFile);
  c_fourier->add_option("--out", fourier.out, "Output directory (default: config output_dir or stdout)");
  auto* c_decay = app.add_subcommand("decay", "Empirical per-octave decay experiment");
  c_decay->add_option("config", decay.config, "Decay config (JSON)")->required()->check(CLI::ExistingFile);
  c_decay->add_option("--out", decay.out, "Output directory for octaves.csv, samples.csv, summary.json");
  auto* c_conv = app.add_subcommand("convolve", "Product / ratio densities from log-space transforms");
  c_conv->add_option("config", convolve.config, "Convolution config (JSON)")->required()->check(CLI::ExistingFile);
  c_conv->add_option("--out", convolve.out, "Output directory for transform.csv, density.csv, summary.json");

  auto* c_arith = app.add_subcommand("arith-check", "Closed-form dimension conditions");
  c_arith->require_subcommand(1);
  std::vector<double> args;
  bool ad_regular = false;
  int hd_k = 0;
  double hd_kappa = 0.0;
  auto* a_two = c_arith->add_subcommand("two-set", "ab + max(1.5a + b, 1.5b + a) > 2.5");
  a_two->add_option("dims", args, "dim E, dim F")->expected(2)->required();
  auto* a_three = c_arith->add_subcommand("three-set", "a/2 + b/2 + (c - 0.5)/(c + 1.5) > 1 for some ordering");
  a_three->add_option("dims", args, "dim E, dim F, dim G")->expected(3)->required();
  auto* a_prop = c_arith->add_subcommand("product", "Product-measure criteria for kappa2(mu), kappa2(nu)");
  a_prop->add_option("kappas", args, "kappa2(mu), kappa2(nu)")->expected(2)->required();
  a_prop->add_flag("--ad-regular", ad_regular, "nu is AD-regular");
  auto* a_log = c_arith->add_subcommand("log-sigma", "Decay exponent of a log pushforward");
  a_log->add_option("kappa2", args, "kappa2")->expected(1)->required();
  auto* a_high = c_arith->add_subcommand("high-dim", "kappa2 > 2 + k/2 for k >= 5");
  a_high->add_option("k", hd_k, "ambient dimension")->required();
  a_high->add_option("kappa2", hd_kappa, "kappa2")->required();
  c_arith->add_subcommand("thresholds", "Symmetric thresholds of the two- and three-set conditions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigInvalid;
  }
  set_default_threads(threads);

  try {
    if (c_dims->parsed()) return cmd_dims(dims, io);
    if (c_bounds->parsed()) return cmd_bounds(bounds, io);
    if (c_fourier->parsed()) return cmd_fourier(fourier, threads, io);
    if (c_decay->parsed()) return cmd_decay(decay, threads, io);
    if (c_conv->parsed()) return cmd_convolve(convolve, threads, io);
    if (c_arith->parsed()) {
      Json r;
      if (a_two->parsed()) r = to_json(two_set_condition(args[0], args[1]));
      else if (a_three->parsed()) r = to_json(three_set_condition(args[0], args[1], args[2]));
      else if (a_prop->parsed()) r = to_json(product_measure_conditions(args[0], args[1], ad_regular));
      else if (a_log->parsed()) r = Json{{"sigma", number(log_pushforward_sigma(args[0]))},
                                        {"formula", "(kappa2 - 1/2) / (2 + kappa2 - 1/2)"}};
      else if (a_high->parsed()) r = to_json(high_dim_condition(hd_k, hd_kappa));
      else r = to_json(symmetric_thresholds());
      out << dump(r);
      return kOk;
    }
  } catch (const InconsistentProfile& e) {
    err << "error: " << e.what() << '\n';
    return kInconsistentProfile;
  } catch (const ResourceExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kResourceExceeded;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const Json::exception& e) {
    err << "error: malformed configuration: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace ssf::cli
