#include "ssf/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ssf {

namespace {

double get_number(const Json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw BadConfig(context + ": missing field '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw BadConfig(context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> number_array(const Json& j, const std::string& context) {
  if (!j.is_array()) throw BadConfig(context + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw BadConfig(context + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Vec vec_from(const Json& j, const std::string& context) {
  const auto v = number_array(j, context);
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
    throw BadConfig(context + ": length must be in [1, " + std::to_string(kMaxDim) + "]");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

/// Row-major flat array or array of rows.
Mat mat_from(const Json& j, int rows, int cols, const std::string& context) {
  if (!j.is_array()) throw BadConfig(context + " must be an array");
  std::vector<double> flat;
  if (!j.empty() && j.front().is_array()) {
    for (const auto& row : j) {
      const auto r = number_array(row, context);
      flat.insert(flat.end(), r.begin(), r.end());
    }
  } else {
    flat = number_array(j, context);
  }
  if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw BadConfig(context + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " entries, got " + std::to_string(flat.size()));
  }
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  return m;
}

std::map<double, double> keyed_table(const Json& j, const std::string& context) {
  if (!j.is_object()) throw BadConfig(context + " must be an object mapping numbers to values");
  std::map<double, double> out;
  for (const auto& [key, v] : j.items()) {
    double x;
    std::istringstream in(key);
    if (!(in >> x) || !in.eof()) throw BadConfig(context + ": key '" + key + "' is not a number");
    if (!v.is_number()) throw BadConfig(context + ": value for '" + key + "' must be a number");
    out[x] = v.get<double>();
  }
  return out;
}

Json exponent_json(const Exponent& e) {
  return Json{{"value", number(e.value)}, {"provenance", to_string(e.provenance)}};
}

std::string key_of(double x) { return format_double(x); }

Json string_array(const std::vector<std::string>& v) {
  Json out = Json::array();
  for (const auto& s : v) out.push_back(s);
  return out;
}

}  // namespace

Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw BadConfig(path.string() + ": " + e.what());
  }
}

void require_known_fields(const Json& obj, std::initializer_list<const char*> allowed,
                          const std::string& context) {
  if (!obj.is_object()) throw BadConfig(context + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw BadConfig(context + ": unknown field '" + key + "'");
  }
}

IfsDocument parse_ifs(const Json& j) {
  require_known_fields(j, {"name", "ambient_dim", "maps", "weights", "declared_separation", "exponents"},
                       "ifs");
  if (!j.contains("ambient_dim") || !j.at("ambient_dim").is_number_integer())
    throw BadConfig("ifs: 'ambient_dim' must be an integer");
  const int k = j.at("ambient_dim").get<int>();
  if (k < 1 || k > kMaxDim)
    throw ValidationError("ambient_dim must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!j.contains("maps") || !j.at("maps").is_array()) throw BadConfig("ifs: 'maps' must be an array");

  std::vector<SimilarityMap> maps;
  int index = 0;
  for (const auto& m : j.at("maps")) {
    const std::string ctx = "ifs.maps[" + std::to_string(index++) + "]";
    require_known_fields(m, {"ratio", "orientation", "translation"}, ctx);
    SimilarityMap map;
    map.ratio = get_number(m, "ratio", ctx);
    map.orientation = m.contains("orientation") ? mat_from(m.at("orientation"), k, k, ctx + ".orientation")
                                                : Mat(Mat::Identity(k, k));
    if (!m.contains("translation")) throw BadConfig(ctx + ": missing field 'translation'");
    map.translation = vec_from(m.at("translation"), ctx + ".translation");
    if (map.translation.size() != k) throw ValidationError(ctx + ": translation length differs from ambient_dim");
    maps.push_back(std::move(map));
  }
  if (!j.contains("weights")) throw BadConfig("ifs: missing field 'weights'");
  auto weights = number_array(j.at("weights"), "ifs.weights");

  IfsDocument doc{j.value("name", std::string()), SelfSimilarIFS(std::move(maps), std::move(weights)),
                  Separation::none, {}};
  if (j.contains("declared_separation")) {
    if (!j.at("declared_separation").is_string())
      throw BadConfig("ifs: 'declared_separation' must be a string");
    doc.declared = separation_from_string(j.at("declared_separation").get<std::string>());
  }
  if (j.contains("exponents")) {
    const Json& e = j.at("exponents");
    require_known_fields(e, {"kappa1", "kappa2", "kappa_star", "d_inf", "kappa_p", "d_q"}, "ifs.exponents");
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!e.contains(key)) return std::nullopt;
      return get_number(e, key, "ifs.exponents");
    };
    doc.overrides.kappa1 = opt("kappa1");
    doc.overrides.kappa2 = opt("kappa2");
    doc.overrides.kappa_star = opt("kappa_star");
    doc.overrides.d_inf = opt("d_inf");
    if (e.contains("kappa_p")) doc.overrides.kappa_p = keyed_table(e.at("kappa_p"), "ifs.exponents.kappa_p");
    if (e.contains("d_q")) doc.overrides.d_q = keyed_table(e.at("d_q"), "ifs.exponents.d_q");
  }
  return doc;
}

IfsDocument load_ifs(const std::filesystem::path& path) { return parse_ifs(read_json_file(path)); }

Json to_json(const SelfSimilarIFS& ifs, Separation declared) {
  Json maps = Json::array();
  for (const auto& m : ifs.maps()) {
    Json o = Json::array();
    for (int r = 0; r < m.orientation.rows(); ++r)
      for (int c = 0; c < m.orientation.cols(); ++c) o.push_back(m.orientation(r, c));
    Json t = Json::array();
    for (int i = 0; i < m.translation.size(); ++i) t.push_back(m.translation(i));
    maps.push_back(Json{{"ratio", m.ratio}, {"orientation", o}, {"translation", t}});
  }
  return Json{{"ambient_dim", ifs.ambient_dim()},
              {"maps", maps},
              {"weights", ifs.weights()},
              {"declared_separation", to_string(declared)}};
}

PushforwardMap parse_map(const Json& j, int k) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw BadConfig("map: an object with a string 'kind' is required");
  const std::string kind = j.at("kind").get<std::string>();
  const std::string ctx = "map(" + kind + ")";
  auto known = [&](std::initializer_list<const char*> extra) {
    std::vector<const char*> all{"kind", "lipschitz", "hessian"};
    all.insert(all.end(), extra.begin(), extra.end());
    for (const auto& [key, _] : j.items()) {
      bool ok = false;
      for (const char* a : all) ok = ok || key == a;
      if (!ok) throw BadConfig(ctx + ": unknown field '" + key + "'");
    }
  };
  auto need_line = [&] {
    if (k != 1) throw BadConfig(ctx + " acts on the line but the system has dimension " + std::to_string(k));
  };

  std::optional<PushforwardMap> map;
  if (kind == "identity") {
    known({});
    map = PushforwardMap::identity(k);
  } else if (kind == "square") {
    known({});
    need_line();
    map = PushforwardMap::square();
  } else if (kind == "polynomial") {
    known({"coefficients"});
    need_line();
    if (!j.contains("coefficients")) throw BadConfig(ctx + ": missing 'coefficients'");
    map = PushforwardMap::polynomial(number_array(j.at("coefficients"), ctx + ".coefficients"));
  } else if (kind == "power") {
    known({"n"});
    need_line();
    if (!j.contains("n") || !j.at("n").is_number_integer()) throw BadConfig(ctx + ": integer 'n' required");
    map = PushforwardMap::power(j.at("n").get<int>());
  } else if (kind == "log") {
    known({"shift", "sign"});
    need_line();
    const double shift = j.contains("shift") ? get_number(j, "shift", ctx) : 0.0;
    const int sign = j.contains("sign") ? static_cast<int>(get_number(j, "sign", ctx)) : 1;
    if (sign != 1 && sign != -1) throw BadConfig(ctx + ": sign must be 1 or -1");
    map = PushforwardMap::log_map(shift, sign);
  } else if (kind == "constant") {
    known({"value"});
    if (!j.contains("value")) throw BadConfig(ctx + ": missing 'value'");
    map = PushforwardMap::constant(vec_from(j.at("value"), ctx + ".value"), k);
  } else if (kind == "affine") {
    known({"matrix", "offset"});
    if (!j.contains("offset")) throw BadConfig(ctx + ": missing 'offset'");
    const Vec b = vec_from(j.at("offset"), ctx + ".offset");
    if (!j.contains("matrix")) throw BadConfig(ctx + ": missing 'matrix'");
    map = PushforwardMap::affine(mat_from(j.at("matrix"), static_cast<int>(b.size()), k, ctx + ".matrix"), b);
  } else if (kind == "quadratic") {
    known({"quadratic", "linear", "constant"});
    if (!j.contains("quadratic") || !j.at("quadratic").is_array() || j.at("quadratic").empty())
      throw BadConfig(ctx + ": 'quadratic' must be a non-empty array of k x k matrices");
    QuadraticCoefficients q;
    for (const auto& c : j.at("quadratic")) q.quadratic.push_back(mat_from(c, k, k, ctx + ".quadratic"));
    const int d = static_cast<int>(q.quadratic.size());
    if (j.contains("linear")) q.linear = mat_from(j.at("linear"), d, k, ctx + ".linear");
    if (j.contains("constant")) q.constant = vec_from(j.at("constant"), ctx + ".constant");
    map = PushforwardMap::quadratic(std::move(q));
  } else if (kind == "holomorphic") {
    known({"power"});
    if (k != 2) throw BadConfig(ctx + " needs a planar system");
    if (!j.contains("power") || !j.at("power").is_number_integer())
      throw BadConfig(ctx + ": integer 'power' required");
    map = PushforwardMap::holomorphic_power(j.at("power").get<int>());
  } else if (kind == "graph_lift") {
    known({"of"});
    if (!j.contains("of")) throw BadConfig(ctx + ": missing 'of'");
    map = PushforwardMap::graph_lift(parse_map(j.at("of"), k));
  } else if (kind == "custom") {
    throw BadConfig("map kind 'custom' needs code; describe the map as polynomial, quadratic, log or holomorphic");
  } else {
    throw BadConfig("unknown map kind '" + kind + "'");
  }
  if (j.contains("lipschitz") || j.contains("hessian")) {
    std::optional<double> lip, hess;
    if (j.contains("lipschitz")) lip = get_number(j, "lipschitz", ctx);
    if (j.contains("hessian")) hess = get_number(j, "hessian", ctx);
    return map->with_bounds(lip, hess);
  }
  return *map;
}

Json to_json(const DimensionProfile& pr) {
  Json j{{"k", pr.k},
         {"kappa2", exponent_json(pr.kappa2)},
         {"kappa_star", exponent_json(pr.kappa_star)},
         {"d_inf", exponent_json(pr.d_inf)},
         {"kappa1", pr.kappa1 ? exponent_json(*pr.kappa1) : Json(nullptr)}};
  Json kp = Json::object();
  for (const auto& [p, e] : pr.kappa_p) kp[key_of(p)] = exponent_json(e);
  Json dq = Json::object();
  for (const auto& [q, e] : pr.d_q) dq[key_of(q)] = exponent_json(e);
  j["kappa_p"] = kp;
  j["d_q"] = dq;
  j["s_sim_set"] = number(pr.s_sim_set);
  j["s_sim_meas"] = number(pr.s_sim_meas);
  j["ad_regular"] = pr.ad_regular;
  j["warnings"] = string_array(pr.warnings);
  return j;
}

Json to_json(const DecayBound& b) {
  Json table = Json::object();
  for (const auto& [p, s] : b.sigma_p_table) table[key_of(p)] = number(s);
  return Json{{"sigma", number(b.sigma)},
              {"best_p", number(b.best_p)},
              {"gamma", b.gamma ? number(*b.gamma) : Json(nullptr)},
              {"applicable", b.applicable},
              {"sigma_p", table},
              {"conjectural_ceiling", number(b.conjectural_ceiling)},
              {"formula", b.formula},
              {"notes", string_array(b.notes)}};
}

Json to_json(const ConditionVerdict& v) {
  return Json{{"holds", v.holds},     {"boundary", v.boundary}, {"lhs", number(v.lhs)},
              {"rhs", number(v.rhs)}, {"formula", v.formula},   {"notes", string_array(v.notes)}};
}

Json to_json(const ProductCriteriaVerdict& v) {
  return Json{{"holds", v.holds}, {"satisfied", v.satisfied}, {"notes", string_array(v.notes)}};
}

Json to_json(const Thresholds& t) {
  return Json{{"t2", number(t.t2)},
              {"t2_closed_form", "(sqrt(65) - 5) / 4"},
              {"t2_residual", number(t.residual2)},
              {"t3", number(t.t3)},
              {"t3_closed_form", "(sqrt(41) - 3) / 4"},
              {"t3_residual", number(t.residual3)}};
}

Json to_json(const SeparationReport& r) {
  return Json{{"verdict", to_string(r.verdict)},
              {"ssc_ok", r.ssc_ok},
              {"esc_distance", number(r.esc_distance)},
              {"overlap_measure", number(r.overlap_measure)},
              {"depth", r.depth},
              {"diagnostic_only", r.diagnostic_only}};
}

Json to_json(const ExpansionReport& r) {
  return Json{{"verdict", to_string(r.verdict)},
              {"level_counts", r.level_counts},
              {"distinct_total", r.distinct_total},
              {"reason", r.reason}};
}

void write_samples_csv(std::ostream& out, const std::vector<FrequencySample>& samples) {
  const Eigen::Index d = samples.empty() ? 1 : samples.front().xi.size();
  for (Eigen::Index i = 0; i < d; ++i) out << (d == 1 ? "xi" : "xi" + std::to_string(i + 1)) << ',';
  out << "re,im,abs,error_bound,leaves,scheme,certified\n";
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < s.xi.size(); ++i) out << format_double(s.xi(i)) << ',';
    out << format_double(s.value.real()) << ',' << format_double(s.value.imag()) << ','
        << format_double(std::abs(s.value)) << ',' << format_double(s.error_bound) << ','
        << s.leaves_used << ',' << to_string(s.scheme) << ',' << (s.certified ? "true" : "false") << '\n';
  }
}

void write_octaves_csv(std::ostream& out, const DecayExperiment& exp) {
  out << "octave,max_abs,q95,max_error_bound,tol_used,leaves,reliable\n";
  for (const auto& o : exp.octaves) {
    out << o.octave << ',' << format_double(o.max_abs) << ',' << format_double(o.q95) << ','
        << format_double(o.max_error) << ',' << format_double(o.tol_used) << ',' << o.leaves << ','
        << (o.reliable ? "true" : "false") << '\n';
  }
}

Json summary_json(const DecayExperiment& exp) {
  Json octaves = Json::array();
  for (const auto& o : exp.octaves) {
    octaves.push_back(Json{{"octave", o.octave},
                           {"max_abs", number(o.max_abs)},
                           {"q95", number(o.q95)},
                           {"max_error_bound", number(o.max_error)},
                           {"reliable", o.reliable}});
  }
  return Json{{"octave_lo", exp.config.octave_lo},
              {"octave_hi", exp.config.octave_hi},
              {"samples_per_octave", exp.config.samples_per_octave},
              {"seed", exp.config.seed},
              {"scheme", to_string(exp.config.scheme)},
              {"fitted_slope", number(exp.fitted_slope)},
              {"envelope_exponent", number(exp.envelope_exponent())},
              {"fit_residual", number(exp.fit_residual)},
              {"slope_stderr", number(exp.slope_stderr)},
              {"theoretical_sigma", exp.theoretical_sigma ? number(*exp.theoretical_sigma) : Json(nullptr)},
              {"octaves", octaves},
              {"warnings", string_array(exp.warnings)}};
}

void write_transform_csv(std::ostream& out, const ConvolutionExperiment& exp) {
  out << "frequency,re,im,abs,error_bound\n";
  for (std::size_t n = 0; n < exp.product.size(); ++n) {
    out << format_double(exp.frequencies[n]) << ',' << format_double(exp.product[n].real()) << ','
        << format_double(exp.product[n].imag()) << ',' << format_double(std::abs(exp.product[n])) << ','
        << format_double(exp.product_error[n]) << '\n';
  }
}

void write_density_csv(std::ostream& out, const ConvolutionExperiment& exp) {
  out << "z,x,density_z,density_x,error_z,error_x\n";
  for (std::size_t i = 0; i < exp.z.size(); ++i) {
    const double x = std::exp(exp.z[i]);
    out << format_double(exp.z[i]) << ',' << format_double(x) << ',' << format_double(exp.density[i]) << ','
        << format_double(exp.density[i] / x) << ',' << format_double(exp.density_error[i]) << ','
        << format_double(exp.density_error[i] / x) << '\n';
  }
}

Json summary_json(const ConvolutionExperiment& exp) {
  Json factors = Json::array();
  for (const auto& f : exp.factors) {
    factors.push_back(Json{{"shift", f.shift}, {"sign", f.sign}, {"ifs", to_json(f.ifs, Separation::none)}});
  }
  return Json{{"factors", factors},
              {"step", number(exp.step)},
              {"frequencies", exp.frequencies.size()},
              {"max_frequency", number(exp.frequencies.empty() ? 0.0 : exp.frequencies.back())},
              {"z_lo", number(exp.z_lo)},
              {"z_hi", number(exp.z_hi)},
              {"mass", number(exp.mass)},
              {"min_density", number(exp.min_density)},
              {"imag_residue", number(exp.imag_residue)},
              {"parseval_frequency", number(exp.parseval_frequency)},
              {"parseval_space", number(exp.parseval_space)},
              {"tail_estimate", number(exp.tail_estimate)},
              {"l1_octave_slope", number(exp.l1_slope)},
              {"l2_octave_slope", number(exp.l2_slope)},
              {"l1_octave_sums", exp.l1_octaves},
              {"l2_octave_sums", exp.l2_octaves},
              {"notes", string_array(exp.notes)}};
}

}  // namespace ssf
