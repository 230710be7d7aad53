#pragma once

// JSON input documents (systems, maps) and JSON/CSV renderings of results.
// Every object rejects fields it does not know.

#include "ssf/arith_lab.hpp"
#include "ssf/bounds.hpp"
#include "ssf/dimension.hpp"
#include "ssf/fourier.hpp"
#include "ssf/ifs.hpp"
#include "ssf/pushforward.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace ssf {

using Json = nlohmann::ordered_json;

/// Parses a file as JSON; BadConfig on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);

/// Throws BadConfig naming the first field of `obj` outside `allowed`.
void require_known_fields(const Json& obj, std::initializer_list<const char*> allowed,
                          const std::string& context);

struct IfsDocument {
  std::string name;
  SelfSimilarIFS ifs;
  Separation declared = Separation::none;
  ProfileOverrides overrides;
};

/// {"name", "ambient_dim", "maps": [{"ratio", "orientation" (row-major), "translation"}],
///  "weights", "declared_separation", "exponents": {"kappa1", "kappa2", "kappa_star",
///  "d_inf", "kappa_p": {"p": value}, "d_q": {"q": value}}}
IfsDocument parse_ifs(const Json& j);
IfsDocument load_ifs(const std::filesystem::path& path);
Json to_json(const SelfSimilarIFS& ifs, Separation declared);

/// {"kind": "identity" | "square" | "polynomial" | "power" | "log" | "constant" | "affine" |
///  "quadratic" | "holomorphic" | "graph_lift", kind parameters, optional "lipschitz"/"hessian"}.
/// `k` is the dimension of the system the map acts on.
PushforwardMap parse_map(const Json& j, int k);

Json to_json(const DimensionProfile& profile);
Json to_json(const DecayBound& bound);
Json to_json(const ConditionVerdict& verdict);
Json to_json(const ProductCriteriaVerdict& verdict);
Json to_json(const Thresholds& thresholds);
Json to_json(const SeparationReport& report);
Json to_json(const ExpansionReport& report);

/// xi..., re, im, abs, error_bound, leaves, certified
void write_samples_csv(std::ostream& out, const std::vector<FrequencySample>& samples);
void write_octaves_csv(std::ostream& out, const DecayExperiment& exp);
Json summary_json(const DecayExperiment& exp);

/// frequency, re, im, abs, error_bound
void write_transform_csv(std::ostream& out, const ConvolutionExperiment& exp);
/// z, x = exp(z), density_z, density_x, error_z, error_x
void write_density_csv(std::ostream& out, const ConvolutionExperiment& exp);
Json summary_json(const ConvolutionExperiment& exp);

/// JSON number, or null when not finite.
Json number(double x);

}  // namespace ssf
