#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsd/assumptions.hpp"
#include "qsd/coupling.hpp"
#include "qsd/coupling_constants.hpp"
#include "qsd/eigen.hpp"
#include "qsd/exhaustion.hpp"
#include "qsd/generator.hpp"
#include "qsd/models/bdc.hpp"
#include "qsd/models/diffusion.hpp"
#include "qsd/models/discretize.hpp"

namespace qsd::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json read_json(const std::filesystem::path& path);
// Sorted keys, two-space indent, shortest round-trip doubles, trailing newline.
void write_json(const std::filesystem::path& path, const Json& doc);

// {"states": S, "rates": [[i, j, q], ...], "kill": [...]}, 0-based.
Json to_json(const SubMarkovGenerator& gen);
SubMarkovGenerator generator_from_json(const Json& doc, const std::string& where = "generator");

Json to_json(const EigenPair& ep);
Json to_json(const AssumptionCertificate& cert);
AssumptionCertificate certificate_from_json(const Json& doc, const std::string& where = "certificate");
Json to_json(const CertificateSet& certs);
CertificateSet certificate_set_from_json(const Json& doc);
Json to_json(const CouplingConstants& consts);
CouplingConstants coupling_constants_from_json(const Json& doc);

// {"schema": 1, "prefix": [sizes]} or {"schema": 1, "sets": [[...], ...]}, plus "s", "c", "m".
Json to_json(const Exhaustion& exh);
Exhaustion exhaustion_from_json(const Json& doc, std::size_t n_states);

// {"kind": "constant", "value": v} | {"kind": "linear", "slope": a, "intercept": b}
// | {"kind": "table", "values": [...], "beyond": v}
RateFamily rate_family_from_json(const Json& doc, const std::string& where);

struct LoadedModel {
  std::string kind;  // generator | bdc | bdnu | diffusion
  std::optional<SubMarkovGenerator> gen;
  std::optional<BDNUParams> bdnu;
  std::optional<DiffusionSpec> diffusion;
  std::optional<DiffusionGrid> grid;
  std::optional<TransitoryDecomposition> regions;
  Json doc;
};

// Model config with a "schema" field, or a bare generator document.
LoadedModel load_model(const std::filesystem::path& path);
LoadedModel model_from_json(const Json& doc, const std::filesystem::path& base_dir);

// Parses "delta:k" (1-based state label), "uniform", "alpha" (needs ep) or a JSON array.
ProbabilityVector parse_measure(const std::string& text, std::size_t n_states, const EigenPair* ep = nullptr);

// Header row then one row per entry; doubles in shortest round-trip form.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string format_double(double x);

}  // namespace qsd::io
