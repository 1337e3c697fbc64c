#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightcone/astlo.hpp"
#include "lightcone/harness.hpp"

namespace lightcone {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses JSON text; syntax errors are reported with 1-based line and column.
Json parse_json_text(const std::string& text, const std::string& source = "<input>");
Json load_json_file(const std::filesystem::path& path);

LatticeConfig lattice_from_json(const Json& j);
Json lattice_to_json(const Lattice& lattice);
HoppingSpec hopping_from_json(const Json& j);
/// `n_sites` sizes the bose_hubbard shorthand.
InteractionSpec interaction_from_json(const Json& j, std::size_t n_sites);
ExperimentConfig experiment_from_json(const Json& root);

struct AstloCheckConfig {
    double R = 5.0;
    double r = 1.0;
    double v = 2.0;
    double kappa = 1.0;
    std::vector<double> t_values;       ///< absolute times
    std::vector<double> t_over_s;       ///< times as fractions of s
    std::vector<std::size_t> expansion_points{512, 1024};
};

/// `astlo` section: either {epsilon} (kappa = 0, v = 2 eps) or {v, kappa}, plus R, r and times.
/// A relative velocity needs `kappa_hint`, the kappa of the config's hopping.
AstloCheckConfig astlo_from_json(const Json& j, const double* kappa_hint = nullptr);

Json to_json(const SizingReport& s);
Json to_json(const KappaMoments& k);
Json to_json(const BoundReport& r, bool with_trace = false);
Json to_json(const LeakageEntry& e);
Json to_json(const RemainderTrace& t);
Json to_json(const AstloTrace& t, bool with_trace = false);
Json to_json(const ConservationStats& c);
Json to_json(const AssertionResult& a);
Json to_json(const VerifyOutcome& v);
Json to_json(const BracketViolation& b);

/// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

}  // namespace lightcone
