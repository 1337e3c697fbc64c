#include "lightcone/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace lightcone {

namespace {

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

std::vector<double> number_list(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

cplx complex_entry(const Json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2) return {number(j[0], where), number(j[1], where)};
    throw ConfigError(where + " must be a number or a [re, im] pair");
}

SignPattern sign_from(const std::string& s) {
    if (s == "positive") return SignPattern::positive;
    if (s == "alternating") return SignPattern::alternating;
    if (s == "random_phase") return SignPattern::random_phase;
    throw ConfigError("unknown sign_pattern '" + s + "'");
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << source << ":" << line << ":" << col << ": malformed JSON (" << e.what() << ")";
        throw ConfigError(os.str());
    }
}

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path.string());
}

LatticeConfig lattice_from_json(const Json& j) {
    allow_keys(j, "lattice", {"dim", "spacing", "half_extent", "sites", "origin"});
    LatticeConfig c;
    c.dim = get_or<int>(j, "dim", c.dim, "lattice");
    c.spacing = get_or<double>(j, "spacing", c.spacing, "lattice");
    c.half_extent = get_or<int>(j, "half_extent", c.half_extent, "lattice");
    if (j.contains("sites")) {
        if (!j["sites"].is_array()) throw ConfigError("lattice.sites must be an array of coordinate arrays");
        for (std::size_t i = 0; i < j["sites"].size(); ++i)
            c.sites.push_back(number_list(j["sites"][i], "lattice.sites[" + std::to_string(i) + "]"));
    }
    if (j.contains("origin")) c.origin = number_list(j["origin"], "lattice.origin");
    return c;
}

Json lattice_to_json(const Lattice& lattice) {
    Json j;
    j["dim"] = lattice.dim();
    if (lattice.spacing) j["spacing"] = *lattice.spacing;
    if (lattice.half_extent) j["half_extent"] = *lattice.half_extent;
    j["sites"] = lattice.sites();
    j["origin"] = lattice.origin();
    return j;
}

HoppingSpec hopping_from_json(const Json& j) {
    allow_keys(j, "hopping", {"kind", "alpha", "c_j", "sign_pattern", "seed", "diagonal", "entries"});
    HoppingSpec h;
    const std::string kind = get_or<std::string>(j, "kind", "power_law", "hopping");
    if (kind == "power_law")
        h.kind = HoppingKind::power_law;
    else if (kind == "zero")
        h.kind = HoppingKind::zero;
    else if (kind == "explicit")
        h.kind = HoppingKind::explicit_entries;
    else
        throw ConfigError("unknown hopping kind '" + kind + "'");
    h.alpha = get_or<double>(j, "alpha", h.alpha, "hopping");
    h.c_j = get_or<double>(j, "c_j", h.c_j, "hopping");
    h.sign_pattern = sign_from(get_or<std::string>(j, "sign_pattern", "positive", "hopping"));
    h.seed = get_or<std::uint64_t>(j, "seed", h.seed, "hopping");
    if (j.contains("diagonal")) h.diagonal = number_list(j["diagonal"], "hopping.diagonal");
    if (h.kind == HoppingKind::explicit_entries) {
        if (!j.contains("entries") || !j["entries"].is_array())
            throw ConfigError("explicit hopping needs an 'entries' matrix (array of rows)");
        const auto& rows = j["entries"];
        const auto n = static_cast<Eigen::Index>(rows.size());
        h.entries = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index x = 0; x < n; ++x) {
            const auto& row = rows[static_cast<std::size_t>(x)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
                throw ConfigError("hopping.entries must be a square matrix");
            for (Eigen::Index y = 0; y < n; ++y)
                h.entries(x, y) = complex_entry(row[static_cast<std::size_t>(y)],
                                                "hopping.entries[" + std::to_string(x) + "][" + std::to_string(y) + "]");
        }
    } else if (j.contains("entries")) {
        throw ConfigError("hopping.entries is only valid with kind 'explicit'");
    }
    return h;
}

InteractionSpec interaction_from_json(const Json& j, std::size_t n_sites) {
    if (!j.is_object()) throw ConfigError("interaction must be a JSON object");
    const std::string kind = get_or<std::string>(j, "kind", "none", "interaction");
    if (kind == "none") {
        allow_keys(j, "interaction", {"kind"});
        return NoInteraction{};
    }
    if (kind == "bose_hubbard") {
        allow_keys(j, "interaction", {"kind", "U"});
        return bose_hubbard(n_sites, get_or<double>(j, "U", 1.0, "interaction"));
    }
    if (kind == "onsite_polynomial") {
        allow_keys(j, "interaction", {"kind", "coeffs"});
        OnsitePolynomial p;
        if (!j.contains("coeffs") || !j["coeffs"].is_array()) throw ConfigError("onsite_polynomial needs 'coeffs'");
        for (std::size_t x = 0; x < j["coeffs"].size(); ++x)
            p.coeffs.push_back(number_list(j["coeffs"][x], "interaction.coeffs[" + std::to_string(x) + "]"));
        return p;
    }
    if (kind == "pair_density") {
        allow_keys(j, "interaction", {"kind", "U"});
        if (!j.contains("U") || !j["U"].is_array()) throw ConfigError("pair_density needs a 'U' matrix");
        const auto n = static_cast<Eigen::Index>(j["U"].size());
        PairDensity pd{Eigen::MatrixXd::Zero(n, n)};
        for (Eigen::Index x = 0; x < n; ++x) {
            const auto row = number_list(j["U"][static_cast<std::size_t>(x)], "interaction.U");
            if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("interaction.U must be square");
            for (Eigen::Index y = 0; y < n; ++y) pd.U(x, y) = row[static_cast<std::size_t>(y)];
        }
        return pd;
    }
    if (kind == "custom_diagonal") {
        allow_keys(j, "interaction", {"kind", "values"});
        if (!j.contains("values")) throw ConfigError("custom_diagonal needs 'values'");
        return CustomDiagonal{number_list(j["values"], "interaction.values")};
    }
    throw ConfigError("unknown interaction kind '" + kind + "'");
}

ExperimentConfig experiment_from_json(const Json& root) {
    allow_keys(root, "config",
               {"lattice", "hopping", "interaction", "initial_occupation", "experiment", "assertions", "seed", "astlo",
                "description"});
    ExperimentConfig c;
    if (!root.contains("lattice")) throw ConfigError("config needs a 'lattice' section");
    c.lattice = lattice_from_json(root["lattice"]);
    if (root.contains("hopping")) c.hopping = hopping_from_json(root["hopping"]);
    if (root.contains("seed") && !(root.contains("hopping") && root["hopping"].contains("seed")))
        c.hopping.seed = get_or<std::uint64_t>(root, "seed", 0, "config");
    if (root.contains("interaction"))
        c.interaction = interaction_from_json(root["interaction"], build_lattice(c.lattice).size());
    if (root.contains("initial_occupation")) {
        const Json& occ = root["initial_occupation"];
        // get<int> would silently truncate 1.5, so check each entry.
        if (!occ.is_array()) throw ConfigError("initial_occupation must be an array of integers");
        for (const auto& n : occ) {
            if (!n.is_number_integer()) throw ConfigError("initial_occupation must be an array of integers");
            c.initial_occupation.push_back(n.get<int>());
        }
    }
    if (root.contains("experiment")) {
        const Json& e = root["experiment"];
        allow_keys(e, "experiment",
                   {"r", "R", "velocity", "p", "delta0", "time_samples", "tol", "krylov_dim", "mode", "eta_list",
                    "p_list", "s_multipliers", "dump_states", "t_max"});
        c.r = get_or<double>(e, "r", c.r, "experiment");
        c.R = get_or<double>(e, "R", c.R, "experiment");
        if (e.contains("velocity")) {
            const Json& v = e["velocity"];
            allow_keys(v, "experiment.velocity", {"kappa_multiple", "absolute"});
            if (v.contains("kappa_multiple") == v.contains("absolute"))
                throw ConfigError("experiment.velocity needs exactly one of 'kappa_multiple' or 'absolute'");
            c.velocity_relative = v.contains("kappa_multiple");
            c.velocity = number(c.velocity_relative ? v["kappa_multiple"] : v["absolute"], "experiment.velocity");
        }
        c.p = get_or<int>(e, "p", c.p, "experiment");
        c.delta0 = get_or<double>(e, "delta0", c.delta0, "experiment");
        c.time_samples = get_or<int>(e, "time_samples", c.time_samples, "experiment");
        c.tol = get_or<double>(e, "tol", c.tol, "experiment");
        c.krylov_dim = get_or<int>(e, "krylov_dim", c.krylov_dim, "experiment");
        const std::string mode = get_or<std::string>(e, "mode", "theorem", "experiment");
        if (mode == "theorem")
            c.mode = RunMode::theorem;
        else if (mode == "exploratory")
            c.mode = RunMode::exploratory;
        else
            throw ConfigError("experiment.mode must be 'theorem' or 'exploratory'");
        if (e.contains("eta_list")) c.eta_list = number_list(e["eta_list"], "experiment.eta_list");
        if (e.contains("p_list")) c.p_list = get_or<std::vector<int>>(e, "p_list", {}, "experiment");
        if (e.contains("s_multipliers")) c.s_multipliers = number_list(e["s_multipliers"], "experiment.s_multipliers");
        c.dump_states = get_or<bool>(e, "dump_states", false, "experiment");
        c.t_max = get_or<double>(e, "t_max", 0.0, "experiment");
    }
    if (root.contains("assertions")) {
        const Json& a = root["assertions"];
        allow_keys(a, "assertions",
                   {"lhs_max", "c_fit_max", "leakage_nonincreasing", "excess_nonincreasing_in_s", "moment_ordering",
                    "conservation"});
        if (a.contains("lhs_max")) c.assertions.lhs_max = number(a["lhs_max"], "assertions.lhs_max");
        if (a.contains("c_fit_max")) c.assertions.c_fit_max = number(a["c_fit_max"], "assertions.c_fit_max");
        c.assertions.leakage_nonincreasing = get_or<bool>(a, "leakage_nonincreasing", false, "assertions");
        c.assertions.excess_nonincreasing_in_s = get_or<bool>(a, "excess_nonincreasing_in_s", false, "assertions");
        c.assertions.moment_ordering = get_or<bool>(a, "moment_ordering", false, "assertions");
        c.assertions.conservation = get_or<bool>(a, "conservation", true, "assertions");
    }
    return c;
}

AstloCheckConfig astlo_from_json(const Json& j, const double* kappa_hint) {
    allow_keys(j, "astlo", {"epsilon", "v", "kappa", "velocity", "R", "r", "t", "t_over_s", "expansion_points"});
    AstloCheckConfig c;
    c.R = get_or<double>(j, "R", c.R, "astlo");
    c.r = get_or<double>(j, "r", c.r, "astlo");
    if (j.contains("epsilon")) {
        if (j.contains("v") || j.contains("kappa") || j.contains("velocity"))
            throw ConfigError("astlo: give either epsilon or a (v, kappa) pair, not both");
        const double eps = number(j["epsilon"], "astlo.epsilon");
        c.kappa = 0.0;
        c.v = 2.0 * eps;
    } else if (j.contains("velocity")) {
        if (!kappa_hint) throw ConfigError("astlo.velocity needs a hopping section to compute kappa");
        c.kappa = get_or<double>(j, "kappa", *kappa_hint, "astlo");
        c.v = number(j["velocity"], "astlo.velocity") * c.kappa;
    } else {
        if (j.contains("kappa"))
            c.kappa = number(j["kappa"], "astlo.kappa");
        else if (kappa_hint)
            c.kappa = *kappa_hint;
        c.v = get_or<double>(j, "v", 2.0 * std::max(c.kappa, 0.5), "astlo");
    }
    if (j.contains("t")) c.t_values = number_list(j["t"], "astlo.t");
    if (j.contains("t_over_s")) c.t_over_s = number_list(j["t_over_s"], "astlo.t_over_s");
    if (c.t_values.empty() && c.t_over_s.empty()) c.t_over_s = {0.0, 0.5, 1.0};
    if (j.contains("expansion_points"))
        c.expansion_points = get_or<std::vector<std::size_t>>(j, "expansion_points", {}, "astlo");
    return c;
}

Json to_json(const SizingReport& s) {
    Json j;
    j["n_sites"] = s.n_sites;
    j["total_n"] = s.total_n;
    j["dimension"] = s.dimension;
    j["basis_bytes"] = s.basis_bytes;
    j["hamiltonian_bytes"] = s.hamiltonian_bytes;
    j["summary"] = s.describe();
    return j;
}

Json to_json(const KappaMoments& k) {
    Json j;
    j["p"] = k.p;
    j["kappa"] = k.kappa();
    j["kappa_nu"] = k.kappa_nu;
    j["n"] = k.n;
    j["gamma"] = k.gamma;
    j["moments_available"] = k.moments_available;
    j["hypothesis_holds"] = k.hypothesis_holds;
    return j;
}

Json to_json(const BoundReport& r, bool with_trace) {
    Json j;
    j["p"] = r.p;
    j["r"] = r.r;
    j["R"] = r.R;
    j["v"] = r.v;
    j["kappa"] = r.kappa;
    j["lambda"] = r.lambda;
    j["total_n"] = r.total_n;
    j["lhs"] = r.lhs;
    j["rhs_terms"] = Json{{"n_BR_p_0", r.n_BR_p0}, {"n_BR_0", r.n_BR_0}, {"lambda", r.lambda},
                          {"lambda_p", std::pow(r.lambda, r.p)}};
    j["denominator"] = r.denominator;
    j["c_fit"] = finite_or_null(r.c_fit);
    j["leakage"] = r.leakage;
    j["hypotheses"] = Json{{"v_gt_kappa", r.velocity_hypothesis},
                           {"alpha_gt_2dp_plus_1", r.alpha_hypothesis},
                           {"radii", r.radii_hypothesis}};
    j["exploratory"] = r.exploratory;
    j["grid"] = Json{{"window", r.window},
                     {"samples", r.samples},
                     {"tol", r.tol},
                     {"error_estimate", r.error_estimate}};
    if (with_trace) {
        j["times"] = r.times;
        j["lhs_trace"] = r.lhs_trace;
    }
    return j;
}

Json to_json(const LeakageEntry& e) {
    return Json{{"eta", e.eta}, {"lhs", e.lhs},           {"n_B_r_plus_eta_0", e.n_B0},
                {"leakage", e.leakage}, {"exceeds_lattice", e.exceeds_lattice}};
}

Json to_json(const RemainderTrace& t) {
    Json j;
    j["n"] = t.n;
    j["p"] = t.p;
    j["times"] = t.times;
    j["rem"] = t.rem;
    if (!t.trem.empty()) j["trem"] = t.trem;
    if (!t.hrem.empty()) j["hrem"] = t.hrem;
    return j;
}

Json to_json(const AstloTrace& t, bool with_trace) {
    Json j;
    j["s"] = t.s;
    j["n_f0s_0"] = t.n_f0s;
    j["sup_excess"] = t.sup_excess;
    j["fprime_integral"] = t.fprime_integral;
    if (with_trace) {
        j["times"] = t.times;
        j["n_fts"] = t.n_fts;
        j["excess"] = t.excess;
    }
    return j;
}

Json to_json(const ConservationStats& c) {
    return Json{{"norm_drift", c.norm_drift},
                {"number_drift", c.number_drift},
                {"energy_drift", c.energy_drift},
                {"h_norm_estimate", c.h_norm_estimate}};
}

Json to_json(const AssertionResult& a) { return Json{{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}}; }

Json to_json(const VerifyOutcome& v) {
    Json j;
    j["passed"] = v.passed();
    j["dimension"] = v.dimension;
    j["report"] = to_json(v.report, true);
    if (!v.moments.empty()) {
        Json arr = Json::array();
        for (const auto& r : v.moments) arr.push_back(to_json(r));
        j["moment_sweep"] = arr;
    }
    if (!v.leakage.empty()) {
        Json arr = Json::array();
        for (const auto& e : v.leakage) arr.push_back(to_json(e));
        j["leakage_curve"] = arr;
    }
    if (v.remainder) j["remainder"] = to_json(*v.remainder);
    if (v.astlo) j["astlo"] = to_json(*v.astlo, true);
    if (!v.s_sweep.empty()) {
        Json arr = Json::array();
        for (const auto& t : v.s_sweep) arr.push_back(to_json(t));
        j["s_sweep"] = arr;
    }
    j["conservation"] = to_json(v.conservation);
    Json arr = Json::array();
    for (const auto& a : v.assertions) arr.push_back(to_json(a));
    j["assertions"] = arr;
    return j;
}

Json to_json(const BracketViolation& b) { return Json{{"upper", b.upper}, {"lower", b.lower}}; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace lightcone
