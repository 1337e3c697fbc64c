#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include <CLI11.hpp>

#include "lightcone/astlo.hpp"
#include "lightcone/config_io.hpp"
#include "lightcone/csv.hpp"
#include "lightcone/cutoff.hpp"
#include "lightcone/dynamics.hpp"
#include "lightcone/harness.hpp"
#include "lightcone/hopping.hpp"

namespace fs = std::filesystem;
using namespace lightcone;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Run {
    std::string subcommand;
    fs::path config_path;
    fs::path out_dir = "lightcone_out";
    bool dry_run = false;
    int verbosity = 0;

    std::map<std::string, std::string> artifacts;
    std::size_t peak_dimension = 0;
    std::uint64_t seed = 0;

    void note(const std::string& msg) const {
        if (verbosity > 0) std::cerr << "[lightcone] " << msg << "\n";
    }
    void track(std::size_t dim) { peak_dimension = std::max(peak_dimension, dim); }
};

std::string num(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

Json load_root(Run& run) {
    Json root = load_json_file(run.config_path);
    if (root.is_object() && root.contains("seed") && root["seed"].is_number_unsigned())
        run.seed = root["seed"].get<std::uint64_t>();
    return root;
}

LatticePtr lattice_of(const ExperimentConfig& cfg) {
    return std::make_shared<const Lattice>(build_lattice(cfg.lattice));
}

bool print_sizing(const ExperimentConfig& cfg) {
    if (cfg.initial_occupation.empty()) {
        std::cout << "no initial_occupation given; no Fock sector needed\n";
        return false;
    }
    const SizingReport s = size_experiment(cfg);
    std::cout << s.describe() << "\n";
    if (s.dimension > default_dimension_cap()) std::cout << "exceeds dimension cap " << default_dimension_cap() << "\n";
    return true;
}

int cmd_kappa(Run& run) {
    const Json root = load_root(run);
    const ExperimentConfig cfg = experiment_from_json(root);
    const LatticePtr lat = lattice_of(cfg);
    std::cout << "lattice: " << lat->size() << " sites, d = " << lat->dim() << "\n";
    if (run.dry_run) {
        print_sizing(cfg);
        return 0;
    }
    const HoppingMatrix J = build_hopping(lat, cfg.hopping);
    Json out;
    out["alpha"] = J.alpha;
    out["c_j"] = J.c_j;
    out["kappa"] = kappa(J);
    Json per_p = Json::array();
    for (int p : {1, 2}) {
        const KappaMoments km = derived_exponents(J, lat->dim(), p);
        per_p.push_back(to_json(km));
        std::cout << "p = " << p << ": n = " << km.n << ", gamma = " << num(km.gamma) << ", alpha > 2dp+1: "
                  << (km.hypothesis_holds ? "yes" : "NO (hypothesis violated)") << "\n";
        if (p == 1) {
            std::cout << "kappa = " << num(km.kappa()) << "\n";
            for (std::size_t nu = 1; nu < km.kappa_nu.size(); ++nu)
                std::cout << "kappa_" << nu << " = " << num(km.kappa_nu[nu]) << "\n";
        }
    }
    out["moments"] = per_p;
    run.artifacts["kappa.json"] = dump(out);
    std::ostringstream csv;
    write_hopping_csv(csv, J);
    run.artifacts["hopping.csv"] = csv.str();
    return 0;
}

int cmd_lattice_info(Run& run) {
    const Json root = load_root(run);
    const ExperimentConfig cfg = experiment_from_json(root);
    const LatticePtr lat = lattice_of(cfg);
    std::cout << "lattice: " << lat->size() << " sites, d = " << lat->dim() << "\n";
    if (run.dry_run) {
        print_sizing(cfg);
        return 0;
    }
    double extent = 0.0;
    for (std::size_t i = 0; i < lat->size(); ++i) extent = std::max(extent, lat->norm(i));
    std::vector<double> h_grid;
    for (int h = 1; h <= std::max(1, static_cast<int>(std::ceil(extent))); ++h) h_grid.push_back(h);
    const GrowthConstants g = measure_growth(*lat, h_grid);

    Json out;
    out["lattice"] = lattice_to_json(*lat);
    out["n_sites"] = lat->size();
    out["min_separation"] = lat->size() > 1 ? Json(lat->min_separation()) : Json(nullptr);
    out["growth"] = Json{{"V_d", g.V_d}, {"omega_dm1", g.omega_dm1}, {"h_grid", g.h_grid}};
    out["ball_r_size"] = ball(*lat, cfg.r).size();
    out["ball_R_size"] = ball(*lat, cfg.R).size();
    if (!cfg.initial_occupation.empty()) out["sector"] = to_json(size_experiment(cfg));
    std::cout << "min separation " << num(lat->size() > 1 ? lat->min_separation() : 0.0) << ", V_d = " << num(g.V_d)
              << ", omega_d-1 = " << num(g.omega_dm1) << "\n";
    run.artifacts["lattice.json"] = dump(out);
    return 0;
}

int cmd_simulate(Run& run) {
    const Json root = load_root(run);
    const ExperimentConfig cfg = experiment_from_json(root);
    if (run.dry_run) {
        print_sizing(cfg);
        return 0;
    }
    const Model model = build_model(cfg);
    run.track(model.basis->dimension());
    run.note("sector dimension " + std::to_string(model.basis->dimension()));
    double t_max = cfg.t_max;
    if (!(t_max > 0)) {
        if (!(model.velocity > 0)) throw PreconditionError("simulate needs t_max or a positive velocity");
        t_max = (cfg.R - cfg.r) / model.velocity;
    }
    if (cfg.time_samples < 2) throw PreconditionError("time_samples must be at least 2");
    std::vector<double> grid(static_cast<std::size_t>(cfg.time_samples));
    for (int k = 0; k < cfg.time_samples; ++k) grid[static_cast<std::size_t>(k)] = t_max * k / (cfg.time_samples - 1);
    const Trajectory traj = evolve(model.H, model.psi0, grid, cfg.tol, EvolveOptions{cfg.krylov_dim});

    std::vector<std::string> names{"N_total", "N_B_r", "N_B_R"};
    std::vector<DiagonalOperator> obs{second_quantize(model.basis, std::vector<double>(model.lattice->size(), 1.0)),
                                      region_number(model.basis, ball(*model.lattice, cfg.r)),
                                      region_number(model.basis, ball(*model.lattice, cfg.R))};
    for (std::size_t x = 0; x < model.lattice->size(); ++x) {
        names.push_back("n_" + std::to_string(x));
        obs.push_back(region_number(model.basis, Region::make(model.lattice->size(), {x})));
    }
    std::ostringstream csv;
    write_trajectory_csv(csv, traj, names, obs);
    run.artifacts["trajectory.csv"] = csv.str();

    const ConservationStats c = conservation_stats(model, traj);
    Json out;
    out["dimension"] = model.basis->dimension();
    out["kappa"] = model.kappa;
    out["t_max"] = t_max;
    out["samples"] = traj.size();
    out["tol"] = cfg.tol;
    out["error_estimate"] = traj.error_estimate;
    out["matvecs"] = traj.matvecs;
    out["conservation"] = to_json(c);
    run.artifacts["simulate.json"] = dump(out);
    if (cfg.dump_states) {
        fs::create_directories(run.out_dir);
        write_state_dump(run.out_dir / "states.bin", traj);
        run.artifacts["states.bin"] = std::string();  // already on disk
    }
    std::cout << "evolved " << traj.size() << " samples to t = " << num(t_max) << ", error estimate "
              << traj.error_estimate << ", norm drift " << c.norm_drift << "\n";
    return 0;
}

int cmd_verify(Run& run) {
    const Json root = load_root(run);
    const ExperimentConfig cfg = experiment_from_json(root);
    if (run.dry_run) {
        print_sizing(cfg);
        return 0;
    }
    const VerifyOutcome v = verify_bounds(cfg);
    run.track(v.dimension);
    run.artifacts["report.json"] = dump(to_json(v));

    std::ostringstream csv;
    CsvWriter w(csv);
    w.header({"t", "N_Br_p", "Rem", "N_f_ts"});
    const double nan = std::nan("");
    for (std::size_t k = 0; k < v.report.times.size(); ++k)
        w.row(v.report.times[k], v.report.lhs_trace[k], v.remainder ? v.remainder->rem[k] : nan,
              v.astlo ? v.astlo->n_fts[k] : nan);
    run.artifacts["bounds.csv"] = csv.str();

    std::cout << "lhs = " << num(v.report.lhs) << ", <N_BR^p>_0 = " << num(v.report.n_BR_p0)
              << ", c_fit = " << num(v.report.c_fit) << "\n";
    for (const auto& a : v.assertions)
        std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
    return v.passed() ? 0 : 1;
}

int cmd_astlo_check(Run& run) {
    const Json root = load_root(run);
    if (!root.is_object() || !root.contains("astlo")) throw ConfigError("astlo-check needs an 'astlo' section");
    std::optional<double> kappa_hint;
    if (root.contains("lattice") && root.contains("hopping")) {
        const ExperimentConfig cfg = experiment_from_json(root);
        kappa_hint = kappa(build_hopping(lattice_of(cfg), cfg.hopping));
    }
    const AstloCheckConfig ac = astlo_from_json(root["astlo"], kappa_hint ? &*kappa_hint : nullptr);
    const AstloParams params = make_astlo_params(ac.R, ac.r, ac.v, ac.kappa);
    std::vector<double> times = ac.t_values;
    for (double frac : ac.t_over_s) times.push_back(frac * params.s);
    for (double t : times)
        if (t > params.s || t < 0)
            throw PreconditionError("t = " + num(t) + " outside [0, s] with s = " + num(params.s));
    std::cout << "eps = " << num(params.epsilon) << ", v' = " << num(params.v_prime) << ", s = " << num(params.s)
              << "\n";
    if (run.dry_run) return 0;

    const CutoffFunction& f = *params.f;
    const double eps = params.epsilon;
    std::vector<AssertionResult> checks;
    auto check = [&](std::string name, bool ok, std::string detail) {
        checks.push_back({std::move(name), ok, std::move(detail)});
    };
    check("f(eps/2) = 0", f(0.5 * eps) == 0.0, num(f(0.5 * eps)));
    check("f(eps) = 1", f(eps) == 1.0, num(f(eps)));
    check("f(2 eps) = 1", f(2.0 * eps) == 1.0, num(f(2.0 * eps)));
    check("f(3 eps/4) = 1/2", std::abs(f(0.75 * eps) - 0.5) <= 1e-8, num(f(0.75 * eps)));
    bool monotone = true;
    double sqrt_defect = 0.0;
    for (std::size_t i = 0; i < f.grid().size(); ++i) {
        if (i > 0 && f.f_values()[i] < f.f_values()[i - 1]) monotone = false;
        sqrt_defect = std::max(sqrt_defect, std::abs(f.sqrt_fprime_values()[i] * f.sqrt_fprime_values()[i] -
                                                     f.fprime_values()[i]));
    }
    check("f monotone on grid", monotone, "");
    check("sqrt(f')^2 = f'", sqrt_defect <= 1e-12, num(sqrt_defect));

    Json brackets = Json::array();
    for (double t : times) {
        const BracketViolation b = bracketing_check(params, t);
        check("bracketing at t = " + num(t), b.worst() <= 1e-9, "upper " + num(b.upper) + ", lower " + num(b.lower));
        Json entry = to_json(b);
        entry["t"] = t;
        brackets.push_back(entry);
    }
    Json expansion = Json::array();
    double c_prev = 0.0;
    for (std::size_t k = 0; k < ac.expansion_points.size(); ++k) {
        const double c = expansion_check(f, uniform_grid(0.0, 2.0 * eps, ac.expansion_points[k]));
        expansion.push_back(Json{{"points", ac.expansion_points[k]}, {"c_fit", c}});
        check("expansion C_fit finite (" + std::to_string(ac.expansion_points[k]) + " points)", std::isfinite(c),
              num(c));
        if (k > 0)
            check("expansion C_fit refinement-stable", std::abs(c - c_prev) <= 0.1 * std::abs(c_prev),
                  num(c_prev) + " -> " + num(c));
        c_prev = c;
    }

    Json out;
    out["params"] = Json{{"R", params.R},         {"r", params.r}, {"v", params.v}, {"kappa", params.kappa},
                         {"v_prime", params.v_prime}, {"epsilon", eps}, {"s", params.s}};
    out["norm_constant"] = f.norm_constant();
    out["log_norm_constant"] = f.log_norm_constant();
    out["bracketing"] = brackets;
    out["expansion"] = expansion;
    Json arr = Json::array();
    bool all = true;
    for (const auto& c : checks) {
        arr.push_back(to_json(c));
        all = all && c.passed;
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    }
    out["checks"] = arr;
    out["passed"] = all;
    run.artifacts["astlo_report.json"] = dump(out);
    std::ostringstream csv;
    write_cutoff_csv(csv, f);
    run.artifacts["cutoff.csv"] = csv.str();
    return all ? 0 : 1;
}

/// Writes artifacts plus the manifest. A fresh output directory is staged
/// next to its final location and renamed into place.
void persist(const Run& run, int exit_code, const std::string& error, double seconds) {
    Json manifest;
    manifest["version"] = kVersion;
    manifest["subcommand"] = run.subcommand;
    manifest["config"] = run.config_path.string();
    manifest["output_dir"] = run.out_dir.string();
    manifest["seed"] = run.seed;
    manifest["dry_run"] = run.dry_run;
    manifest["exit_code"] = exit_code;
    if (!error.empty()) manifest["error"] = error;
    Json names = Json::array();
    for (const auto& [name, _] : run.artifacts) names.push_back(name);
    manifest["artifacts"] = names;
    manifest["telemetry"] = Json{{"wall_seconds", seconds}, {"peak_dimension", run.peak_dimension}};

    const fs::path out = run.out_dir;
    fs::path target = out;
    const bool fresh = !fs::exists(out);
    fs::path staging;
    if (fresh) {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        staging = out;
        staging += ".staging-" + std::to_string(::getpid());
        fs::create_directories(staging);
        target = staging;
    }
    for (const auto& [name, contents] : run.artifacts) {
        if (name == "states.bin") continue;
        write_file_atomic(target / name, contents);
    }
    write_file_atomic(target / "manifest.json", dump(manifest));
    if (fresh) {
        if (fs::exists(out)) {
            for (const auto& entry : fs::directory_iterator(staging)) fs::rename(entry.path(), out / entry.path().filename());
            fs::remove(staging);
        } else {
            fs::rename(staging, out);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Light-cone laboratory for long-range lattice bosons"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Run run;
    app.add_option("-o,--out", run.out_dir, "Output directory")->capture_default_str();
    app.add_flag("--dry-run", run.dry_run, "Print sector dimension and memory estimate, allocate nothing");
    app.add_flag("-v,--verbose", run.verbosity, "Verbose progress on stderr");

    std::map<std::string, int (*)(Run&)> handlers{{"kappa", cmd_kappa},
                                                  {"simulate", cmd_simulate},
                                                  {"verify-bounds", cmd_verify},
                                                  {"astlo-check", cmd_astlo_check},
                                                  {"lattice-info", cmd_lattice_info}};
    const std::map<std::string, std::string> help{
        {"kappa", "Hopping moments kappa_nu, n, gamma and hypothesis flags"},
        {"simulate", "Evolve the initial state and write observable trajectories"},
        {"verify-bounds", "Run the light-cone experiment and its assertion block"},
        {"astlo-check", "Cutoff function, bracketing and expansion checks"},
        {"lattice-info", "Lattice geometry, growth constants and sector sizing"}};
    for (const auto& [name, _] : handlers) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("config", run.config_path, "JSON config file")->required();
    }
    CLI11_PARSE(app, argc, argv);
    run.subcommand = app.get_subcommands().front()->get_name();

    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    std::string error;
    try {
        code = handlers.at(run.subcommand)(run);
    } catch (const ConfigError& e) {
        code = 1;
        error = e.what();
    } catch (const DimensionCapExceeded& e) {
        code = 2;
        error = e.what();
    } catch (const PropagationError& e) {
        code = 3;
        error = e.what();
    } catch (const std::invalid_argument& e) {
        code = 4;
        error = e.what();
    } catch (const std::exception& e) {
        code = 1;
        error = e.what();
    }
    if (!error.empty()) std::cerr << "lightcone " << run.subcommand << ": " << error << "\n";
    if (code != 0 && !error.empty()) run.artifacts.clear();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        persist(run, code, error, seconds);
    } catch (const std::exception& e) {
        std::cerr << "lightcone: failed to write outputs: " << e.what() << "\n";
        return code == 0 ? 1 : code;
    }
    return code;
}
