#include "lightcone/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace lightcone {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

struct Validated {
    bool velocity_ok = false;
    bool radii_ok = false;
};

Validated validate(const ExperimentConfig& cfg, const Model& model) {
    require(cfg.p >= 1, "moment order p must be at least 1");
    require(cfg.time_samples >= 3, "time_samples must be at least 3");
    require(cfg.r >= 0, "inner radius r must be nonnegative");
    require(cfg.R > cfg.r, "outer radius R must exceed r");
    require(cfg.delta0 > 0, "delta0 must be positive");
    require(model.velocity > 0 && std::isfinite(model.velocity),
            "velocity must be positive (a relative velocity needs kappa > 0)");
    Validated v;
    v.velocity_ok = model.velocity > model.kappa;
    v.radii_ok = cfg.R - cfg.r > std::max(cfg.delta0 * cfg.r, 1.0);
    if (cfg.mode == RunMode::theorem) {
        if (!v.velocity_ok) {
            std::ostringstream os;
            os << "v = " << model.velocity << " does not exceed kappa = " << model.kappa
               << "; use exploratory mode to run anyway";
            throw HypothesisViolation(os.str());
        }
        require(v.radii_ok, "R - r must exceed max(delta0 r, 1)");
    }
    return v;
}

std::vector<double> states_expectation(const DiagonalOperator& A, const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& psi : traj.states) out.push_back(expectation(A, psi));
    return out;
}

Trajectory evolve_window(const ExperimentConfig& cfg, const Model& model, double window) {
    return evolve(model.H, model.psi0, window_grid(window, cfg.time_samples), cfg.tol, EvolveOptions{cfg.krylov_dim});
}

void running_sup(std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = std::max(v[k], v[k - 1]);
}

/// w(y) = sum_{x in X} |J_xy| |x - y|^(n+1)
std::vector<double> hopping_tail(const HoppingMatrix& J, const Region& X, int n) {
    std::vector<double> w(J.size(), 0.0);
    for (std::size_t y = 0; y < J.size(); ++y) {
        std::vector<double> addends;
        for (auto x : X.indices)
            if (x != y) addends.push_back(std::abs(J.entries(x, y)) * std::pow(J.lattice->distance(x, y), n + 1));
        std::sort(addends.begin(), addends.end());
        for (double a : addends) w[y] += a;
    }
    return w;
}

int default_rem_order(const Model& model, int p) {
    return derived_exponents(model.J, model.lattice->dim(), p).n;
}

}  // namespace

Lattice build_lattice(const LatticeConfig& cfg) {
    if (!cfg.sites.empty()) return Lattice(cfg.dim, cfg.sites, cfg.origin);
    Lattice box = build_box_lattice(cfg.dim, cfg.half_extent, cfg.spacing);
    if (cfg.origin.empty()) return box;
    Lattice shifted(cfg.dim, box.sites(), cfg.origin);
    shifted.half_extent = box.half_extent;
    shifted.spacing = box.spacing;
    return shifted;
}

HoppingMatrix build_hopping(const LatticePtr& lattice, const HoppingSpec& spec) {
    switch (spec.kind) {
        case HoppingKind::power_law:
            return build_power_law(lattice, spec.alpha, spec.c_j, spec.diagonal, spec.sign_pattern, spec.seed);
        case HoppingKind::zero: {
            const auto n = static_cast<Eigen::Index>(lattice->size());
            Eigen::MatrixXcd entries = Eigen::MatrixXcd::Zero(n, n);
            if (!spec.diagonal.empty()) {
                if (spec.diagonal.size() != lattice->size()) throw std::invalid_argument("diagonal has wrong length");
                for (Eigen::Index i = 0; i < n; ++i) entries(i, i) = spec.diagonal[static_cast<std::size_t>(i)];
            }
            return HoppingMatrix::from_entries(lattice, std::move(entries), spec.alpha);
        }
        case HoppingKind::explicit_entries:
            return HoppingMatrix::from_entries(lattice, spec.entries, spec.alpha);
    }
    throw std::invalid_argument("unknown hopping kind");
}

SizingReport size_experiment(const ExperimentConfig& cfg) {
    const Lattice lat = build_lattice(cfg.lattice);
    if (cfg.initial_occupation.size() != lat.size())
        throw std::invalid_argument("initial_occupation needs one entry per site (" + std::to_string(lat.size()) + ")");
    int total = 0;
    for (int m : cfg.initial_occupation) {
        if (m < 0) throw std::invalid_argument("occupations must be nonnegative");
        total += m;
    }
    return size_sector(lat.size(), total);
}

Model build_model(const ExperimentConfig& cfg, std::size_t cap) {
    Model m;
    m.lattice = std::make_shared<const Lattice>(build_lattice(cfg.lattice));
    if (cfg.initial_occupation.size() != m.lattice->size())
        throw std::invalid_argument("initial_occupation needs one entry per site (" +
                                    std::to_string(m.lattice->size()) + ")");
    for (int occ : cfg.initial_occupation) {
        if (occ < 0) throw std::invalid_argument("occupations must be nonnegative");
        m.total_n += occ;
        m.lambda = std::max(m.lambda, static_cast<double>(occ));
    }
    m.J = build_hopping(m.lattice, cfg.hopping);
    m.basis = enumerate_sector(m.lattice, m.total_n, cap);
    m.H = build_hamiltonian(m.basis, m.J, cfg.interaction);
    m.psi0 = mott_state(m.basis, cfg.initial_occupation);
    m.kappa = kappa(m.J);
    m.velocity = cfg.velocity_relative ? cfg.velocity * m.kappa : cfg.velocity;
    return m;
}

std::vector<double> window_grid(double window, int samples) {
    if (!(window > 0) || !std::isfinite(window)) throw PreconditionError("light-cone window must be positive and finite");
    if (samples < 2) throw PreconditionError("need at least two time samples");
    std::vector<double> g(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) g[static_cast<std::size_t>(k)] = window * k / samples;
    return g;
}

ConservationStats conservation_stats(const Model& model, const Trajectory& traj) {
    ConservationStats c;
    const std::vector<double> ones(model.lattice->size(), 1.0);
    const DiagonalOperator N = second_quantize(model.basis, ones);
    const double e0 = expectation(model.H, traj.states.front());
    for (const auto& psi : traj.states) {
        c.norm_drift = std::max(c.norm_drift, std::abs(psi.norm() - 1.0));
        c.number_drift = std::max(c.number_drift, std::abs(expectation(N, psi) - model.total_n));
        c.energy_drift = std::max(c.energy_drift, std::abs(expectation(model.H, psi) - e0));
    }
    c.h_norm_estimate = estimate_norm(model.H);
    return c;
}

std::vector<BoundReport> bound_reports(const ExperimentConfig& cfg, const Model& model, const Trajectory& traj,
                                       const std::vector<int>& p_list) {
    const Validated ok = validate(cfg, model);
    const Region Br = ball(*model.lattice, cfg.r);
    const Region BR = ball(*model.lattice, cfg.R);
    const DiagonalOperator NBr = region_number(model.basis, Br);
    const DiagonalOperator NBR = region_number(model.basis, BR);
    const StateVector& psi0 = traj.states.front();

    std::vector<BoundReport> out;
    for (int p : p_list) {
        if (p < 1) throw PreconditionError("moment order p must be at least 1");
        BoundReport rep;
        rep.p = p;
        rep.r = cfg.r;
        rep.R = cfg.R;
        rep.v = model.velocity;
        rep.kappa = model.kappa;
        rep.lambda = model.lambda;
        rep.total_n = model.total_n;
        rep.times = traj.times;
        rep.lhs_trace = states_expectation(NBr.pow(p), traj);
        rep.lhs = *std::max_element(rep.lhs_trace.begin(), rep.lhs_trace.end());
        rep.n_BR_p0 = expectation(NBR.pow(p), psi0);
        rep.n_BR_0 = expectation(NBR, psi0);
        rep.denominator = (rep.n_BR_0 + rep.n_BR_p0) / (cfg.R - cfg.r) + model.lambda + std::pow(model.lambda, p);
        rep.leakage = rep.lhs - rep.n_BR_p0;
        if (rep.leakage <= 0.0)
            rep.c_fit = 0.0;
        else if (rep.denominator > 0.0)
            rep.c_fit = rep.leakage / rep.denominator;
        else
            rep.c_fit = std::numeric_limits<double>::infinity();
        rep.window = (cfg.R - cfg.r) / model.velocity;
        rep.samples = static_cast<int>(traj.size());
        rep.tol = traj.tol;
        rep.error_estimate = traj.error_estimate;
        rep.exploratory = cfg.mode == RunMode::exploratory;
        rep.velocity_hypothesis = ok.velocity_ok;
        rep.radii_hypothesis = ok.radii_ok;
        rep.alpha_hypothesis = derived_exponents(model.J, model.lattice->dim(), p).hypothesis_holds;
        out.push_back(std::move(rep));
    }
    return out;
}

BoundReport run_lightcone(const ExperimentConfig& cfg) {
    const Model model = build_model(cfg);
    validate(cfg, model);
    const Trajectory traj = evolve_window(cfg, model, (cfg.R - cfg.r) / model.velocity);
    return bound_reports(cfg, model, traj, {cfg.p}).front();
}

std::vector<BoundReport> moment_sweep(const ExperimentConfig& cfg, const std::vector<int>& p_list) {
    const Model model = build_model(cfg);
    validate(cfg, model);
    const Trajectory traj = evolve_window(cfg, model, (cfg.R - cfg.r) / model.velocity);
    return bound_reports(cfg, model, traj, p_list);
}

std::vector<LeakageEntry> leakage_curve(const ExperimentConfig& cfg, const std::vector<double>& eta_list) {
    const Model model = build_model(cfg);
    validate(cfg, model);
    const DiagonalOperator NBr = region_number(model.basis, ball(*model.lattice, cfg.r));
    std::vector<LeakageEntry> out;
    for (double eta : eta_list) {
        require(eta > std::max(cfg.delta0 * cfg.r, 1.0) || cfg.mode == RunMode::exploratory,
                "window width eta must exceed max(delta0 r, 1)");
        require(eta > 0, "window width eta must be positive");
        const Region B = ball(*model.lattice, cfg.r + eta);
        const Trajectory traj = evolve_window(cfg, model, eta / model.velocity);
        LeakageEntry e;
        e.eta = eta;
        const auto trace = states_expectation(NBr, traj);
        e.lhs = *std::max_element(trace.begin(), trace.end());
        e.n_B0 = expectation(region_number(model.basis, B), model.psi0);
        e.leakage = e.lhs - e.n_B0;
        e.exceeds_lattice = B.size() == model.lattice->size();
        out.push_back(e);
    }
    return out;
}

RemainderTrace rem_trace(const Model& model, const Trajectory& traj, const AstloParams& params, int n, int p) {
    if (n < 1) throw PreconditionError("remainder order n must be at least 1");
    if (p < 1) throw PreconditionError("moment order p must be at least 1");
    RemainderTrace out;
    out.times = traj.times;
    out.n = n;
    out.p = p;

    const Region B = ball(*model.lattice, std::max(params.R - 0.5 * params.epsilon * params.s, 0.0));
    DiagonalOperator D = region_number(model.basis, B);
    const DiagonalOperator tail = second_quantize(model.basis, hopping_tail(model.J, B, n));
    for (std::size_t i = 0; i < D.values.size(); ++i) D.values[i] += tail.values[i];
    out.rem = states_expectation(D, traj);
    running_sup(out.rem);

    if (p > 1) {
        const Region BR = ball(*model.lattice, params.R);
        const DiagonalOperator NBR = region_number(model.basis, BR);
        const DiagonalOperator tail_R = second_quantize(model.basis, hopping_tail(model.J, BR, n));
        DiagonalOperator hat_op = NBR.pow(p);
        const DiagonalOperator weight = NBR.pow(p - 1) * tail_R;
        for (std::size_t i = 0; i < hat_op.values.size(); ++i) hat_op.values[i] += weight.values[i];
        out.hrem = states_expectation(hat_op, traj);
        running_sup(out.hrem);

        out.trem.reserve(traj.size());
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const DiagonalOperator shifted = astlo_operator(model.basis, params, traj.times[k]) + 1.0;
            DiagonalOperator sum{model.basis, std::vector<double>(D.values.size(), 0.0)};
            for (int q = 1; q <= p; ++q) {
                const DiagonalOperator term = shifted.pow(q - 1) * D;
                for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += term.values[i];
            }
            out.trem.push_back(expectation(sum, traj.states[k]));
        }
        running_sup(out.trem);
    }
    return out;
}

RemainderTrace rem_trace(const ExperimentConfig& cfg, const AstloParams& params, int n, int p) {
    const Model model = build_model(cfg);
    const Trajectory traj = evolve_window(cfg, model, params.s);
    return rem_trace(model, traj, params, n, p);
}

AstloTrace astlo_monotonicity_trace(const Model& model, const Trajectory& traj, const AstloParams& params) {
    if (!(params.v_prime > params.kappa)) throw PreconditionError("ASTLO trace requires v' > kappa");
    AstloTrace out;
    out.times = traj.times;
    out.s = params.s;
    out.n_f0s = expectation(astlo_operator(model.basis, params, 0.0), traj.states.front());
    std::vector<double> fprime(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        out.n_fts.push_back(expectation(astlo_operator(model.basis, params, t), traj.states[k]));
        out.excess.push_back(out.n_fts.back() - out.n_f0s);
        fprime[k] = expectation(astlo_fprime_operator(model.basis, params, t), traj.states[k]);
    }
    out.sup_excess = *std::max_element(out.excess.begin(), out.excess.end());
    for (std::size_t k = 1; k < traj.size(); ++k)
        out.fprime_integral += 0.5 * (traj.times[k] - traj.times[k - 1]) * (fprime[k] + fprime[k - 1]);
    return out;
}

AstloTrace astlo_monotonicity_trace(const ExperimentConfig& cfg, const AstloParams& params) {
    const Model model = build_model(cfg);
    const Trajectory traj = evolve_window(cfg, model, params.s);
    return astlo_monotonicity_trace(model, traj, params);
}

std::vector<AstloTrace> astlo_s_sweep(const ExperimentConfig& cfg, const std::vector<double>& s_multipliers) {
    const Model model = build_model(cfg);
    validate(cfg, model);
    const double s0 = (cfg.R - cfg.r) / model.velocity;
    std::vector<AstloTrace> out;
    for (double m : s_multipliers) {
        require(m > 0, "s multipliers must be positive");
        const double s = m * s0;
        const double r = cfg.R - model.velocity * s;
        require(r >= -radius_tolerance(cfg.R), "s multiplier too large: r = R - v s would be negative");
        const AstloParams params = make_astlo_params(cfg.R, std::max(r, 0.0), model.velocity, model.kappa);
        const Trajectory traj = evolve_window(cfg, model, params.s);
        out.push_back(astlo_monotonicity_trace(model, traj, params));
    }
    return out;
}

bool VerifyOutcome::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const AssertionResult& a) { return a.passed; });
}

VerifyOutcome verify_bounds(const ExperimentConfig& cfg) {
    const Model model = build_model(cfg);
    const Validated ok = validate(cfg, model);
    const double window = (cfg.R - cfg.r) / model.velocity;
    const Trajectory traj = evolve_window(cfg, model, window);

    VerifyOutcome out;
    out.dimension = model.basis->dimension();
    out.report = bound_reports(cfg, model, traj, {cfg.p}).front();
    if (!cfg.p_list.empty()) out.moments = bound_reports(cfg, model, traj, cfg.p_list);
    out.conservation = conservation_stats(model, traj);
    if (ok.velocity_ok) {
        const AstloParams params = make_astlo_params(cfg.R, cfg.r, model.velocity, model.kappa);
        const int n = default_rem_order(model, cfg.p);
        if (n >= 1) out.remainder = rem_trace(model, traj, params, n, cfg.p);
        out.astlo = astlo_monotonicity_trace(model, traj, params);
    }
    if (!cfg.eta_list.empty()) out.leakage = leakage_curve(cfg, cfg.eta_list);
    if (!cfg.s_multipliers.empty()) out.s_sweep = astlo_s_sweep(cfg, cfg.s_multipliers);

    auto add = [&](std::string name, bool passed, std::string detail) {
        out.assertions.push_back({std::move(name), passed, std::move(detail)});
    };
    auto num = [](double x) {
        std::ostringstream os;
        os.precision(6);
        os << x;
        return os.str();
    };
    const AssertionSpec& a = cfg.assertions;
    if (a.conservation) {
        const auto& c = out.conservation;
        const bool pass = c.norm_drift <= 10 * cfg.tol && c.number_drift <= 10 * cfg.tol * std::max(1, model.total_n) &&
                          c.energy_drift <= 10 * cfg.tol * std::max(c.h_norm_estimate, 1.0);
        add("conservation", pass,
            "norm drift " + num(c.norm_drift) + ", number drift " + num(c.number_drift) + ", energy drift " +
                num(c.energy_drift));
    }
    if (a.lhs_max) add("lhs_max", out.report.lhs <= *a.lhs_max, "lhs " + num(out.report.lhs) + " vs " + num(*a.lhs_max));
    if (a.c_fit_max)
        add("c_fit_max", out.report.c_fit <= *a.c_fit_max,
            "c_fit " + num(out.report.c_fit) + " vs " + num(*a.c_fit_max));
    if (a.leakage_nonincreasing) {
        auto entries = out.leakage;
        std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.eta < y.eta; });
        bool pass = !entries.empty();
        std::string detail;
        for (std::size_t k = 0; k < entries.size(); ++k) {
            if (k > 0 && entries[k].leakage > entries[k - 1].leakage) pass = false;
            detail += (k ? ", " : "") + num(entries[k].leakage);
        }
        add("leakage_nonincreasing", pass, entries.empty() ? "no eta_list given" : "leakage " + detail);
    }
    if (a.excess_nonincreasing_in_s) {
        std::vector<std::pair<double, double>> points;
        for (const auto& t : out.s_sweep) points.emplace_back(t.s, t.sup_excess);
        std::sort(points.begin(), points.end());
        bool pass = !points.empty();
        std::string detail;
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (k > 0 && points[k].second > points[k - 1].second + 1e-6) pass = false;
            detail += (k ? ", " : "") + num(points[k].second);
        }
        add("excess_nonincreasing_in_s", pass, points.empty() ? "no s_multipliers given" : "sup excess " + detail);
    }
    if (a.moment_ordering) {
        const BoundReport* first = nullptr;
        const BoundReport* second = nullptr;
        for (const auto& r : out.moments) {
            if (r.p == 1) first = &r;
            if (r.p == 2) second = &r;
        }
        bool pass = first && second;
        for (const auto& r : out.moments) pass = pass && std::isfinite(r.c_fit);
        if (pass)
            for (std::size_t k = 0; k < first->lhs_trace.size(); ++k) {
                const double bound = model.total_n * first->lhs_trace[k];
                if (second->lhs_trace[k] > bound + 1e-12 * std::max(1.0, bound)) pass = false;
            }
        add("moment_ordering", pass, pass ? "<N_Br^2>_t <= N <N_Br>_t at every sample" : "needs p_list with 1 and 2");
    }
    return out;
}

}  // namespace lightcone
