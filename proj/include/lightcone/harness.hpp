#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lightcone/astlo.hpp"
#include "lightcone/dynamics.hpp"
#include "lightcone/fock_space.hpp"
#include "lightcone/hopping.hpp"
#include "lightcone/lattice.hpp"

namespace lightcone {

/// A config that violates a stated precondition (radii, velocity, time range).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// v <= kappa while the theorem check was requested.
class HypothesisViolation : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

struct LatticeConfig {
    int dim = 1;
    double spacing = 1.0 + 1e-9;
    int half_extent = 7;
    std::vector<Coord> sites;  ///< overrides the box when nonempty
    Coord origin;
};

enum class HoppingKind { power_law, zero, explicit_entries };

struct HoppingSpec {
    HoppingKind kind = HoppingKind::power_law;
    double alpha = 5.0;
    double c_j = 1.0;
    SignPattern sign_pattern = SignPattern::positive;
    std::uint64_t seed = 0;
    std::vector<double> diagonal;
    Eigen::MatrixXcd entries;  ///< explicit_entries only
};

enum class RunMode { theorem, exploratory };

struct AssertionSpec {
    std::optional<double> lhs_max;
    std::optional<double> c_fit_max;
    bool leakage_nonincreasing = false;
    bool excess_nonincreasing_in_s = false;
    bool moment_ordering = false;
    bool conservation = true;
};

struct ExperimentConfig {
    LatticeConfig lattice;
    HoppingSpec hopping;
    InteractionSpec interaction = NoInteraction{};
    std::vector<int> initial_occupation;
    double r = 1.0;
    double R = 5.0;
    double velocity = 2.0;
    bool velocity_relative = true;  ///< velocity is a multiple of kappa
    int p = 1;
    double delta0 = 0.5;
    int time_samples = 64;
    double tol = 1e-9;
    int krylov_dim = 30;
    RunMode mode = RunMode::theorem;
    std::vector<double> eta_list;
    std::vector<int> p_list;
    std::vector<double> s_multipliers;
    AssertionSpec assertions;
    bool dump_states = false;
    double t_max = 0.0;  ///< simulate only; 0 means the light-cone window
};

Lattice build_lattice(const LatticeConfig& cfg);
HoppingMatrix build_hopping(const LatticePtr& lattice, const HoppingSpec& spec);

struct Model {
    LatticePtr lattice;
    HoppingMatrix J;
    BasisPtr basis;
    SparseOperator H;
    StateVector psi0;
    double kappa = 0.0;
    double velocity = 0.0;  ///< absolute v
    double lambda = 0.0;    ///< max initial occupation
    int total_n = 0;
};

/// Sizing of the sector the config asks for, without allocating it.
SizingReport size_experiment(const ExperimentConfig& cfg);
Model build_model(const ExperimentConfig& cfg, std::size_t cap = default_dimension_cap());

/// t_k = k W / n for k = 0 .. n-1, a grid of [0, W).
std::vector<double> window_grid(double window, int samples);

struct ConservationStats {
    double norm_drift = 0.0;    ///< max |‖psi_t‖ - 1|
    double number_drift = 0.0;  ///< max |<N>_t - N|
    double energy_drift = 0.0;  ///< max |<H>_t - <H>_0|
    double h_norm_estimate = 0.0;
};

ConservationStats conservation_stats(const Model& model, const Trajectory& traj);

struct BoundReport {
    int p = 1;
    double r = 0.0, R = 0.0, v = 0.0, kappa = 0.0, lambda = 0.0;
    int total_n = 0;
    double lhs = 0.0;          ///< sup_{t < (R-r)/v} <N_{B_r}^p>_t
    double n_BR_p0 = 0.0;      ///< <N_{B_R}^p>_0
    double n_BR_0 = 0.0;       ///< <N_{B_R}>_0
    double denominator = 0.0;  ///< (R-r)^-1 (<N_{B_R}>_0 + <N_{B_R}^p>_0) + lambda + lambda^p
    double c_fit = 0.0;
    double leakage = 0.0;  ///< lhs - <N_{B_R}^p>_0
    double window = 0.0;
    int samples = 0;
    double tol = 0.0;
    double error_estimate = 0.0;
    bool exploratory = false;
    bool velocity_hypothesis = false;  ///< v > kappa
    bool alpha_hypothesis = false;     ///< alpha > 2dp + 1
    bool radii_hypothesis = false;     ///< R - r > max(delta0 r, 1)
    std::vector<double> times;
    std::vector<double> lhs_trace;  ///< <N_{B_r}^p>_t
};

/// Reports for several moment orders from one trajectory over [0, (R-r)/v).
std::vector<BoundReport> bound_reports(const ExperimentConfig& cfg, const Model& model, const Trajectory& traj,
                                       const std::vector<int>& p_list);

BoundReport run_lightcone(const ExperimentConfig& cfg);
std::vector<BoundReport> moment_sweep(const ExperimentConfig& cfg, const std::vector<int>& p_list);

struct LeakageEntry {
    double eta = 0.0;
    double lhs = 0.0;
    double n_B0 = 0.0;  ///< <N_{B_{r+eta}}>_0
    double leakage = 0.0;
    bool exceeds_lattice = false;  ///< B_{r+eta} already covers every site
};

std::vector<LeakageEntry> leakage_curve(const ExperimentConfig& cfg, const std::vector<double>& eta_list);

struct RemainderTrace {
    std::vector<double> times;
    std::vector<double> rem;
    std::vector<double> trem;  ///< empty unless p > 1
    std::vector<double> hrem;  ///< empty unless p > 1
    int n = 1;
    int p = 1;
};

/// Running-sup remainders on the trajectory's grid.
RemainderTrace rem_trace(const Model& model, const Trajectory& traj, const AstloParams& params, int n, int p = 1);
RemainderTrace rem_trace(const ExperimentConfig& cfg, const AstloParams& params, int n, int p = 1);

struct AstloTrace {
    std::vector<double> times;
    std::vector<double> n_fts;  ///< <N_{f,ts}>_t
    double n_f0s = 0.0;         ///< <N_{f,0s}>_0
    std::vector<double> excess;
    double sup_excess = 0.0;
    double fprime_integral = 0.0;  ///< trapezoid int_0^t <N_{f',tau s}>_tau over the grid
    double s = 0.0;
};

AstloTrace astlo_monotonicity_trace(const Model& model, const Trajectory& traj, const AstloParams& params);
/// Evolves over [0, s) with the config's sample count.
AstloTrace astlo_monotonicity_trace(const ExperimentConfig& cfg, const AstloParams& params);

/// For each multiplier m: s = m (R - r)/v at fixed R, i.e. r = R - v s.
std::vector<AstloTrace> astlo_s_sweep(const ExperimentConfig& cfg, const std::vector<double>& s_multipliers);

struct AssertionResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOutcome {
    BoundReport report;
    std::vector<BoundReport> moments;
    std::vector<LeakageEntry> leakage;
    std::optional<RemainderTrace> remainder;
    std::optional<AstloTrace> astlo;
    std::vector<AstloTrace> s_sweep;
    ConservationStats conservation;
    std::vector<AssertionResult> assertions;
    std::size_t dimension = 0;

    bool passed() const;
};

VerifyOutcome verify_bounds(const ExperimentConfig& cfg);

}  // namespace lightcone
