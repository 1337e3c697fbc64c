#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lightcone/fock_space.hpp"

namespace lightcone {

struct Trajectory {
    BasisPtr basis;
    std::vector<double> times;
    std::vector<StateVector> states;
    double tol = 0.0;
    double error_estimate = 0.0;  ///< accumulated a-posteriori bound, in 2-norm
    std::size_t matvecs = 0;

    std::size_t size() const { return times.size(); }
};

class PropagationError : public std::runtime_error {
public:
    PropagationError(const std::string& what, double achieved, double requested)
        : std::runtime_error(what), achieved(achieved), requested(requested) {}
    double achieved;
    double requested;
};

struct EvolveOptions {
    int krylov_dim = 30;
};

/// Snapshots of e^{-iHt} psi0 on `time_grid` (strictly increasing, starting at 0).
///
/// Short-iterative Lanczos with full reorthogonalization. Each substep is
/// accepted when the bound beta_m * int_0^tau |e_m^T exp(-isT_m) e_1| ds
/// stays within tol * tau / t_final, so the accumulated 2-norm error over the
/// whole grid is at most tol.
Trajectory evolve(const SparseOperator& H, const StateVector& psi0, const std::vector<double>& time_grid,
                  double tol = 1e-9, EvolveOptions options = {});

/// <psi, A psi>. Throws std::domain_error when the imaginary part exceeds
/// 1e-10 of |psi| |A psi|.
double expectation(const SparseOperator& A, const StateVector& psi);
/// sum_i |psi_i|^2 a_i with the addends accumulated in ascending magnitude.
double expectation(const DiagonalOperator& A, const StateVector& psi);

/// <N_X^p>, p >= 1.
double moment_expectation(const Region& region, int p, const StateVector& psi);

/// <i[H, A]> = -2 Im <H psi, A psi> for Hermitian H and A.
double commutator_expectation(const SparseOperator& H, const SparseMatrix& A, const StateVector& psi);
double commutator_expectation(const SparseOperator& H, const DiagonalOperator& A, const StateVector& psi);

struct HeisenbergResidual {
    double finite_difference = 0.0;  ///< central difference of <A>_t
    double generator = 0.0;          ///< <i[H,A] + dA/dt>_t
    double residual = 0.0;
    double dt = 0.0;  ///< larger of the two neighboring grid spacings
};

HeisenbergResidual heisenberg_check(const SparseOperator& H, const SparseOperator& A, const Trajectory& traj,
                                    std::size_t t_index);

using DiagonalFamily = std::function<DiagonalOperator(double)>;

/// Time-dependent diagonal A(t) with its analytic time derivative.
HeisenbergResidual heisenberg_check(const SparseOperator& H, const DiagonalFamily& A, const DiagonalFamily& dA_dt,
                                    const Trajectory& traj, std::size_t t_index);

/// Power-method estimate of ||H|| (a lower bound in exact arithmetic).
double estimate_norm(const SparseOperator& H, int iterations = 30);
/// max_i sum_j |H_ij|, an upper bound on ||H||.
double gershgorin_bound(const SparseOperator& H);

/// CSV with a t column followed by one column per named diagonal observable.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names,
                          const std::vector<DiagonalOperator>& observables);

/// Raw little-endian doubles: for each snapshot, t followed by (re, im) pairs.
void write_state_dump(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace lightcone
