#include "lightcone/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "lightcone/csv.hpp"

namespace lightcone {

namespace {

std::string sci(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

constexpr int kPanels = 16;

bool same_sector(const BasisPtr& a, const BasisPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->total_n() == b->total_n() && a->lattice()->same_sites(*b->lattice());
}

/// Lanczos data for one substep; everything is scaled to a unit start vector.
class KrylovStep {
public:
    explicit KrylovStep(std::size_t capacity) { basis_.reserve(capacity); }

    void reset(const Eigen::VectorXcd& v0) {
        basis_.clear();
        alpha_.clear();
        beta_.clear();
        basis_.push_back(v0);
        invariant_ = false;
    }

    /// Adds one Lanczos vector; returns false once the space is invariant.
    bool extend(const SparseMatrix& H, double breakdown) {
        const std::size_t j = basis_.size() - 1;
        Eigen::VectorXcd w = H * basis_[j];
        alpha_.push_back(basis_[j].dot(w).real());
        w -= alpha_[j] * basis_[j];
        if (j > 0) w -= beta_[j - 1] * basis_[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : basis_) w -= v.dot(w) * v;
        const double b = w.norm();
        beta_.push_back(b);
        if (b <= breakdown) {
            invariant_ = true;
            decompose();
            return false;
        }
        basis_.push_back(w / b);
        decompose();
        return true;
    }

    std::size_t dim() const { return alpha_.size(); }
    bool invariant() const { return invariant_; }

    /// exp(-i T s) e_1 in the Lanczos basis.
    Eigen::VectorXcd coefficients(double s) const {
        Eigen::VectorXcd phase(static_cast<Eigen::Index>(dim()));
        for (Eigen::Index k = 0; k < phase.size(); ++k)
            phase(k) = std::polar(q_(0, k), -lambda_(k) * s);
        return q_.cast<cplx>() * phase;
    }

    /// beta_m int_0^tau |e_m^T exp(-isT) e_1| ds
    double error_bound(double tau) const {
        if (invariant_ || tau <= 0.0) return 0.0;
        const Eigen::Index last = static_cast<Eigen::Index>(dim()) - 1;
        auto integrand = [&](double s) {
            cplx acc = 0.0;
            for (Eigen::Index k = 0; k <= last; ++k) acc += q_(last, k) * std::polar(q_(0, k), -lambda_(k) * s);
            return std::abs(acc);
        };
        double integral = 0.0;
        const double h = tau / kPanels;
        for (int p = 0; p < kPanels; ++p)
            integral += boost::math::quadrature::gauss<double, 10>::integrate(integrand, p * h, (p + 1) * h);
        return beta_.back() * integral;
    }

    Eigen::VectorXcd propagate(double tau) const {
        const Eigen::VectorXcd c = coefficients(tau);
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(basis_.front().size());
        for (std::size_t k = 0; k < dim(); ++k) out += c(static_cast<Eigen::Index>(k)) * basis_[k];
        return out;
    }

private:
    void decompose() {
        const auto m = static_cast<Eigen::Index>(dim());
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha_.data(), m);
        if (m == 1) {
            lambda_ = diag;
            q_ = Eigen::MatrixXd::Ones(1, 1);
            return;
        }
        Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta_.data(), m - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        lambda_ = es.eigenvalues();
        q_ = es.eigenvectors();
    }

    std::vector<Eigen::VectorXcd> basis_;
    std::vector<double> alpha_;
    std::vector<double> beta_;
    bool invariant_ = false;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd q_;
};

double central_difference(double fm, double f0, double fp, double h1, double h2) {
    return -h2 / (h1 * (h1 + h2)) * fm + (h2 - h1) / (h1 * h2) * f0 + h1 / (h2 * (h1 + h2)) * fp;
}

void require_interior(const Trajectory& traj, std::size_t t_index) {
    if (t_index == 0 || t_index + 1 >= traj.size())
        throw std::out_of_range("Heisenberg check needs an interior time index");
}

}  // namespace

Trajectory evolve(const SparseOperator& H, const StateVector& psi0, const std::vector<double>& time_grid, double tol,
                  EvolveOptions options) {
    if (!(tol >= 1e-12 && tol <= 1e-4)) throw std::invalid_argument("tolerance must lie in [1e-12, 1e-4]");
    if (options.krylov_dim < 2) throw std::invalid_argument("Krylov dimension must be at least 2");
    if (time_grid.empty() || time_grid.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    for (std::size_t k = 1; k < time_grid.size(); ++k)
        if (!(time_grid[k] > time_grid[k - 1])) throw std::invalid_argument("time grid must be strictly increasing");
    if (!same_sector(H.basis, psi0.basis) || H.matrix.rows() != psi0.amplitudes.size())
        throw std::invalid_argument("state and Hamiltonian live on different sectors");
    const double scale = H.max_abs();
    if (H.hermiticity_defect() > 1e-12 * scale) throw std::invalid_argument("Hamiltonian is not Hermitian");

    Trajectory traj;
    traj.basis = psi0.basis;
    traj.times = time_grid;
    traj.tol = tol;
    traj.states.reserve(time_grid.size());
    traj.states.push_back(psi0);

    const double t_final = time_grid.back();
    const double rate = t_final > 0.0 ? tol / t_final : 0.0;
    const double breakdown = 1e-13 * gershgorin_bound(H);
    const std::size_t m_max = std::min<std::size_t>(static_cast<std::size_t>(options.krylov_dim),
                                                    static_cast<std::size_t>(psi0.amplitudes.size()));

    KrylovStep krylov(m_max + 1);
    Eigen::VectorXcd cur = psi0.amplitudes;
    double t = 0.0;
    double tau_hint = t_final;

    for (std::size_t k = 1; k < time_grid.size(); ++k) {
        const double target = time_grid[k];
        while (t < target) {
            const double remaining = target - t;
            const double nrm = cur.norm();
            if (nrm == 0.0) {
                t = target;
                break;
            }
            krylov.reset(cur / nrm);
            double tau = std::min(remaining, tau_hint);
            while (krylov.dim() < m_max) {
                if (!krylov.extend(H.matrix, breakdown)) break;
                if (nrm * krylov.error_bound(tau) <= rate * tau) break;
            }
            traj.matvecs += krylov.dim();
            if (krylov.invariant()) tau = remaining;
            double bound = nrm * krylov.error_bound(tau);
            int shrinks = 0;
            while (bound > rate * tau) {
                const double m = static_cast<double>(krylov.dim());
                const double factor = 0.9 * std::pow(rate * tau / bound, 1.0 / std::max(m - 1.0, 1.0));
                tau *= std::clamp(factor, 0.05, 0.9);
                bound = nrm * krylov.error_bound(tau);
                if (++shrinks > 200 || tau < 1e-14 * std::max(t_final, 1.0))
                    throw PropagationError("Krylov step size underflow at t = " + sci(t) + " (step " + sci(tau) +
                                               ", requested tolerance " + sci(tol) + ")",
                                           traj.error_estimate + bound, tol);
            }
            cur = nrm * krylov.propagate(tau);
            traj.error_estimate += bound;
            tau_hint = shrinks > 0 ? 1.5 * tau : std::max(tau_hint, 2.0 * tau);
            if (tau >= remaining)
                t = target;
            else
                t += tau;
        }
        traj.states.push_back(StateVector{psi0.basis, cur});
    }
    if (traj.error_estimate > tol * (1.0 + 1e-9))
        throw PropagationError("accumulated propagation error " + sci(traj.error_estimate) +
                                   " exceeds tolerance " + sci(tol),
                               traj.error_estimate, tol);
    return traj;
}

double expectation(const SparseOperator& A, const StateVector& psi) {
    if (A.matrix.rows() != psi.amplitudes.size()) throw std::invalid_argument("operator and state sizes differ");
    const Eigen::VectorXcd a_psi = A.matrix * psi.amplitudes;
    const cplx value = psi.amplitudes.dot(a_psi);
    const double scale = psi.amplitudes.norm() * a_psi.norm();
    if (std::abs(value.imag()) > 1e-10 * scale)
        throw std::domain_error("expectation has a non-negligible imaginary part; operator is not Hermitian");
    return value.real();
}

double expectation(const DiagonalOperator& A, const StateVector& psi) {
    if (A.values.size() != static_cast<std::size_t>(psi.amplitudes.size()))
        throw std::invalid_argument("operator and state sizes differ");
    std::vector<double> terms(A.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = std::norm(psi.amplitudes(static_cast<Eigen::Index>(i))) * A.values[i];
    std::sort(terms.begin(), terms.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    double acc = 0.0;
    for (double x : terms) acc += x;
    return acc;
}

double moment_expectation(const Region& region, int p, const StateVector& psi) {
    if (p < 1) throw std::invalid_argument("moment order p must be at least 1");
    return expectation(region_number(psi.basis, region).pow(p), psi);
}

double commutator_expectation(const SparseOperator& H, const SparseMatrix& A, const StateVector& psi) {
    const Eigen::VectorXcd h_psi = H.matrix * psi.amplitudes;
    const Eigen::VectorXcd a_psi = A * psi.amplitudes;
    return -2.0 * h_psi.dot(a_psi).imag();
}

double commutator_expectation(const SparseOperator& H, const DiagonalOperator& A, const StateVector& psi) {
    const Eigen::VectorXcd h_psi = H.matrix * psi.amplitudes;
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < h_psi.size(); ++i)
        acc += std::conj(h_psi(i)) * A.values[static_cast<std::size_t>(i)] * psi.amplitudes(i);
    return -2.0 * acc.imag();
}

HeisenbergResidual heisenberg_check(const SparseOperator& H, const SparseOperator& A, const Trajectory& traj,
                                    std::size_t t_index) {
    require_interior(traj, t_index);
    const double h1 = traj.times[t_index] - traj.times[t_index - 1];
    const double h2 = traj.times[t_index + 1] - traj.times[t_index];
    HeisenbergResidual r;
    r.finite_difference = central_difference(expectation(A, traj.states[t_index - 1]),
                                             expectation(A, traj.states[t_index]),
                                             expectation(A, traj.states[t_index + 1]), h1, h2);
    r.generator = commutator_expectation(H, A.matrix, traj.states[t_index]);
    r.residual = std::abs(r.finite_difference - r.generator);
    r.dt = std::max(h1, h2);
    return r;
}

HeisenbergResidual heisenberg_check(const SparseOperator& H, const DiagonalFamily& A, const DiagonalFamily& dA_dt,
                                    const Trajectory& traj, std::size_t t_index) {
    require_interior(traj, t_index);
    const double t0 = traj.times[t_index];
    const double h1 = t0 - traj.times[t_index - 1];
    const double h2 = traj.times[t_index + 1] - t0;
    HeisenbergResidual r;
    r.finite_difference =
        central_difference(expectation(A(traj.times[t_index - 1]), traj.states[t_index - 1]),
                           expectation(A(t0), traj.states[t_index]),
                           expectation(A(traj.times[t_index + 1]), traj.states[t_index + 1]), h1, h2);
    r.generator = commutator_expectation(H, A(t0), traj.states[t_index]) + expectation(dA_dt(t0), traj.states[t_index]);
    r.residual = std::abs(r.finite_difference - r.generator);
    r.dt = std::max(h1, h2);
    return r;
}

double estimate_norm(const SparseOperator& H, int iterations) {
    const Eigen::Index n = H.matrix.rows();
    if (n == 0) return 0.0;
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(gauss(rng), gauss(rng));
    v.normalize();
    double estimate = 0.0;
    for (int k = 0; k < iterations; ++k) {
        Eigen::VectorXcd w = H.matrix * v;
        estimate = w.norm();
        if (estimate == 0.0) return 0.0;
        v = w / estimate;
    }
    return estimate;
}

double gershgorin_bound(const SparseOperator& H) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < H.matrix.outerSize(); ++k) {
        double row = 0.0;
        for (SparseMatrix::InnerIterator it(H.matrix, k); it; ++it) row += std::abs(it.value());
        best = std::max(best, row);
    }
    return best;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& names,
                          const std::vector<DiagonalOperator>& observables) {
    if (names.size() != observables.size()) throw std::invalid_argument("one name per observable");
    CsvWriter csv(os);
    std::vector<std::string> header{"t"};
    header.insert(header.end(), names.begin(), names.end());
    csv.header(header);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<double> row{traj.times[k]};
        for (const auto& obs : observables) row.push_back(expectation(obs, traj.states[k]));
        csv.row(row);
    }
}

void write_state_dump(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    auto put = [&](double x) {
        auto bits = std::bit_cast<std::uint64_t>(x);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(traj.times[k]);
        for (Eigen::Index i = 0; i < traj.states[k].amplitudes.size(); ++i) {
            put(traj.states[k].amplitudes(i).real());
            put(traj.states[k].amplitudes(i).imag());
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace lightcone
