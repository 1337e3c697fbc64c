#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "lightcone/astlo.hpp"
#include "lightcone/cutoff.hpp"
#include "lightcone/dynamics.hpp"
#include "lightcone/harness.hpp"

using namespace lightcone;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

LatticePtr chain(std::size_t n) { return std::make_shared<const Lattice>(build_chain(n, 1.0 + 1e-9)); }

StateVector random_state(const BasisPtr& basis, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    StateVector psi{basis, Eigen::VectorXcd(basis->dimension())};
    for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i) psi.amplitudes(i) = cplx(g(rng), g(rng));
    psi.amplitudes.normalize();
    return psi;
}

/// 15-site chain, alpha = 5, particles at x = -6 and x = +6, r = 1, R = 5, v = 2 kappa.
ExperimentConfig chain15() {
    ExperimentConfig c;
    c.lattice.half_extent = 7;
    c.hopping.alpha = 5;
    c.hopping.c_j = 1;
    c.initial_occupation.assign(15, 0);
    c.initial_occupation[1] = 1;
    c.initial_occupation[13] = 1;
    c.r = 1;
    c.R = 5;
    c.velocity = 2;
    c.time_samples = 64;
    c.tol = 1e-9;
    return c;
}

ExperimentConfig end_particles(int h, double r, double R) {
    ExperimentConfig c = chain15();
    c.lattice.half_extent = h;
    c.initial_occupation.assign(2 * h + 1, 0);
    c.initial_occupation.front() = 1;
    c.initial_occupation.back() = 1;
    c.r = r;
    c.R = R;
    return c;
}

Outcome c1() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    auto lat = chain(4);
    auto basis = enumerate_sector(lat, 3);
    auto space = oracle::sector(4, 3);
    auto perm = oracle::to_library(space, *basis);
    double lib = 0, dense = 0;
    for (int k = 0; k < 100; ++k) {
        const Eigen::MatrixXcd J = oracle::random_hermitian(4, rng);
        const auto g = oracle::random_reals(4, rng);
        const double U = k % 2 ? oracle::random_reals(1, rng)[0] : 0.0;
        auto hop = HoppingMatrix::from_entries(lat, J, 3.0);
        lib = std::max(lib, check_hopping_commutator(basis, hop, g, bose_hubbard(4, U)).residual);

        std::vector<double> v(space.size());
        for (std::size_t j = 0; j < space.size(); ++j)
            for (int n : space.states[j]) v[j] += 0.5 * U * n * (n - 1);
        const Eigen::MatrixXcd H = oracle::hamiltonian(space, J, v);
        const Eigen::MatrixXcd G = oracle::second_quantize(space, g);
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(space.size(), space.size());
        for (std::size_t x = 0; x < 4; ++x)
            for (std::size_t y = 0; y < 4; ++y) rhs -= J(x, y) * (g[x] - g[y]) * oracle::hop(space, x, y);
        dense = std::max(dense, oracle::max_abs(H * G - G * H - rhs));

        const Eigen::MatrixXcd lib_h = oracle::dense(build_hamiltonian(basis, hop, bose_hubbard(4, U)).matrix);
        dense = std::max(dense, oracle::max_abs(lib_h - oracle::permute(H, perm)));
    }
    const double elapsed = seconds_since(start);
    return {lib <= 1e-10 && dense <= 1e-10 && elapsed < 5.0,
            fmt("commutator identity, library residual %.3g, dense residual %.3g, %.2f s", lib, dense, elapsed)};
}

Outcome c2() {
    std::mt19937_64 rng(1002);
    auto lat = chain(3);
    auto basis = enumerate_sector(lat, 2);
    double lib = 0;
    for (int q = 0; q <= 3; ++q)
        for (int draw = 0; draw < 5; ++draw) {
            const auto g = oracle::random_reals(3, rng, -2, 2);
            for (std::size_t x = 0; x < 3; ++x)
                for (std::size_t y = 0; y < 3; ++y)
                    lib = std::max(lib, check_ladder_relations(basis, g, q, x, y).residual);
        }

    // Truncated Fock space holding up to three particles; only columns whose
    // images stay inside the truncation are compared.
    auto space = oracle::truncated(3, 3);
    double dense = 0;
    for (int q = 0; q <= 3; ++q)
        for (int draw = 0; draw < 5; ++draw) {
            const auto g = oracle::random_reals(3, rng, -2, 2);
            const Eigen::MatrixXcd G = oracle::second_quantize(space, g);
            const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(space.size(), space.size());
            auto power = [&](const Eigen::MatrixXcd& A) {
                Eigen::MatrixXcd P = I;
                for (int k = 0; k < q; ++k) P *= A;
                return P;
            };
            for (std::size_t x = 0; x < 3; ++x) {
                const Eigen::MatrixXcd ax = oracle::create(space, x);
                const Eigen::MatrixXcd left = power(G) * ax;
                const Eigen::MatrixXcd right = ax * power(G + g[x] * I);
                for (std::size_t y = 0; y < 3; ++y) {
                    const Eigen::MatrixXcd ay = oracle::annihilate(space, y);
                    const Eigen::MatrixXcd lhs2 = power(G) * oracle::hop(space, x, y);
                    const Eigen::MatrixXcd rhs2 = ax * power(G + g[x] * I) * ay;
                    const Eigen::MatrixXcd lhs3 = ay * power(G);
                    const Eigen::MatrixXcd rhs3 = power(G + g[y] * I) * ay;
                    for (std::size_t j = 0; j < space.size(); ++j) {
                        int total = 0;
                        for (int n : space.states[j]) total += n;
                        if (total <= 2) {
                            dense = std::max(dense, (lhs2.col(j) - rhs2.col(j)).cwiseAbs().maxCoeff());
                            dense = std::max(dense, (lhs3.col(j) - rhs3.col(j)).cwiseAbs().maxCoeff());
                        }
                        if (total <= 1) dense = std::max(dense, (left.col(j) - right.col(j)).cwiseAbs().maxCoeff());
                    }
                }
            }
        }
    return {lib <= 1e-10 && dense <= 1e-10,
            fmt("ladder relations q=0..3, library residual %.3g, truncated-Fock residual %.3g", lib, dense)};
}

Outcome c3() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1003);
    auto lat = chain(6);
    auto basis = enumerate_sector(lat, 4);
    auto J = build_power_law(lat, 4.0, 1.0);
    auto H = build_hamiltonian(basis, J, bose_hubbard(6, 1.0));
    const double k = kappa(J);
    auto psi0 = random_state(basis, rng);
    const double T = 10.0 / k;
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(T * i / 200.0);
    auto traj = evolve(H, psi0, grid, 1e-10);

    const std::vector<double> ones(6, 1.0);
    auto N = second_quantize(basis, ones);
    const double h_norm = estimate_norm(H);
    const double e0 = expectation(H, psi0);
    double norm_drift = 0, number_drift = 0, energy_drift = 0;
    for (const auto& psi : traj.states) {
        norm_drift = std::max(norm_drift, std::abs(psi.norm() - 1.0));
        number_drift = std::max(number_drift, std::abs(expectation(N, psi) - 4.0));
        energy_drift = std::max(energy_drift, std::abs(expectation(H, psi) - e0));
    }
    const double elapsed = seconds_since(start);
    return {norm_drift <= 1e-8 && number_drift <= 1e-8 && energy_drift <= 1e-7 * h_norm && elapsed < 60.0,
            fmt("conservation over [0, 10/kappa], norm %.3g, number %.3g, energy %.3g (limit %.3g), %.2f s",
                norm_drift, number_drift, energy_drift, 1e-7 * h_norm, elapsed)};
}

Outcome c4() {
    const double Jv = 0.8;
    auto lat = chain(2);
    Eigen::MatrixXcd entries(2, 2);
    entries << 0, Jv, Jv, 0;
    auto J = HoppingMatrix::from_entries(lat, entries, 3.0);
    auto basis = enumerate_sector(lat, 1);
    auto H = build_hamiltonian(basis, J);
    const std::vector<int> occ{1, 0};
    auto psi0 = mott_state(basis, occ);
    const double period = M_PI / Jv;
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(period * i / 400.0);
    auto traj = evolve(H, psi0, grid, 1e-11);
    const std::vector<double> site0{1.0, 0.0};
    auto n0 = second_quantize(basis, site0);
    double worst = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double c = std::cos(Jv * traj.times[i]);
        worst = std::max(worst, std::abs(expectation(n0, traj.states[i]) - c * c));
    }
    return {worst <= 1e-8, fmt("two-site Rabi over one period, max deviation %.3g", worst)};
}

Outcome c5() {
    std::mt19937_64 rng(1005);
    auto lat = chain(8);
    auto basis = enumerate_sector(lat, 3);
    auto J = build_power_law(lat, 3.0, 1.0, {}, SignPattern::random_phase, 7);
    auto H = build_hamiltonian(basis, J, bose_hubbard(8, 0.7));
    auto psi0 = random_state(basis, rng);
    const double T = 10.0 / kappa(J);
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i) grid.push_back(T * i / 15.0);
    auto traj = evolve(H, psi0, grid, 1e-10);

    auto space = oracle::sector(8, 3);
    auto perm = oracle::to_library(space, *basis);
    std::vector<double> v(space.size());
    for (std::size_t j = 0; j < space.size(); ++j)
        for (int n : space.states[j]) v[j] += 0.35 * n * (n - 1);
    const Eigen::MatrixXcd Hd = oracle::permute(oracle::hamiltonian(space, J.entries, v), perm);
    oracle::EigenPropagator exact(Hd);
    double worst = 0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        worst = std::max(worst, (traj.states[i].amplitudes - exact(psi0.amplitudes, traj.times[i])).norm());
    return {basis->dimension() <= 200 && traj.size() == 16 && worst <= 1e-8,
            fmt("dimension %zu, 16 times, max state difference %.3g", basis->dimension(), worst)};
}

Outcome c6() {
    bool ok = true;
    double mid = 0, sq = 0;
    for (double eps : {0.05, 0.5, 1.0, 3.0}) {
        CutoffFunction f(eps);
        const auto& grid = f.grid();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] <= eps / 2 && f(grid[i]) != 0.0) ok = false;
            if (grid[i] >= eps && f(grid[i]) != 1.0) ok = false;
        }
        double prev = f(0.0);
        for (int i = 0; i <= 100000; ++i) {
            const double mu = 1.2 * eps * i / 100000.0;
            const double val = f(mu);
            if (val < prev) ok = false;
            prev = val;
            const double u = f.sqrt_derivative(mu);
            sq = std::max(sq, std::abs(u * u - f.derivative(mu)));
        }
        mid = std::max(mid, std::abs(f(0.75 * eps) - 0.5));
    }
    return {ok && mid <= 1e-8 && sq <= 1e-12,
            fmt("cutoff support/monotone %s, |f(3eps/4)-1/2| %.3g, sqrt residual %.3g", ok ? "ok" : "violated", mid,
                sq)};
}

Outcome c7() {
    std::mt19937_64 rng(1007);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
        const double kap = 0.1 + 3 * u(rng);
        // (kappa, 4 kappa], excluding the open endpoint
        const double v = kap * (4 - 3 * u(rng));
        const double r = 5 * u(rng), R = r + 0.2 + 5 * u(rng);
        auto p = make_astlo_params(R, r, v, kap);
        worst = std::max(worst, bracketing_check(p, p.s * u(rng)).worst());
    }
    return {worst <= 1e-9, fmt("50 random bracketing draws, worst violation %.3g", worst)};
}

Outcome c8() {
    const double eps = 0.5;
    CutoffFunction f(eps);
    const double a = expansion_check(f, uniform_grid(0.0, 2 * eps, 512));
    const double b = expansion_check(f, uniform_grid(0.0, 2 * eps, 1024));
    return {std::isfinite(a) && std::isfinite(b) && std::abs(b - a) <= 0.1 * a,
            fmt("expansion C_fit %.6g (512) vs %.6g (1024), change %.3g%%", a, b, 100 * std::abs(b - a) / a)};
}

Outcome c9() {
    const auto start = std::chrono::steady_clock::now();
    auto curve = leakage_curve(chain15(), {2, 3, 4});
    bool decreasing = true;
    for (std::size_t i = 1; i < curve.size(); ++i) decreasing = decreasing && curve[i].leakage < curve[i - 1].leakage;
    const double at4 = curve.back().lhs;
    const double elapsed = seconds_since(start);
    return {decreasing && at4 <= 0.1 && elapsed < 300.0,
            fmt("leakage(eta=2,3,4) = %.3g, %.3g, %.3g strictly decreasing %s; sup <N_B1> at eta=4 %.3g (<= 0.1 %s), "
                "%.1f s",
                curve[0].leakage, curve[1].leakage, curve[2].leakage, decreasing ? "yes" : "no", at4,
                at4 <= 0.1 ? "yes" : "no", elapsed)};
}

Outcome c10() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> fits, strict;
    for (int h : {4, 5, 6}) {
        fits.push_back(run_lightcone(end_particles(h, h - 3.0, h - 1.0)).c_fit);
        strict.push_back(run_lightcone(end_particles(h, h / 4.0, 3.0 * h / 4.0)).c_fit);
    }
    auto ratio = [](const std::vector<double>& c) {
        const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
        return *lo > 0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    };
    const double rho = ratio(fits);
    const double elapsed = seconds_since(start);
    std::printf("INFO C10 proportional r=h/4, R=3h/4: c_fit %.4g, %.4g, %.4g, ratio %.4g\n", strict[0], strict[1],
                strict[2], ratio(strict));
    return {rho <= 2.0 && elapsed < 900.0,
            fmt("c_fit on 9/11/13 sites %.4g, %.4g, %.4g, ratio %.4g, %.1f s", fits[0], fits[1], fits[2], rho,
                elapsed)};
}

Outcome c11() {
    auto sweep = astlo_s_sweep(chain15(), {0.5, 1.0});
    const double e1 = sweep[0].sup_excess, e2 = sweep[1].sup_excess;
    return {e2 <= e1 + 1e-6,
            fmt("sup excess at s0=%.4g: %.4g, at 2s0=%.4g: %.4g", sweep[0].s, e1, sweep[1].s, e2)};
}

Outcome c12() {
    auto cfg = chain15();
    auto reps = moment_sweep(cfg, {1, 2});
    const double N = reps[0].total_n;
    double worst = -std::numeric_limits<double>::infinity();
    bool ordered = true;
    for (std::size_t k = 0; k < reps[0].lhs_trace.size(); ++k) {
        const double bound = N * reps[0].lhs_trace[k];
        worst = std::max(worst, reps[1].lhs_trace[k] - bound);
        // Roundoff slack only; the inequality is exact in the occupation basis.
        if (reps[1].lhs_trace[k] > bound + 1e-12 * std::max(1.0, bound)) ordered = false;
    }
    const bool finite = std::isfinite(reps[0].c_fit) && std::isfinite(reps[1].c_fit);
    return {finite && ordered,
            fmt("c_fit p=1 %.4g, p=2 %.4g, max(<N^2> - N<N>) %.3g", reps[0].c_fit, reps[1].c_fit, worst)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<std::string, std::function<Outcome()>> suite{
        {"C1", c1}, {"C2", c2}, {"C3", c3},   {"C4", c4},   {"C5", c5},   {"C6", c6},
        {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10}, {"C11", c11}, {"C12", c12}};
    std::vector<std::string> ids;
    for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
    if (ids.empty())
        for (int i = 1; i <= 12; ++i) ids.push_back("C" + std::to_string(i));

    int failures = 0;
    for (const auto& id : ids) {
        auto it = suite.find(id);
        if (it == suite.end()) {
            std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
            return 2;
        }
        Outcome out;
        try {
            out = it->second();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %s %s\n", out.pass ? "PASS" : "FAIL", id.c_str(), out.detail.c_str());
        std::fflush(stdout);
        failures += out.pass ? 0 : 1;
    }
    return failures ? 1 : 0;
}
