#include "lightcone/hopping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "lightcone/csv.hpp"

namespace lightcone {

double HoppingMatrix::hermiticity_defect() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

double HoppingMatrix::decay_certificate() const {
    if (c_j <= 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t x = 0; x < size(); ++x)
        for (std::size_t y = 0; y < size(); ++y)
            if (x != y)
                worst = std::max(worst, std::abs(entries(x, y)) * std::pow(lattice->distance(x, y), alpha) / c_j);
    return worst;
}

HoppingMatrix HoppingMatrix::from_entries(LatticePtr lattice, Eigen::MatrixXcd entries, double alpha) {
    if (!lattice) throw std::invalid_argument("hopping matrix needs a lattice");
    if (!(alpha > 0)) throw std::invalid_argument("decay exponent alpha must be positive");
    const auto n = static_cast<Eigen::Index>(lattice->size());
    if (entries.rows() != n || entries.cols() != n)
        throw std::invalid_argument("hopping matrix shape does not match the lattice");
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y)
            if (entries(x, y) != std::conj(entries(y, x)))
                throw std::invalid_argument("hopping matrix is not Hermitian");

    HoppingMatrix J{std::move(lattice), std::move(entries), alpha, 0.0};
    for (std::size_t x = 0; x < J.size(); ++x)
        for (std::size_t y = 0; y < J.size(); ++y)
            if (x != y)
                J.c_j = std::max(J.c_j, std::abs(J.entries(x, y)) * std::pow(J.lattice->distance(x, y), alpha));
    return J;
}

HoppingMatrix HoppingMatrix::zero(LatticePtr lattice, double alpha) {
    const auto n = static_cast<Eigen::Index>(lattice->size());
    return from_entries(std::move(lattice), Eigen::MatrixXcd::Zero(n, n), alpha);
}

HoppingMatrix build_power_law(LatticePtr lattice, double alpha, double c_j, std::vector<double> diagonal,
                              SignPattern sign_pattern, std::uint64_t seed) {
    if (!lattice) throw std::invalid_argument("hopping matrix needs a lattice");
    if (!(alpha > 0)) throw std::invalid_argument("decay exponent alpha must be positive");
    if (!(c_j > 0)) throw std::invalid_argument("hopping prefactor c_j must be positive");
    const std::size_t n = lattice->size();
    if (diagonal.empty()) diagonal.assign(n, 0.0);
    if (diagonal.size() != n) throw std::invalid_argument("diagonal has wrong length");

    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (std::size_t x = 0; x < n; ++x) {
        J(x, x) = diagonal[x];
        for (std::size_t y = x + 1; y < n; ++y) {
            const double mag = c_j * std::pow(lattice->distance(x, y), -alpha);
            cplx value = mag;
            switch (sign_pattern) {
                case SignPattern::positive:
                    break;
                case SignPattern::alternating:
                    if ((x + y) % 2 == 1) value = -mag;
                    break;
                case SignPattern::random_phase:
                    value = std::polar(mag, angle(rng));
                    break;
            }
            J(x, y) = value;
            J(y, x) = std::conj(value);
        }
    }
    return HoppingMatrix{std::move(lattice), std::move(J), alpha, c_j};
}

double kappa_moment(const HoppingMatrix& J, int nu) {
    if (nu < 0) throw std::invalid_argument("moment order must be nonnegative");
    const std::size_t n = J.size();
    std::vector<double> addends;
    addends.reserve(n);
    double best = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        addends.clear();
        for (std::size_t y = 0; y < n; ++y) {
            if (x == y) continue;
            addends.push_back(std::abs(J.entries(x, y)) * std::pow(J.lattice->distance(x, y), nu + 1));
        }
        std::sort(addends.begin(), addends.end());
        double row = 0.0;
        for (double a : addends) row += a;
        best = std::max(best, row);
    }
    return best;
}

double kappa_moment_naive(const HoppingMatrix& J, int nu) {
    double best = 0.0;
    for (std::size_t x = 0; x < J.size(); ++x) {
        double row = 0.0;
        for (std::size_t y = 0; y < J.size(); ++y)
            row += std::abs(J.entries(x, y)) * std::pow(J.lattice->distance(x, y), nu + 1);
        best = std::max(best, row);
    }
    return best;
}

KappaMoments derived_exponents(const HoppingMatrix& J, int d, int p) {
    if (p < 1) throw std::invalid_argument("moment order p must be at least 1");
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    KappaMoments km;
    km.p = p;
    km.n = static_cast<int>(std::floor(J.alpha - d * p - 1.0));
    km.gamma = J.alpha - km.n - 1.0;
    km.moments_available = km.n >= 1;
    km.hypothesis_holds = J.alpha > 2.0 * d * p + 1.0;
    const int top = std::max(km.n, 0);
    for (int nu = 0; nu <= top; ++nu) km.kappa_nu.push_back(kappa_moment(J, nu));
    return km;
}

void write_hopping_csv(std::ostream& os, const HoppingMatrix& J) {
    CsvWriter csv(os);
    csv.header({"row", "col", "re", "im"});
    for (std::size_t x = 0; x < J.size(); ++x)
        for (std::size_t y = 0; y < J.size(); ++y)
            csv.row(static_cast<double>(x), static_cast<double>(y), J.entries(x, y).real(), J.entries(x, y).imag());
}

}  // namespace lightcone
