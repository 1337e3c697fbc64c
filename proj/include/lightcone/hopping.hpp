#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "lightcone/lattice.hpp"

namespace lightcone {

using cplx = std::complex<double>;

enum class SignPattern { positive, alternating, random_phase };

/// Dense Hermitian one-body matrix J on a lattice.
///
/// `alpha` and `c_j` describe the power-law envelope |J_xy| <= c_j |x-y|^-alpha.
/// For matrices given entry by entry, `c_j` is the smallest constant that
/// satisfies the envelope for the stated `alpha`.
struct HoppingMatrix {
    LatticePtr lattice;
    Eigen::MatrixXcd entries;
    double alpha = 0.0;
    double c_j = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
    /// max |J - J^dagger|
    double hermiticity_defect() const;
    /// max over x != y of |J_xy| |x-y|^alpha / c_j; 1 when the envelope is saturated.
    double decay_certificate() const;

    static HoppingMatrix from_entries(LatticePtr lattice, Eigen::MatrixXcd entries, double alpha);
    static HoppingMatrix zero(LatticePtr lattice, double alpha);
};

struct KappaMoments {
    std::vector<double> kappa_nu;  ///< kappa_0 ... kappa_n (only kappa_0 when n < 1)
    int n = 0;                      ///< floor(alpha - d p - 1)
    double gamma = 0.0;             ///< alpha - n - 1
    int p = 1;
    bool moments_available = false;  ///< n >= 1
    bool hypothesis_holds = false;   ///< alpha > 2 d p + 1

    double kappa() const { return kappa_nu.front(); }
};

HoppingMatrix build_power_law(LatticePtr lattice, double alpha, double c_j,
                              std::vector<double> diagonal = {},
                              SignPattern sign_pattern = SignPattern::positive,
                              std::uint64_t seed = 0);

/// sup_x sum_y |J_xy| |x-y|^(nu+1); addends summed in ascending magnitude.
double kappa_moment(const HoppingMatrix& J, int nu);

/// Same quantity by a plain row-major double loop, no reordering.
double kappa_moment_naive(const HoppingMatrix& J, int nu);

inline double kappa(const HoppingMatrix& J) { return kappa_moment(J, 0); }

KappaMoments derived_exponents(const HoppingMatrix& J, int d, int p);

/// Coordinate-format dump: row,col,re,im with 17 significant digits.
void write_hopping_csv(std::ostream& os, const HoppingMatrix& J);

}  // namespace lightcone
