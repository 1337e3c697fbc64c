#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lightcone/hopping.hpp"
#include "lightcone/lattice.hpp"

namespace lightcone {

using Occupation = std::uint16_t;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

constexpr std::size_t kDefaultDimensionCap = 5'000'000;

/// Cap from LIGHTCONE_DIM_CAP if set, otherwise kDefaultDimensionCap.
std::size_t default_dimension_cap();

struct SizingReport {
    std::size_t n_sites = 0;
    int total_n = 0;
    std::size_t dimension = 0;        ///< SIZE_MAX when it does not fit in size_t
    std::size_t basis_bytes = 0;
    std::size_t hamiltonian_bytes = 0;  ///< upper estimate for the compressed H

    std::string describe() const;
};

SizingReport size_sector(std::size_t n_sites, int total_n);

class DimensionCapExceeded : public std::runtime_error {
public:
    DimensionCapExceeded(SizingReport report, std::size_t cap);
    SizingReport report;
    std::size_t cap;
};

/// Occupation basis of the fixed-N sector of the bosonic Fock space.
///
/// States are stored in colexicographic order (the last site's occupation is
/// the most significant key). `rank` inverts the enumeration combinatorially
/// in O(|Lambda|) without a lookup table.
class FockBasis {
public:
    FockBasis(LatticePtr lattice, int total_n, std::size_t cap = default_dimension_cap());

    const LatticePtr& lattice() const { return lattice_; }
    std::size_t n_sites() const { return n_sites_; }
    int total_n() const { return total_n_; }
    std::size_t dimension() const { return dimension_; }

    std::span<const Occupation> state(std::size_t i) const {
        return {occ_.data() + i * n_sites_, n_sites_};
    }

    /// Position of an occupation vector; throws if it is not in the sector.
    std::size_t rank(std::span<const Occupation> m) const;
    bool contains(std::span<const Occupation> m) const;

private:
    std::uint64_t binom(std::size_t n, std::size_t k) const;

    LatticePtr lattice_;
    std::size_t n_sites_;
    int total_n_;
    std::size_t dimension_;
    std::vector<Occupation> occ_;
    std::vector<std::uint64_t> binom_;  // (total_n + n_sites + 1) x (n_sites + 1)
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr enumerate_sector(LatticePtr lattice, int total_n, std::size_t cap = default_dimension_cap());

/// Operator diagonal in the occupation basis (dGamma(g), V, N_X^p, ...).
struct DiagonalOperator {
    BasisPtr basis;
    std::vector<double> values;

    DiagonalOperator pow(int p) const;
    DiagonalOperator operator+(double shift) const;
    DiagonalOperator operator*(const DiagonalOperator& other) const;
    SparseMatrix to_sparse() const;
};

struct SparseOperator {
    BasisPtr basis;
    SparseMatrix matrix;
    bool hermitian_hint = false;

    double max_abs() const;
    double hermiticity_defect() const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }
};

struct StateVector {
    BasisPtr basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

/// V = sum_x sum_k coeffs[x][k] n_x^k
struct OnsitePolynomial {
    std::vector<std::vector<double>> coeffs;
};
/// V = sum_{x,y} U_xy n_x n_y
struct PairDensity {
    Eigen::MatrixXd U;
};
/// One real value per basis state, in basis order.
struct CustomDiagonal {
    std::vector<double> values;
};
struct NoInteraction {};

using InteractionSpec = std::variant<NoInteraction, OnsitePolynomial, PairDensity, CustomDiagonal>;

/// U/2 n_x (n_x - 1) on every site.
InteractionSpec bose_hubbard(std::size_t n_sites, double U);

DiagonalOperator interaction_diagonal(const BasisPtr& basis, const InteractionSpec& V);

/// a*_x a_y restricted to the sector; the number operator n_x when x == y.
SparseOperator hop_operator(const BasisPtr& basis, std::size_t x, std::size_t y);

/// dGamma(g) = sum_x g(x) n_x
DiagonalOperator second_quantize(const BasisPtr& basis, std::span<const double> g);

/// N_X
DiagonalOperator region_number(const BasisPtr& basis, const Region& region);

SparseOperator build_hamiltonian(const BasisPtr& basis, const HoppingMatrix& J,
                                 const InteractionSpec& V = NoInteraction{});

/// Sector-to-sector ladder maps. `annihilation` takes the N sector to N-1,
/// `creation` takes N-1 to N. Both are rectangular.
SparseMatrix annihilation(const FockBasis& from, const FockBasis& to, std::size_t site);
SparseMatrix creation(const FockBasis& from, const FockBasis& to, std::size_t site);

struct IdentityResidual {
    double residual = 0.0;
    double scale = 0.0;  ///< magnitude of the terms compared

    bool within(double rel_tol) const { return residual <= rel_tol * std::max(scale, 1.0); }
};

/// Compares [H, dGamma(g)] with -sum_{x,y} J_xy (g(x) - g(y)) a*_x a_y.
IdentityResidual check_hopping_commutator(const BasisPtr& basis, const HoppingMatrix& J,
                                          std::span<const double> g,
                                          const InteractionSpec& V = NoInteraction{});

/// Compares dGamma(g)^q a*_x a_y with a*_x (dGamma(g) + g(x))^q a_y, routing the
/// right-hand side through the N-1 sector, together with the two one-sided
/// relations N_g^q a*_x = a*_x (N_g + g(x))^q and a_y N_g^q = (N_g + g(y))^q a_y.
IdentityResidual check_ladder_relations(const BasisPtr& basis, std::span<const double> g, int q,
                                        std::size_t x, std::size_t y);

StateVector mott_state(const BasisPtr& basis, std::span<const int> occupation);

void write_operator_csv(std::ostream& os, const SparseOperator& op);

}  // namespace lightcone
