#include "lightcone/fock_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lightcone/csv.hpp"

namespace lightcone {

namespace {

using Triplet = Eigen::Triplet<cplx>;

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& triplets) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

double max_abs_coeff(const SparseMatrix& m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
    return best;
}

Eigen::SparseMatrix<cplx, Eigen::RowMajor> diag_power_shifted(const FockBasis& basis, std::span<const double> g,
                                                               double shift, int q) {
    std::vector<Triplet> t;
    t.reserve(basis.dimension());
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        auto m = basis.state(i);
        double value = shift;
        for (std::size_t x = 0; x < basis.n_sites(); ++x) value += g[x] * m[x];
        double powered = 1.0;
        for (int k = 0; k < q; ++k) powered *= value;
        t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), powered);
    }
    const auto d = static_cast<Eigen::Index>(basis.dimension());
    return from_triplets(d, d, t);
}

}  // namespace

std::size_t default_dimension_cap() {
    if (const char* env = std::getenv("LIGHTCONE_DIM_CAP")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultDimensionCap;
}

std::string SizingReport::describe() const {
    std::ostringstream os;
    os << "sector |Lambda|=" << n_sites << " N=" << total_n << ": dimension ";
    if (dimension == kUnbounded)
        os << "overflows size_t";
    else
        os << dimension << ", basis ~" << basis_bytes / 1024 << " KiB, Hamiltonian <= "
           << hamiltonian_bytes / 1024 << " KiB";
    return os.str();
}

SizingReport size_sector(std::size_t n_sites, int total_n) {
    if (total_n < 0) throw std::invalid_argument("particle number must be nonnegative");
    if (n_sites == 0) throw std::invalid_argument("sector needs at least one site");
    SizingReport r;
    r.n_sites = n_sites;
    r.total_n = total_n;
    // C(N + L - 1, N), built as C(L-1+i, i) for i = 1..N; every prefix is integral.
    unsigned __int128 dim = 1;
    bool overflow = false;
    for (int i = 1; i <= total_n && !overflow; ++i) {
        dim = dim * (n_sites - 1 + static_cast<unsigned>(i)) / static_cast<unsigned>(i);
        if (dim > static_cast<unsigned __int128>(kUnbounded / 64)) overflow = true;
    }
    if (overflow) {
        r.dimension = r.basis_bytes = r.hamiltonian_bytes = kUnbounded;
        return r;
    }
    r.dimension = static_cast<std::size_t>(dim);
    r.basis_bytes = r.dimension * n_sites * sizeof(Occupation);
    const std::size_t occupied = std::min<std::size_t>(static_cast<std::size_t>(total_n), n_sites);
    const std::size_t per_row = occupied * (n_sites - 1) + 1;
    r.hamiltonian_bytes = r.dimension * per_row * (sizeof(cplx) + sizeof(int)) + (r.dimension + 1) * sizeof(int);
    return r;
}

DimensionCapExceeded::DimensionCapExceeded(SizingReport rep, std::size_t c)
    : std::runtime_error("sector dimension exceeds cap " + std::to_string(c) + "; " + rep.describe()),
      report(rep),
      cap(c) {}

FockBasis::FockBasis(LatticePtr lattice, int total_n, std::size_t cap)
    : lattice_(std::move(lattice)), n_sites_(0), total_n_(total_n), dimension_(0) {
    if (!lattice_) throw std::invalid_argument("basis needs a lattice");
    n_sites_ = lattice_->size();
    if (total_n > std::numeric_limits<Occupation>::max())
        throw std::invalid_argument("particle number too large for the occupation type");
    const SizingReport sizing = size_sector(n_sites_, total_n);
    if (sizing.dimension > cap) throw DimensionCapExceeded(sizing, cap);
    dimension_ = sizing.dimension;

    const std::size_t rows = static_cast<std::size_t>(total_n) + n_sites_ + 1;
    binom_.assign(rows * (n_sites_ + 1), 0);
    for (std::size_t n = 0; n < rows; ++n) {
        binom_[n * (n_sites_ + 1)] = 1;
        for (std::size_t k = 1; k <= std::min(n, n_sites_); ++k) {
            const std::uint64_t a = binom_[(n - 1) * (n_sites_ + 1) + k - 1];
            const std::uint64_t b = k <= n - 1 ? binom_[(n - 1) * (n_sites_ + 1) + k] : 0;
            binom_[n * (n_sites_ + 1) + k] =
                (a > std::numeric_limits<std::uint64_t>::max() - b) ? std::numeric_limits<std::uint64_t>::max() : a + b;
        }
    }

    occ_.resize(dimension_ * n_sites_);
    std::vector<Occupation> cur(n_sites_, 0);
    std::size_t next = 0;
    // Last site outermost, ascending: colexicographic order.
    auto fill = [&](auto&& self, std::size_t pos, int remaining) -> void {
        if (pos == 0) {
            cur[0] = static_cast<Occupation>(remaining);
            std::copy(cur.begin(), cur.end(), occ_.begin() + static_cast<std::ptrdiff_t>(next * n_sites_));
            ++next;
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            cur[pos] = static_cast<Occupation>(k);
            self(self, pos - 1, remaining - k);
        }
        cur[pos] = 0;
    };
    fill(fill, n_sites_ - 1, total_n);
}

std::uint64_t FockBasis::binom(std::size_t n, std::size_t k) const {
    if (k > n) return 0;
    return binom_[n * (n_sites_ + 1) + k];
}

bool FockBasis::contains(std::span<const Occupation> m) const {
    if (m.size() != n_sites_) return false;
    long total = 0;
    for (auto v : m) total += v;
    return total == total_n_;
}

std::size_t FockBasis::rank(std::span<const Occupation> m) const {
    if (!contains(m)) throw std::invalid_argument("occupation vector is not in this sector");
    std::uint64_t r = 0;
    std::size_t remaining = static_cast<std::size_t>(total_n_);
    for (std::size_t i = n_sites_ - 1; i >= 1; --i) {
        r += binom(remaining + i, i) - binom(remaining - m[i] + i, i);
        remaining -= m[i];
    }
    return static_cast<std::size_t>(r);
}

BasisPtr enumerate_sector(LatticePtr lattice, int total_n, std::size_t cap) {
    return std::make_shared<const FockBasis>(std::move(lattice), total_n, cap);
}

DiagonalOperator DiagonalOperator::pow(int p) const {
    if (p < 0) throw std::invalid_argument("negative power of a diagonal operator");
    DiagonalOperator out{basis, std::vector<double>(values.size(), 1.0)};
    for (std::size_t i = 0; i < values.size(); ++i)
        for (int k = 0; k < p; ++k) out.values[i] *= values[i];
    return out;
}

DiagonalOperator DiagonalOperator::operator+(double shift) const {
    DiagonalOperator out{basis, values};
    for (auto& v : out.values) v += shift;
    return out;
}

DiagonalOperator DiagonalOperator::operator*(const DiagonalOperator& other) const {
    if (other.values.size() != values.size()) throw std::invalid_argument("diagonal size mismatch");
    DiagonalOperator out{basis, values};
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] *= other.values[i];
    return out;
}

SparseMatrix DiagonalOperator::to_sparse() const {
    std::vector<Triplet> t;
    t.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), values[i]);
    const auto d = static_cast<Eigen::Index>(values.size());
    return from_triplets(d, d, t);
}

double SparseOperator::max_abs() const { return max_abs_coeff(matrix); }

double SparseOperator::hermiticity_defect() const {
    SparseMatrix adj = matrix.adjoint();
    SparseMatrix diff = matrix - adj;
    return max_abs_coeff(diff);
}

InteractionSpec bose_hubbard(std::size_t n_sites, double U) {
    return OnsitePolynomial{std::vector<std::vector<double>>(n_sites, {0.0, -0.5 * U, 0.5 * U})};
}

DiagonalOperator interaction_diagonal(const BasisPtr& basis, const InteractionSpec& V) {
    const std::size_t L = basis->n_sites();
    DiagonalOperator out{basis, std::vector<double>(basis->dimension(), 0.0)};
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, NoInteraction>) {
            } else if constexpr (std::is_same_v<T, OnsitePolynomial>) {
                if (spec.coeffs.size() != L) throw std::invalid_argument("onsite polynomial needs one entry per site");
                for (std::size_t i = 0; i < basis->dimension(); ++i) {
                    auto m = basis->state(i);
                    double v = 0.0;
                    for (std::size_t x = 0; x < L; ++x) {
                        double power = 1.0;
                        for (double c : spec.coeffs[x]) {
                            v += c * power;
                            power *= m[x];
                        }
                    }
                    out.values[i] = v;
                }
            } else if constexpr (std::is_same_v<T, PairDensity>) {
                if (spec.U.rows() != static_cast<Eigen::Index>(L) || spec.U.cols() != static_cast<Eigen::Index>(L))
                    throw std::invalid_argument("pair density matrix has wrong shape");
                for (std::size_t i = 0; i < basis->dimension(); ++i) {
                    auto m = basis->state(i);
                    double v = 0.0;
                    for (std::size_t x = 0; x < L; ++x)
                        for (std::size_t y = 0; y < L; ++y) v += spec.U(x, y) * m[x] * m[y];
                    out.values[i] = v;
                }
            } else {
                if (spec.values.size() != basis->dimension())
                    throw std::invalid_argument("custom diagonal needs one value per basis state");
                out.values = spec.values;
            }
        },
        V);
    return out;
}

SparseOperator hop_operator(const BasisPtr& basis, std::size_t x, std::size_t y) {
    const std::size_t L = basis->n_sites();
    if (x >= L || y >= L) throw std::out_of_range("site index outside the lattice");
    std::vector<Triplet> t;
    std::vector<Occupation> scratch(L);
    for (std::size_t j = 0; j < basis->dimension(); ++j) {
        auto m = basis->state(j);
        const auto col = static_cast<Eigen::Index>(j);
        if (x == y) {
            if (m[x] > 0) t.emplace_back(col, col, static_cast<double>(m[x]));
            continue;
        }
        if (m[y] == 0) continue;
        std::copy(m.begin(), m.end(), scratch.begin());
        scratch[y] -= 1;
        scratch[x] += 1;
        const double w = std::sqrt(static_cast<double>(m[x] + 1) * m[y]);
        t.emplace_back(static_cast<Eigen::Index>(basis->rank(scratch)), col, w);
    }
    const auto d = static_cast<Eigen::Index>(basis->dimension());
    return SparseOperator{basis, from_triplets(d, d, t), x == y};
}

DiagonalOperator second_quantize(const BasisPtr& basis, std::span<const double> g) {
    if (g.size() != basis->n_sites()) throw std::invalid_argument("site function has wrong length");
    DiagonalOperator out{basis, std::vector<double>(basis->dimension(), 0.0)};
    for (std::size_t i = 0; i < basis->dimension(); ++i) {
        auto m = basis->state(i);
        double v = 0.0;
        for (std::size_t x = 0; x < g.size(); ++x) v += g[x] * m[x];
        out.values[i] = v;
    }
    return out;
}

DiagonalOperator region_number(const BasisPtr& basis, const Region& region) {
    if (region.lattice_size != basis->n_sites()) throw std::invalid_argument("region belongs to another lattice");
    const auto chi = region.indicator();
    return second_quantize(basis, chi);
}

SparseOperator build_hamiltonian(const BasisPtr& basis, const HoppingMatrix& J, const InteractionSpec& V) {
    if (!J.lattice || !basis->lattice()->same_sites(*J.lattice))
        throw std::invalid_argument("hopping matrix and basis are defined on different lattices");
    const std::size_t L = basis->n_sites();
    const DiagonalOperator v = interaction_diagonal(basis, V);

    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t x = 0; x < L; ++x)
        for (std::size_t y = 0; y < L; ++y)
            if (x != y && J.entries(x, y) != cplx{}) links.emplace_back(x, y);

    std::vector<Triplet> t;
    t.reserve(basis->dimension() * (1 + std::min<std::size_t>(links.size(), 64)));
    std::vector<Occupation> scratch(L);
    for (std::size_t j = 0; j < basis->dimension(); ++j) {
        auto m = basis->state(j);
        const auto col = static_cast<Eigen::Index>(j);
        double diag = v.values[j];
        for (std::size_t x = 0; x < L; ++x) diag += J.entries(x, x).real() * m[x];
        if (diag != 0.0) t.emplace_back(col, col, diag);
        std::copy(m.begin(), m.end(), scratch.begin());
        for (auto [x, y] : links) {
            if (m[y] == 0) continue;
            scratch[y] -= 1;
            scratch[x] += 1;
            const double w = std::sqrt(static_cast<double>(m[x] + 1) * m[y]);
            t.emplace_back(static_cast<Eigen::Index>(basis->rank(scratch)), col, J.entries(x, y) * w);
            scratch[y] += 1;
            scratch[x] -= 1;
        }
    }
    const auto d = static_cast<Eigen::Index>(basis->dimension());
    return SparseOperator{basis, from_triplets(d, d, t), true};
}

SparseMatrix annihilation(const FockBasis& from, const FockBasis& to, std::size_t site) {
    if (to.total_n() != from.total_n() - 1 || to.n_sites() != from.n_sites())
        throw std::invalid_argument("annihilation maps the N sector to the N-1 sector");
    std::vector<Triplet> t;
    std::vector<Occupation> scratch(from.n_sites());
    for (std::size_t j = 0; j < from.dimension(); ++j) {
        auto m = from.state(j);
        if (m[site] == 0) continue;
        std::copy(m.begin(), m.end(), scratch.begin());
        scratch[site] -= 1;
        t.emplace_back(static_cast<Eigen::Index>(to.rank(scratch)), static_cast<Eigen::Index>(j),
                       std::sqrt(static_cast<double>(m[site])));
    }
    return from_triplets(static_cast<Eigen::Index>(to.dimension()), static_cast<Eigen::Index>(from.dimension()), t);
}

SparseMatrix creation(const FockBasis& from, const FockBasis& to, std::size_t site) {
    if (to.total_n() != from.total_n() + 1 || to.n_sites() != from.n_sites())
        throw std::invalid_argument("creation maps the N-1 sector to the N sector");
    std::vector<Triplet> t;
    std::vector<Occupation> scratch(from.n_sites());
    for (std::size_t j = 0; j < from.dimension(); ++j) {
        auto m = from.state(j);
        std::copy(m.begin(), m.end(), scratch.begin());
        scratch[site] += 1;
        t.emplace_back(static_cast<Eigen::Index>(to.rank(scratch)), static_cast<Eigen::Index>(j),
                       std::sqrt(static_cast<double>(m[site] + 1)));
    }
    return from_triplets(static_cast<Eigen::Index>(to.dimension()), static_cast<Eigen::Index>(from.dimension()), t);
}

IdentityResidual check_hopping_commutator(const BasisPtr& basis, const HoppingMatrix& J, std::span<const double> g,
                                          const InteractionSpec& V) {
    const SparseOperator H = build_hamiltonian(basis, J, V);
    const SparseMatrix D = second_quantize(basis, g).to_sparse();
    const SparseMatrix lhs = SparseMatrix(H.matrix * D) - SparseMatrix(D * H.matrix);

    const auto d = static_cast<Eigen::Index>(basis->dimension());
    SparseMatrix rhs(d, d);
    const std::size_t L = basis->n_sites();
    for (std::size_t x = 0; x < L; ++x)
        for (std::size_t y = 0; y < L; ++y) {
            const cplx c = -J.entries(x, y) * (g[x] - g[y]);
            if (c == cplx{}) continue;
            rhs += c * hop_operator(basis, x, y).matrix;
        }
    const SparseMatrix diff = lhs - rhs;
    return {max_abs_coeff(diff), std::max(max_abs_coeff(lhs), max_abs_coeff(rhs))};
}

IdentityResidual check_ladder_relations(const BasisPtr& basis, std::span<const double> g, int q, std::size_t x,
                                        std::size_t y) {
    if (q < 0) throw std::invalid_argument("ladder power must be nonnegative");
    if (g.size() != basis->n_sites()) throw std::invalid_argument("site function has wrong length");
    if (x >= basis->n_sites() || y >= basis->n_sites()) throw std::out_of_range("site index outside the lattice");
    if (basis->total_n() == 0) return {};  // a_y annihilates the whole sector; both sides vanish

    const FockBasis lower(basis->lattice(), basis->total_n() - 1);
    const SparseMatrix Gq = diag_power_shifted(*basis, g, 0.0, q);
    const SparseMatrix Gq_x = diag_power_shifted(lower, g, g[x], q);
    const SparseMatrix Gq_y = diag_power_shifted(lower, g, g[y], q);
    const SparseMatrix Gq_lower = diag_power_shifted(lower, g, 0.0, q);
    const SparseMatrix create_x = creation(lower, *basis, x);
    const SparseMatrix destroy_y = annihilation(*basis, lower, y);
    const SparseMatrix hop = hop_operator(basis, x, y).matrix;

    IdentityResidual out;
    auto compare = [&](const SparseMatrix& a, const SparseMatrix& b) {
        const SparseMatrix diff = a - b;
        out.residual = std::max(out.residual, max_abs_coeff(diff));
        out.scale = std::max({out.scale, max_abs_coeff(a), max_abs_coeff(b)});
    };
    // Composite form on the N sector.
    compare(SparseMatrix(Gq * hop), SparseMatrix(create_x * SparseMatrix(Gq_x * destroy_y)));
    // N_g^q a*_x = a*_x (N_g + g(x))^q on N-1 -> N.
    compare(SparseMatrix(Gq * create_x), SparseMatrix(create_x * Gq_x));
    // a_y N_g^q = (N_g + g(y))^q a_y on N -> N-1.
    compare(SparseMatrix(destroy_y * Gq), SparseMatrix(Gq_y * destroy_y));
    (void)Gq_lower;
    return out;
}

StateVector mott_state(const BasisPtr& basis, std::span<const int> occupation) {
    if (occupation.size() != basis->n_sites()) throw std::invalid_argument("occupation has wrong length");
    std::vector<Occupation> m(occupation.size());
    long total = 0;
    for (std::size_t x = 0; x < occupation.size(); ++x) {
        if (occupation[x] < 0) throw std::invalid_argument("occupations must be nonnegative");
        m[x] = static_cast<Occupation>(occupation[x]);
        total += occupation[x];
    }
    if (total != basis->total_n()) throw std::invalid_argument("occupation does not sum to the sector's particle number");
    StateVector psi{basis, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()))};
    psi.amplitudes(static_cast<Eigen::Index>(basis->rank(m))) = 1.0;
    return psi;
}

void write_operator_csv(std::ostream& os, const SparseOperator& op) {
    CsvWriter csv(os);
    csv.header({"row", "col", "re", "im"});
    for (Eigen::Index k = 0; k < op.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it)
            csv.row(static_cast<double>(it.row()), static_cast<double>(it.col()), it.value().real(), it.value().imag());
}

}  // namespace lightcone
