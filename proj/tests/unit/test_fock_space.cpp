#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "dense_oracle.hpp"
#include "lightcone/dynamics.hpp"
#include "lightcone/fock_space.hpp"

using namespace lightcone;

namespace {

LatticePtr chain(std::size_t n) { return std::make_shared<const Lattice>(build_chain(n, 1.0 + 1e-9)); }

std::size_t idx(const FockBasis& b, std::initializer_list<Occupation> m) {
    std::vector<Occupation> v(m);
    return b.rank(v);
}

std::uint64_t binomial(unsigned n, unsigned k) {
    std::uint64_t r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("sector dimensions") {
    CHECK(enumerate_sector(chain(3), 2)->dimension() == 6);
    auto one = enumerate_sector(chain(1), 7);
    REQUIRE(one->dimension() == 1);
    CHECK(one->state(0)[0] == 7);
    CHECK(enumerate_sector(chain(9), 9)->dimension() == 24310);
    CHECK(binomial(17, 9) == 24310);
    CHECK(enumerate_sector(chain(4), 0)->dimension() == 1);
    for (unsigned L = 1; L <= 6; ++L)
        for (int n = 0; n <= 5; ++n)
            CHECK(size_sector(L, n).dimension == binomial(n + L - 1, static_cast<unsigned>(n)));
    CHECK(size_sector(400, 400).dimension == std::numeric_limits<std::size_t>::max());
    CHECK_THROWS_AS(enumerate_sector(chain(3), -1), std::invalid_argument);
}

TEST_CASE("dimension cap") {
    CHECK_THROWS_AS(FockBasis(chain(9), 9, 1000), DimensionCapExceeded);
    try {
        FockBasis(chain(9), 9, 1000);
    } catch (const DimensionCapExceeded& e) {
        CHECK(e.report.dimension == 24310);
        CHECK(e.cap == 1000);
        CHECK(e.report.basis_bytes > 0);
    }
}

TEST_CASE("colex order and ranking") {
    auto b = enumerate_sector(chain(3), 2);
    CHECK(idx(*b, {2, 0, 0}) == 0);
    CHECK(idx(*b, {1, 1, 0}) == 1);
    CHECK(idx(*b, {0, 2, 0}) == 2);
    CHECK(idx(*b, {1, 0, 1}) == 3);
    CHECK(idx(*b, {0, 1, 1}) == 4);
    CHECK(idx(*b, {0, 0, 2}) == 5);
    std::vector<Occupation> wrong{1, 0, 0};
    CHECK_FALSE(b->contains(wrong));
    CHECK_THROWS_AS(b->rank(wrong), std::invalid_argument);

    for (auto [L, n] : {std::pair{5, 4}, std::pair{7, 3}, std::pair{3, 6}}) {
        auto basis = enumerate_sector(chain(static_cast<std::size_t>(L)), n);
        auto dense = oracle::sector(static_cast<std::size_t>(L), n);
        REQUIRE(dense.size() == basis->dimension());
        for (std::size_t i = 0; i < basis->dimension(); ++i) {
            CHECK(basis->rank(basis->state(i)) == i);
            if (i > 0) {
                auto a = basis->state(i - 1), c = basis->state(i);
                CHECK(std::lexicographical_compare(a.rbegin(), a.rend(), c.rbegin(), c.rend()));
            }
        }
        CHECK_NOTHROW(oracle::to_library(dense, *basis));
    }
}

TEST_CASE("hop operator examples") {
    auto b1 = enumerate_sector(chain(2), 1);
    auto h = oracle::dense(hop_operator(b1, 0, 1).matrix);
    CHECK(h(idx(*b1, {1, 0}), idx(*b1, {0, 1})) == cplx(1));
    CHECK(oracle::max_abs(h) == 1.0);
    CHECK(std::abs(h.sum() - cplx(1)) == 0.0);

    auto b2 = enumerate_sector(chain(2), 2);
    auto h2 = oracle::dense(hop_operator(b2, 0, 1).matrix);
    const double s2 = std::sqrt(2.0);
    CHECK(std::abs(h2(idx(*b2, {1, 1}), idx(*b2, {0, 2})) - s2) < 1e-15);
    CHECK(std::abs(h2(idx(*b2, {2, 0}), idx(*b2, {1, 1})) - s2) < 1e-15);
    CHECK(std::abs(h2.cwiseAbs().sum() - 2 * s2) < 1e-14);

    auto n0 = oracle::dense(hop_operator(b2, 0, 0).matrix);
    CHECK(n0.isApprox(n0.diagonal().asDiagonal().toDenseMatrix()));
    for (std::size_t i = 0; i < b2->dimension(); ++i) CHECK(n0(i, i) == cplx(b2->state(i)[0]));
}

TEST_CASE("hop operators match the occupation-arithmetic oracle") {
    for (auto [L, n] : {std::pair{3, 3}, std::pair{4, 2}}) {
        auto basis = enumerate_sector(chain(static_cast<std::size_t>(L)), n);
        auto dense = oracle::sector(static_cast<std::size_t>(L), n);
        auto perm = oracle::to_library(dense, *basis);
        for (std::size_t x = 0; x < static_cast<std::size_t>(L); ++x)
            for (std::size_t y = 0; y < static_cast<std::size_t>(L); ++y) {
                auto lib = oracle::dense(hop_operator(basis, x, y).matrix);
                auto ref = oracle::permute(oracle::hop(dense, x, y), perm);
                CHECK(oracle::max_abs(lib - ref) < 1e-14);
                auto adj = oracle::dense(hop_operator(basis, y, x).matrix);
                CHECK(oracle::max_abs(lib.adjoint() - adj) == 0.0);
            }
    }
}

TEST_CASE("second quantization") {
    auto b = enumerate_sector(chain(2), 2);
    std::vector<double> g{2, -1};
    auto d = second_quantize(b, g);
    CHECK(d.values[idx(*b, {2, 0})] == 4);
    CHECK(d.values[idx(*b, {1, 1})] == 1);
    CHECK(d.values[idx(*b, {0, 2})] == -2);

    auto b5 = enumerate_sector(chain(5), 3);
    std::vector<double> ones(5, 1.0);
    for (double v : second_quantize(b5, ones).values) CHECK(v == 3);
    auto X = Region::make(5, {1, 3});
    auto nx = region_number(b5, X);
    auto ind = X.indicator();
    CHECK(second_quantize(b5, ind).values == nx.values);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto g1 = oracle::random_reals(5, rng), g2 = oracle::random_reals(5, rng);
        const double a = oracle::random_reals(1, rng)[0], c = oracle::random_reals(1, rng)[0];
        std::vector<double> mix(5);
        for (int i = 0; i < 5; ++i) mix[i] = a * g1[i] + c * g2[i];
        auto lhs = second_quantize(b5, mix), A = second_quantize(b5, g1), C = second_quantize(b5, g2);
        for (std::size_t i = 0; i < b5->dimension(); ++i)
            CHECK(lhs.values[i] == doctest::Approx(a * A.values[i] + c * C.values[i]).epsilon(1e-13));
    }
    CHECK_THROWS_AS(second_quantize(b5, g), std::invalid_argument);
}

TEST_CASE("hamiltonian examples") {
    auto lat = chain(3);
    auto b = enumerate_sector(lat, 3);
    auto H = build_hamiltonian(b, HoppingMatrix::zero(lat, 3), bose_hubbard(3, 2.0));
    auto Hd = oracle::dense(H.matrix);
    for (std::size_t i = 0; i < b->dimension(); ++i) {
        double e = 0;
        for (auto m : b->state(i)) e += 1.0 * m * (m - 1.0);
        CHECK(Hd(i, i).real() == doctest::Approx(e));
    }
    CHECK(oracle::max_abs(Hd - Hd.diagonal().asDiagonal().toDenseMatrix()) == 0.0);

    auto pair = std::make_shared<const Lattice>(Lattice(1, {{0.0}, {2.0}}));
    Eigen::MatrixXcd J(2, 2);
    J << 0.3, 0.8, 0.8, -0.2;
    auto b1 = enumerate_sector(pair, 1);
    auto H1 = oracle::dense(build_hamiltonian(b1, HoppingMatrix::from_entries(pair, J, 3)).matrix);
    const auto i0 = idx(*b1, {1, 0}), i1 = idx(*b1, {0, 1});
    CHECK(H1(i0, i0) == cplx(0.3));
    CHECK(H1(i1, i1) == cplx(-0.2));
    CHECK(H1(i0, i1) == cplx(0.8));
    CHECK(H1(i1, i0) == cplx(0.8));

    CHECK_THROWS_AS(build_hamiltonian(b1, build_power_law(chain(2), 3, 1)), std::invalid_argument);
}

TEST_CASE("hamiltonian matches the dense oracle") {
    std::mt19937_64 rng(17);
    auto lat = chain(4);
    auto basis = enumerate_sector(lat, 3);
    auto dense = oracle::sector(4, 3);
    auto perm = oracle::to_library(dense, *basis);
    for (int trial = 0; trial < 5; ++trial) {
        auto Jm = oracle::random_hermitian(4, rng);
        auto J = HoppingMatrix::from_entries(lat, Jm, 3);
        auto H = build_hamiltonian(basis, J, bose_hubbard(4, 1.5));
        auto V = interaction_diagonal(basis, bose_hubbard(4, 1.5));
        std::vector<double> v_oracle(dense.size());
        for (std::size_t i = 0; i < dense.size(); ++i)
            for (int m : dense.states[i]) v_oracle[i] += 0.75 * m * (m - 1);
        auto ref = oracle::permute(oracle::hamiltonian(dense, Jm, v_oracle), perm);
        auto lib = oracle::dense(H.matrix);
        CHECK(oracle::max_abs(lib - ref) < 1e-13);
        CHECK(H.hermiticity_defect() <= 1e-12 * H.max_abs());
        std::vector<double> ones(4, 1.0);
        auto N = oracle::dense(second_quantize(basis, ones).to_sparse());
        CHECK(oracle::max_abs(lib * N - N * lib) == 0.0);
        for (std::size_t i = 0; i < dense.size(); ++i)
            CHECK(V.values[perm[i]] == doctest::Approx(v_oracle[i]));
    }
}

TEST_CASE("interaction variants") {
    auto lat = chain(3);
    auto b = enumerate_sector(lat, 2);
    OnsitePolynomial poly{{{1.0, 0.0, 2.0}, {0.0, 1.0}, {}}};
    auto vp = interaction_diagonal(b, poly);
    for (std::size_t i = 0; i < b->dimension(); ++i) {
        auto m = b->state(i);
        CHECK(vp.values[i] == doctest::Approx(1 + 2.0 * m[0] * m[0] + m[1]));
    }
    PairDensity pd{Eigen::MatrixXd::Identity(3, 3) * 0.5};
    pd.U(0, 2) = 1.0;
    auto vd = interaction_diagonal(b, pd);
    for (std::size_t i = 0; i < b->dimension(); ++i) {
        auto m = b->state(i);
        CHECK(vd.values[i] == doctest::Approx(0.5 * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) + m[0] * m[2]));
    }
    CustomDiagonal cd{{1, 2, 3, 4, 5, 6}};
    CHECK(interaction_diagonal(b, cd).values == cd.values);
    CHECK_THROWS_AS(interaction_diagonal(b, CustomDiagonal{{1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(interaction_diagonal(b, OnsitePolynomial{{{1.0}}}), std::invalid_argument);
    for (double v : interaction_diagonal(b, NoInteraction{}).values) CHECK(v == 0);
}

TEST_CASE("hopping commutator identity") {
    auto lat = chain(4);
    auto basis = enumerate_sector(lat, 3);
    std::mt19937_64 rng(23);
    auto J = HoppingMatrix::from_entries(lat, oracle::random_hermitian(4, rng), 3);

    std::vector<double> flat(4, 0.7);
    auto r0 = check_hopping_commutator(basis, J, flat);
    CHECK(r0.residual == 0.0);

    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(4, 4);
    diag.diagonal() << 1, -2, 0.5, 3;
    auto g = oracle::random_reals(4, rng);
    CHECK(check_hopping_commutator(basis, HoppingMatrix::from_entries(lat, diag, 3), g).residual == 0.0);

    for (int trial = 0; trial < 20; ++trial) {
        auto Jr = HoppingMatrix::from_entries(lat, oracle::random_hermitian(4, rng), 3);
        auto gr = oracle::random_reals(4, rng, -3, 3);
        auto res = check_hopping_commutator(basis, Jr, gr, bose_hubbard(4, 0.9));
        CHECK(res.residual <= 1e-10 * std::max(res.scale, 1.0));
        CHECK(res.scale > 0);
    }
}

TEST_CASE("ladder relations") {
    auto lat = chain(3);
    auto basis = enumerate_sector(lat, 2);
    std::mt19937_64 rng(29);
    auto g = oracle::random_reals(3, rng);
    CHECK(check_ladder_relations(basis, g, 0, 0, 1).residual <= 1e-14);
    std::vector<double> zero(3, 0.0);
    CHECK(check_ladder_relations(basis, zero, 3, 2, 0).residual <= 1e-14);
    for (int q = 0; q <= 3; ++q)
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t y = 0; y < 3; ++y) {
                auto res = check_ladder_relations(basis, g, q, x, y);
                CHECK(res.residual <= 1e-10 * std::max(res.scale, 1.0));
            }
    CHECK(check_ladder_relations(enumerate_sector(lat, 0), g, 2, 0, 1).residual == 0.0);
    CHECK_THROWS_AS(check_ladder_relations(basis, g, -1, 0, 1), std::invalid_argument);
}

TEST_CASE("ladder maps are adjoint and match occupation arithmetic") {
    auto lat = chain(3);
    FockBasis hi(lat, 3), lo(lat, 2);
    auto dense_hi = oracle::sector(3, 3), dense_lo = oracle::sector(3, 2);
    for (std::size_t x = 0; x < 3; ++x) {
        auto a = oracle::dense(annihilation(hi, lo, x));
        auto c = oracle::dense(creation(lo, hi, x));
        REQUIRE(a.rows() == 6);
        REQUIRE(a.cols() == 10);
        CHECK(oracle::max_abs(a.adjoint() - c) == 0.0);
        for (std::size_t j = 0; j < hi.dimension(); ++j) {
            auto m = hi.state(j);
            if (m[x] == 0) {
                CHECK(a.col(j).norm() == 0.0);
                continue;
            }
            std::vector<Occupation> dn(m.begin(), m.end());
            --dn[x];
            CHECK(std::abs(a(lo.rank(dn), j) - std::sqrt(double(m[x]))) < 1e-15);
        }
    }
    CHECK_THROWS_AS(annihilation(lo, hi, 0), std::invalid_argument);
}

TEST_CASE("mott states") {
    auto lat = chain(3);
    auto b3 = enumerate_sector(lat, 3);
    std::vector<int> ones{1, 1, 1};
    auto psi = mott_state(b3, ones);
    CHECK(psi.norm() == 1.0);
    auto all = Region::make(3, {0, 1, 2});
    CHECK(expectation(region_number(b3, all), psi) == 3);
    CHECK(expectation(region_number(b3, all).pow(2), psi) == 9);

    std::vector<int> pile{3, 0, 0};
    auto piled = mott_state(b3, pile);
    CHECK(std::abs(piled.amplitudes(idx(*b3, {3, 0, 0})) - cplx(1)) == 0.0);

    auto b2 = enumerate_sector(lat, 2);
    std::vector<int> occ{1, 0, 1};
    auto psi2 = mott_state(b2, occ);
    auto X = Region::make(3, {0, 1});
    CHECK(moment_expectation(X, 1, psi2) == 1);
    CHECK(moment_expectation(X, 3, psi2) == 1);

    std::vector<int> mismatch{1, 1, 0};
    CHECK_THROWS_AS(mott_state(b3, mismatch), std::invalid_argument);
    std::vector<int> negative{4, -1, 0};
    CHECK_THROWS_AS(mott_state(b3, negative), std::invalid_argument);
}

TEST_CASE("moment expectation agrees with brute force") {
    auto lat = chain(4);
    auto basis = enumerate_sector(lat, 3);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    StateVector psi{basis, Eigen::VectorXcd(basis->dimension())};
    for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i) psi.amplitudes(i) = cplx(gauss(rng), gauss(rng));
    psi.amplitudes.normalize();
    auto X = Region::make(4, {0, 2, 3});
    for (int p = 1; p <= 4; ++p) {
        double brute = 0;
        for (std::size_t i = 0; i < basis->dimension(); ++i) {
            auto m = basis->state(i);
            brute += std::norm(psi.amplitudes(i)) * std::pow(double(m[0] + m[2] + m[3]), p);
        }
        CHECK(moment_expectation(X, p, psi) == doctest::Approx(brute).epsilon(1e-13));
    }
}

TEST_CASE("diagonal algebra and csv") {
    auto b = enumerate_sector(chain(2), 2);
    std::vector<double> g{2, -1};
    auto d = second_quantize(b, g);
    CHECK(d.pow(0).values == std::vector<double>(3, 1.0));
    CHECK(d.pow(2).values[idx(*b, {0, 2})] == 4);
    CHECK((d + 1.0).values[idx(*b, {2, 0})] == 5);
    CHECK((d * d).values == d.pow(2).values);
    CHECK_THROWS_AS(d.pow(-1), std::invalid_argument);

    std::ostringstream os;
    write_operator_csv(os, hop_operator(b, 0, 1));
    CHECK(os.str().rfind("row,col,re,im\n", 0) == 0);
}
