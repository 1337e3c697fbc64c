#include "lightcone/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>

namespace lightcone {

double radius_tolerance(double h) { return 1e-9 * (1.0 + std::abs(h)); }

Lattice::Lattice(int dim, std::vector<Coord> sites, Coord origin)
    : dim_(dim), sites_(std::move(sites)), origin_(std::move(origin)) {
    if (dim_ <= 0) throw std::invalid_argument("lattice dimension must be positive");
    if (sites_.empty()) throw std::invalid_argument("lattice must contain at least one site");
    if (origin_.empty()) origin_.assign(static_cast<std::size_t>(dim_), 0.0);
    if (origin_.size() != static_cast<std::size_t>(dim_))
        throw std::invalid_argument("origin has wrong dimension");
    for (const auto& x : sites_) {
        if (x.size() != static_cast<std::size_t>(dim_))
            throw std::invalid_argument("site coordinate has wrong dimension");
        for (double c : x)
            if (!std::isfinite(c)) throw std::invalid_argument("site coordinate is not finite");
    }
    std::sort(sites_.begin(), sites_.end());
    // Duplicates have distance 0 and are caught here as well.
    for (std::size_t i = 0; i < sites_.size(); ++i)
        for (std::size_t j = i + 1; j < sites_.size(); ++j)
            if (!(distance(i, j) > 1.0))
                throw std::invalid_argument("sites " + std::to_string(i) + " and " + std::to_string(j) +
                                            " are not separated by more than one");
}

double Lattice::distance(std::size_t i, std::size_t j) const { return distance_to(i, sites_[j]); }

double Lattice::distance_to(std::size_t i, const Coord& point) const {
    double acc = 0.0;
    for (int k = 0; k < dim_; ++k) {
        const double d = sites_[i][k] - point[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double Lattice::min_separation() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = i + 1; j < size(); ++j) best = std::min(best, distance(i, j));
    return best;
}

bool Lattice::same_sites(const Lattice& other) const {
    return dim_ == other.dim_ && sites_ == other.sites_ && origin_ == other.origin_;
}

bool Region::contains(std::size_t i) const { return std::binary_search(indices.begin(), indices.end(), i); }

bool Region::subset_of(const Region& other) const {
    return std::includes(other.indices.begin(), other.indices.end(), indices.begin(), indices.end());
}

Region Region::complement() const {
    Region out{lattice_size, {}};
    for (std::size_t i = 0; i < lattice_size; ++i)
        if (!contains(i)) out.indices.push_back(i);
    return out;
}

Region Region::unite(const Region& other) const {
    if (other.lattice_size != lattice_size) throw std::invalid_argument("regions live on different lattices");
    Region out{lattice_size, {}};
    std::set_union(indices.begin(), indices.end(), other.indices.begin(), other.indices.end(),
                   std::back_inserter(out.indices));
    return out;
}

std::vector<double> Region::indicator() const {
    std::vector<double> chi(lattice_size, 0.0);
    for (auto i : indices) chi[i] = 1.0;
    return chi;
}

Region Region::make(std::size_t lattice_size, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    if (!indices.empty() && indices.back() >= lattice_size)
        throw std::out_of_range("region index outside the lattice");
    return Region{lattice_size, std::move(indices)};
}

Lattice build_box_lattice(int d, int half_extent, double spacing) {
    if (d <= 0) throw std::invalid_argument("box lattice dimension must be positive");
    if (half_extent < 0) throw std::invalid_argument("half_extent must be nonnegative");
    if (!(spacing > 1.0)) throw std::invalid_argument("spacing must exceed 1 (sites must be separated by more than one)");

    const int side = 2 * half_extent + 1;
    std::size_t count = 1;
    for (int k = 0; k < d; ++k) count *= static_cast<std::size_t>(side);

    std::vector<Coord> sites;
    sites.reserve(count);
    std::vector<int> z(static_cast<std::size_t>(d), -half_extent);
    for (std::size_t n = 0; n < count; ++n) {
        Coord x(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) x[k] = spacing * z[k];
        sites.push_back(std::move(x));
        for (int k = d - 1; k >= 0; --k) {
            if (++z[k] <= half_extent) break;
            z[k] = -half_extent;
        }
    }
    Lattice lat(d, std::move(sites));
    lat.half_extent = half_extent;
    lat.spacing = spacing;
    return lat;
}

Lattice build_chain(std::size_t n, double spacing) {
    if (n == 0) throw std::invalid_argument("chain needs at least one site");
    if (!(spacing > 1.0)) throw std::invalid_argument("spacing must exceed 1 (sites must be separated by more than one)");
    const auto shift = static_cast<double>((n - 1) / 2);
    std::vector<Coord> sites;
    for (std::size_t i = 0; i < n; ++i) sites.push_back({spacing * (static_cast<double>(i) - shift)});
    Lattice lat(1, std::move(sites));
    lat.spacing = spacing;
    if (n % 2 == 1) lat.half_extent = static_cast<int>((n - 1) / 2);
    return lat;
}

Region ball(const Lattice& lattice, double h) { return ball(lattice, h, lattice.origin()); }

Region ball(const Lattice& lattice, double h, const Coord& center) {
    if (h < 0) throw std::invalid_argument("ball radius must be nonnegative");
    if (center.size() != static_cast<std::size_t>(lattice.dim()))
        throw std::invalid_argument("ball center has wrong dimension");
    Region out{lattice.size(), {}};
    const double cut = h + radius_tolerance(h);
    for (std::size_t i = 0; i < lattice.size(); ++i)
        if (lattice.distance_to(i, center) <= cut) out.indices.push_back(i);
    return out;
}

Region shell(const Lattice& lattice, double h) { return shell(lattice, h, lattice.origin()); }

Region shell(const Lattice& lattice, double h, const Coord& center) {
    if (h < 0) throw std::invalid_argument("shell radius must be nonnegative");
    Region out{lattice.size(), {}};
    const double tol = radius_tolerance(h);
    for (std::size_t i = 0; i < lattice.size(); ++i)
        if (std::abs(lattice.distance_to(i, center) - h) <= tol) out.indices.push_back(i);
    return out;
}

GrowthConstants measure_growth(const Lattice& lattice, const std::vector<double>& h_grid) {
    if (h_grid.empty()) throw std::invalid_argument("growth probe grid is empty");
    GrowthConstants g;
    g.h_grid = h_grid;
    const double d = lattice.dim();
    for (double h : h_grid) {
        if (!(h > 0)) throw std::invalid_argument("growth probe radii must be strictly positive");
        g.V_d = std::max(g.V_d, static_cast<double>(ball(lattice, h).size()) / std::pow(h, d));
        g.omega_dm1 = std::max(g.omega_dm1, static_cast<double>(shell(lattice, h).size()) / std::pow(h, d - 1));
    }
    return g;
}

}  // namespace lightcone
