#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace lightcone {

using Coord = std::vector<double>;

/// Absolute tolerance used when comparing a site distance against a radius h.
/// Scales as 1e-9 * (1 + h) so that lattices built with spacing 1 + 1e-9
/// keep integer-radius balls intact out to any extent.
double radius_tolerance(double h);

/// Finite point set in R^d with pairwise separation greater than one.
///
/// Sites are kept in lexicographic coordinate order; index i <-> site i is
/// fixed once constructed. Distances are Euclidean. |x| is measured from
/// origin(), which defaults to the coordinate origin.
class Lattice {
public:
    Lattice(int dim, std::vector<Coord> sites, Coord origin = {});

    int dim() const { return dim_; }
    std::size_t size() const { return sites_.size(); }
    const Coord& site(std::size_t i) const { return sites_[i]; }
    const std::vector<Coord>& sites() const { return sites_; }
    const Coord& origin() const { return origin_; }

    double distance(std::size_t i, std::size_t j) const;
    double distance_to(std::size_t i, const Coord& point) const;
    /// |x_i| relative to origin().
    double norm(std::size_t i) const { return distance_to(i, origin_); }
    double min_separation() const;

    /// Box metadata, present only for lattices produced by build_box_lattice.
    std::optional<int> half_extent;
    std::optional<double> spacing;

    bool same_sites(const Lattice& other) const;

private:
    int dim_;
    std::vector<Coord> sites_;
    Coord origin_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

/// Sorted, duplicate-free subset of site indices of a lattice with
/// `lattice_size` sites.
struct Region {
    std::size_t lattice_size = 0;
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
    bool contains(std::size_t i) const;
    bool subset_of(const Region& other) const;
    Region complement() const;
    Region unite(const Region& other) const;
    /// 0/1 indicator over all sites.
    std::vector<double> indicator() const;

    static Region make(std::size_t lattice_size, std::vector<std::size_t> indices);
};

struct GrowthConstants {
    double V_d = 0.0;
    double omega_dm1 = 0.0;
    std::vector<double> h_grid;
};

/// Sites spacing * z for z in Z^d with max-norm <= half_extent.
Lattice build_box_lattice(int d, int half_extent, double spacing);

/// n equally spaced sites on a line, centered on the origin when n is odd
/// (sites at spacing * (i - (n-1)/2)); for even n the origin sits on site n/2 - 1.
Lattice build_chain(std::size_t n, double spacing);

/// B_h = {x : |x - center| <= h}.
Region ball(const Lattice& lattice, double h);
Region ball(const Lattice& lattice, double h, const Coord& center);

/// S_h = {x : |x - center| = h} within radius_tolerance(h).
Region shell(const Lattice& lattice, double h);
Region shell(const Lattice& lattice, double h, const Coord& center);

GrowthConstants measure_growth(const Lattice& lattice, const std::vector<double>& h_grid);

}  // namespace lightcone
