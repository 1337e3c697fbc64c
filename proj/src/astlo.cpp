#include "lightcone/astlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lightcone {

AstloParams make_astlo_params(double R, double r, double v, double kappa) {
    if (!(kappa >= 0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be nonnegative");
    if (!(v > kappa) || !std::isfinite(v)) throw std::invalid_argument("velocity v must exceed kappa");
    if (!(r >= 0)) throw std::invalid_argument("inner radius r must be nonnegative");
    if (!(R > r) || !std::isfinite(R)) throw std::invalid_argument("outer radius R must exceed r");
    AstloParams p;
    p.R = R;
    p.r = r;
    p.v = v;
    p.kappa = kappa;
    p.v_prime = 0.5 * (kappa + v);
    p.epsilon = v - p.v_prime;
    p.s = (R - r) / v;
    p.f = std::make_shared<const CutoffFunction>(p.epsilon);
    return p;
}

double profile_fts(const AstloParams& params, double t, double site_distance) {
    if (!(t >= 0)) throw std::invalid_argument("profile time must be nonnegative");
    return (*params.f)((params.R - params.v_prime * t - site_distance) / params.s);
}

double profile_fprime_ts(const AstloParams& params, double t, double site_distance) {
    if (!(t >= 0)) throw std::invalid_argument("profile time must be nonnegative");
    return params.f->derivative((params.R - params.v_prime * t - site_distance) / params.s);
}

std::vector<double> profile_sites(const AstloParams& params, const Lattice& lattice, double t) {
    std::vector<double> g(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i) g[i] = profile_fts(params, t, lattice.norm(i));
    return g;
}

DiagonalOperator astlo_operator(const BasisPtr& basis, const AstloParams& params, double t) {
    return second_quantize(basis, profile_sites(params, *basis->lattice(), t));
}

DiagonalOperator astlo_fprime_operator(const BasisPtr& basis, const AstloParams& params, double t) {
    const Lattice& lat = *basis->lattice();
    std::vector<double> g(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) g[i] = profile_fprime_ts(params, t, lat.norm(i));
    return second_quantize(basis, g);
}

DiagonalOperator astlo_time_derivative(const BasisPtr& basis, const AstloParams& params, double t) {
    DiagonalOperator d = astlo_fprime_operator(basis, params, t);
    const double c = -params.v_prime / params.s;
    for (auto& x : d.values) x *= c;
    return d;
}

DiagonalOperator astlo_power(const BasisPtr& basis, const AstloParams& params, double t, int p) {
    if (p < 1) throw std::invalid_argument("ASTLO power must be at least 1");
    return astlo_operator(basis, params, t).pow(p);
}

BracketViolation bracketing_check(const AstloParams& params, double t, const std::vector<double>& distances) {
    if (!(t >= 0)) throw std::invalid_argument("bracketing time must be nonnegative");
    if (t > params.s) throw std::invalid_argument("bracketing requires t <= s");
    BracketViolation out;
    const double R_cut = params.R + radius_tolerance(params.R);
    const double r_cut = params.r + radius_tolerance(params.r);
    for (double d : distances) {
        const double chi_R = d <= R_cut ? 1.0 : 0.0;
        const double chi_r = d <= r_cut ? 1.0 : 0.0;
        out.upper = std::max(out.upper, profile_fts(params, 0.0, d) - chi_R);
        out.lower = std::max(out.lower, chi_r - profile_fts(params, t, d));
    }
    return out;
}

BracketViolation bracketing_check(const AstloParams& params, double t) {
    const double top = params.R + 1.0;
    std::vector<double> distances = uniform_grid(0.0, top, 4001);
    for (double extra : {params.r, params.R, std::nextafter(params.R, top), std::nextafter(params.r, top)})
        distances.push_back(extra);
    std::sort(distances.begin(), distances.end());
    return bracketing_check(params, t, distances);
}

}  // namespace lightcone
