#pragma once

#include <memory>
#include <vector>

#include "lightcone/cutoff.hpp"
#include "lightcone/fock_space.hpp"
#include "lightcone/lattice.hpp"

namespace lightcone {

/// Velocity and geometry bundle: v' = (kappa + v)/2, eps = v - v', s = (R - r)/v.
struct AstloParams {
    double R = 0.0;
    double r = 0.0;
    double v = 0.0;
    double kappa = 0.0;
    double v_prime = 0.0;
    double epsilon = 0.0;
    double s = 0.0;
    std::shared_ptr<const CutoffFunction> f;

    double eta() const { return R - r; }
};

/// Requires v > kappa >= 0 and R > r >= 0.
AstloParams make_astlo_params(double R, double r, double v, double kappa);

/// f((R - v't - |x|)/s)
double profile_fts(const AstloParams& params, double t, double site_distance);
/// f'((R - v't - |x|)/s)
double profile_fprime_ts(const AstloParams& params, double t, double site_distance);

std::vector<double> profile_sites(const AstloParams& params, const Lattice& lattice, double t);

/// N_{f,ts} = dGamma(f_ts)
DiagonalOperator astlo_operator(const BasisPtr& basis, const AstloParams& params, double t);
/// N_{f',ts} = dGamma(f'_ts)
DiagonalOperator astlo_fprime_operator(const BasisPtr& basis, const AstloParams& params, double t);
/// d/dt N_{f,ts} = -(v'/s) N_{f',ts}
DiagonalOperator astlo_time_derivative(const BasisPtr& basis, const AstloParams& params, double t);
/// (N_{f,ts})^p, p >= 1.
DiagonalOperator astlo_power(const BasisPtr& basis, const AstloParams& params, double t, int p);

struct BracketViolation {
    double upper = 0.0;  ///< max (f_0s - chi_{B_R})_+
    double lower = 0.0;  ///< max (chi_{B_r} - f_ts)_+

    double worst() const { return upper > lower ? upper : lower; }
};

/// Checks chi_{B_r} <= f_ts and f_0s <= chi_{B_R} at the given distances from the origin.
/// Requires 0 <= t <= s.
BracketViolation bracketing_check(const AstloParams& params, double t, const std::vector<double>& distances);
/// Same on a dense radial grid over [0, R + 1] that contains r and R.
BracketViolation bracketing_check(const AstloParams& params, double t);

}  // namespace lightcone
