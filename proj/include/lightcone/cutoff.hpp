#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace lightcone {

/// Smooth nondecreasing step f with f = 0 below eps/2, f = 1 above eps and
/// sqrt(f') smooth:
///
///   f(mu) = (1/Z) int_{-inf}^{mu} b(sigma)^2 dsigma,
///   b(sigma) = exp(-k / ((sigma - eps/2)(eps - sigma)))  on (eps/2, eps).
///
/// k is the sharpness (1 for the standard member). The integrand is handled
/// relative to its peak value so that small eps does not underflow;
/// norm_constant() is Z in those units and log_norm_constant() is log Z.
class CutoffFunction {
public:
    explicit CutoffFunction(double epsilon, double sharpness = 1.0, std::size_t cells = 4096);

    double epsilon() const { return epsilon_; }
    double sharpness() const { return sharpness_; }

    double operator()(double mu) const;
    /// Analytic f'.
    double derivative(double mu) const;
    /// Analytic sqrt(f').
    double sqrt_derivative(double mu) const;

    /// Nodes cover [eps/2 - margin, eps + margin]; the core [eps/2, eps] is split
    /// into `cells` equal cells.
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& f_values() const { return f_; }
    const std::vector<double>& fprime_values() const { return fp_; }
    const std::vector<double>& sqrt_fprime_values() const { return u_; }
    std::size_t core_begin() const { return core_begin_; }
    std::size_t core_end() const { return core_begin_ + cells_; }

    double norm_constant() const { return z_; }
    double log_norm_constant() const;

private:
    double log_weight(double mu) const;  // 2k/q_m - 2k/q, -inf outside the core

    double epsilon_;
    double sharpness_;
    std::size_t cells_;
    std::size_t core_begin_ = 0;
    double h_ = 0.0;
    double q_peak_ = 0.0;
    double z_ = 0.0;
    std::vector<double> grid_, f_, fp_, u_;
};

CutoffFunction make_cutoff(double epsilon);

/// mu, f, fprime with 17 significant digits.
void write_cutoff_csv(std::ostream& os, const CutoffFunction& f);

/// max over pairs x != y of |f(x) - f(y) - (x - y) u(x) u(y)| / (x - y)^2.
double expansion_check(const CutoffFunction& f, const std::vector<double>& grid);

/// Smallest C with f1' <= C f2' on the grid; infinity if f2' vanishes where f1' does not.
double derivative_domination(const CutoffFunction& f1, const CutoffFunction& f2, const std::vector<double>& grid);

/// Smallest C with f1 + f2 <= C f3 on the grid; infinity if impossible.
double sum_domination(const CutoffFunction& f1, const CutoffFunction& f2, const CutoffFunction& f3,
                      const std::vector<double>& grid);

/// n equally spaced points on [a, b], endpoints included.
std::vector<double> uniform_grid(double a, double b, std::size_t n);

}  // namespace lightcone
