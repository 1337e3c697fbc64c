#include "lightcone/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lightcone/csv.hpp"

namespace lightcone {

namespace {

constexpr std::size_t kMarginCells = 16;
constexpr double kAbsTol = 1e-12;

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

/// Bisects until the Kronrod error estimate meets an absolute tolerance.
template <typename F>
double integrate_abs(const F& f, double a, double b, double tol, int depth) {
    double err = 0.0;
    const double value = Rule::integrate(f, a, b, 0, 0.0, &err);
    // The non-adaptive path reports the error on the reference interval.
    err *= 0.5 * (b - a);
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
    if (err <= std::max(tol, floor) || depth == 0) return value;
    const double mid = 0.5 * (a + b);
    return integrate_abs(f, a, mid, 0.5 * tol, depth - 1) + integrate_abs(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace

CutoffFunction::CutoffFunction(double epsilon, double sharpness, std::size_t cells)
    : epsilon_(epsilon), sharpness_(sharpness), cells_(cells) {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) throw std::invalid_argument("cutoff epsilon must be positive");
    if (!(sharpness > 0) || !std::isfinite(sharpness)) throw std::invalid_argument("cutoff sharpness must be positive");
    if (cells < 2 || cells % 2 != 0) throw std::invalid_argument("cutoff needs an even number of cells");

    const double a = 0.5 * epsilon_;
    h_ = (epsilon_ - a) / static_cast<double>(cells_);
    q_peak_ = 0.0625 * epsilon_ * epsilon_;

    auto w = [this](double mu) { return std::exp(log_weight(mu)); };
    std::vector<double> cumulative(cells_ + 1, 0.0);
    for (std::size_t c = 0; c < cells_; ++c) {
        const double lo = a + h_ * static_cast<double>(c);
        const double hi = c + 1 == cells_ ? epsilon_ : a + h_ * static_cast<double>(c + 1);
        cumulative[c + 1] = cumulative[c] + integrate_abs(w, lo, hi, kAbsTol * (hi - lo) / (epsilon_ - a), 20);
    }
    z_ = cumulative.back();

    core_begin_ = kMarginCells;
    const std::size_t total = cells_ + 1 + 2 * kMarginCells;
    grid_.resize(total);
    f_.assign(total, 0.0);
    fp_.assign(total, 0.0);
    u_.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        const auto offset = static_cast<double>(i) - static_cast<double>(kMarginCells);
        grid_[i] = a + h_ * offset;
    }
    grid_[core_begin_] = a;
    grid_[core_end()] = epsilon_;
    for (std::size_t c = 0; c <= cells_; ++c) {
        const std::size_t i = core_begin_ + c;
        f_[i] = std::min(cumulative[c] / z_, 1.0);
        fp_[i] = derivative(grid_[i]);
        u_[i] = sqrt_derivative(grid_[i]);
    }
    f_[core_end()] = 1.0;
    for (std::size_t i = core_end() + 1; i < total; ++i) f_[i] = 1.0;
}

double CutoffFunction::log_weight(double mu) const {
    const double q = (mu - 0.5 * epsilon_) * (epsilon_ - mu);
    if (!(q > 0)) return -std::numeric_limits<double>::infinity();
    return 2.0 * sharpness_ / q_peak_ - 2.0 * sharpness_ / q;
}

double CutoffFunction::log_norm_constant() const { return std::log(z_) - 2.0 * sharpness_ / q_peak_; }

double CutoffFunction::derivative(double mu) const {
    // f' is the square of the smooth root, so the pair agrees to one rounding.
    const double u = sqrt_derivative(mu);
    return u * u;
}

double CutoffFunction::sqrt_derivative(double mu) const {
    if (!(mu > 0.5 * epsilon_ && mu < epsilon_)) return 0.0;
    return std::exp(0.5 * log_weight(mu)) / std::sqrt(z_);
}

double CutoffFunction::operator()(double mu) const {
    if (std::isnan(mu)) throw std::invalid_argument("cutoff evaluated at NaN");
    if (mu <= 0.5 * epsilon_) return 0.0;
    if (mu >= epsilon_) return 1.0;
    const double pos = (mu - 0.5 * epsilon_) / h_;
    std::size_t c = std::min(static_cast<std::size_t>(pos), cells_ - 1);
    const std::size_t i = core_begin_ + c;
    const double x0 = grid_[i], x1 = grid_[i + 1];
    const double dx = x1 - x0;
    const double y0 = f_[i], y1 = f_[i + 1];
    const double slope = (y1 - y0) / dx;
    if (slope <= 0.0) return y0;
    // Fritsch-Carlson limiter keeps the cubic monotone in this cell.
    double a = fp_[i] / slope, b = fp_[i + 1] / slope;
    const double rr = a * a + b * b;
    if (rr > 9.0) {
        const double scale = 3.0 / std::sqrt(rr);
        a *= scale;
        b *= scale;
    }
    // Normalized cubic on [0, 1]; adding it to y0 avoids cancellation near f = 1.
    const double s = (mu - x0) / dx;
    const double phi = s * s * (3 - 2 * s) + s * (1 - s) * (1 - s) * a - s * s * (1 - s) * b;
    return std::clamp(y0 + (y1 - y0) * std::clamp(phi, 0.0, 1.0), y0, y1);
}

CutoffFunction make_cutoff(double epsilon) { return CutoffFunction(epsilon); }

void write_cutoff_csv(std::ostream& os, const CutoffFunction& f) {
    CsvWriter csv(os);
    csv.header({"mu", "f", "fprime"});
    for (std::size_t i = 0; i < f.grid().size(); ++i) csv.row(f.grid()[i], f.f_values()[i], f.fprime_values()[i]);
}

double expansion_check(const CutoffFunction& f, const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("expansion check needs at least two grid points");
    std::vector<double> fv(grid.size()), uv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fv[i] = f(grid[i]);
        uv[i] = f.sqrt_derivative(grid[i]);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double d = grid[i] - grid[j];
            if (d == 0.0) continue;
            worst = std::max(worst, std::abs(fv[i] - fv[j] - d * uv[i] * uv[j]) / (d * d));
        }
    return worst;
}

double derivative_domination(const CutoffFunction& f1, const CutoffFunction& f2, const std::vector<double>& grid) {
    double c = 0.0;
    for (double mu : grid) {
        const double a = f1.derivative(mu);
        if (a == 0.0) continue;
        const double b = f2.derivative(mu);
        if (b == 0.0) return std::numeric_limits<double>::infinity();
        c = std::max(c, a / b);
    }
    return c;
}

double sum_domination(const CutoffFunction& f1, const CutoffFunction& f2, const CutoffFunction& f3,
                      const std::vector<double>& grid) {
    double c = 0.0;
    for (double mu : grid) {
        const double a = f1(mu) + f2(mu);
        if (a == 0.0) continue;
        const double b = f3(mu);
        if (b == 0.0) return std::numeric_limits<double>::infinity();
        c = std::max(c, a / b);
    }
    return c;
}

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    if (n < 2) throw std::invalid_argument("grid needs at least two points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = b;
    return g;
}

}  // namespace lightcone
