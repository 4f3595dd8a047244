#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "anyonpt/errors.hpp"

namespace anyonpt {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Uniform cell-centred grid on [x_min, x_max) with n_points cells.
///
/// Node j sits at x_min + (j + 1/2) dx. With x_min = -x_max the node set is
/// exactly mirror symmetric (x_{n-1-j} = -x_j), which is what the parity
/// operator acts on. Viewed periodically the grid is a ring of length
/// x_max - x_min, and integrals reduce to dx * sum, i.e. the periodic
/// trapezoidal rule.
class Grid {
public:
    static constexpr std::size_t min_points = 16;

    Grid(double x_min, double x_max, std::size_t n_points)
        : x_min_(x_min), x_max_(x_max), n_(n_points) {
        if (!(std::isfinite(x_min) && std::isfinite(x_max)) || !(x_min < x_max))
            throw ContractError("Grid: require finite x_min < x_max");
        if (n_points < min_points)
            throw ContractError("Grid: n_points must be at least 16");
        dx_ = (x_max - x_min) / static_cast<double>(n_points);
    }

    /// Default simulation box used throughout: [-40, 40] with 2048 cells.
    static Grid standard() { return Grid(-40.0, 40.0, 2048); }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return dx_; }
    double length() const { return x_max_ - x_min_; }

    double x(std::size_t j) const { return x_min_ + (static_cast<double>(j) + 0.5) * dx_; }

    std::vector<double> points() const {
        std::vector<double> xs(n_);
        for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
        return xs;
    }

    /// Angular wavenumbers in FFT order: 0, dk, ..., -dk.
    std::vector<double> wavenumbers() const {
        std::vector<double> k(n_);
        const double dk = 2.0 * pi / length();
        const auto n = static_cast<long long>(n_);
        for (long long m = 0; m < n; ++m) {
            const long long shifted = (m < (n + 1) / 2) ? m : m - n;
            k[static_cast<std::size_t>(m)] = dk * static_cast<double>(shifted);
        }
        return k;
    }

    /// Mirror partner of node j under x -> -x.
    std::size_t mirror(std::size_t j) const { return n_ - 1 - j; }

    bool is_symmetric(double rel_tol = 1e-12) const {
        return std::abs(x_min_ + x_max_) <= rel_tol * length();
    }

    /// Same number of cells, extent scaled by `factor` about the centre.
    Grid widened(double factor) const {
        const double c = 0.5 * (x_min_ + x_max_);
        const double h = 0.5 * length() * factor;
        return Grid(c - h, c + h, n_);
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    double dx_ = 0.0;
};

/// Integral of sampled values over the grid.
inline double integrate(const Grid& g, std::span<const double> f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.dx();
}

inline cplx integrate(const Grid& g, std::span<const cplx> f) {
    cplx s = 0.0;
    for (const cplx& v : f) s += v;
    return s * g.dx();
}

/// Complex field sampled on a Grid.
struct WaveFunction {
    Grid grid;
    std::vector<cplx> values;

    explicit WaveFunction(Grid g) : grid(g), values(g.size(), cplx{}) {}
    WaveFunction(Grid g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size())
            throw ContractError("WaveFunction: sample count does not match grid");
    }

    template <class F>
    static WaveFunction from_function(const Grid& g, F&& f) {
        WaveFunction w(g);
        for (std::size_t j = 0; j < g.size(); ++j) w.values[j] = f(g.x(j));
        return w;
    }

    std::size_t size() const { return values.size(); }

    std::vector<double> density() const {
        std::vector<double> rho(values.size());
        for (std::size_t j = 0; j < values.size(); ++j) rho[j] = std::norm(values[j]);
        return rho;
    }

    /// L2 norm squared, integral of |psi|^2.
    double norm_squared() const { return integrate(grid, density()); }

    bool is_finite() const {
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    WaveFunction normalized() const {
        const double n2 = norm_squared();
        if (!(n2 > 0.0) || !std::isfinite(n2))
            throw NumericalError("WaveFunction: cannot normalize a zero or non-finite field");
        WaveFunction out = *this;
        const double s = 1.0 / std::sqrt(n2);
        for (auto& v : out.values) v *= s;
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// <f|g> = integral of conj(f) g.
inline cplx inner(const WaveFunction& f, const WaveFunction& g) {
    if (!(f.grid == g.grid)) throw ContractError("inner: grids differ");
    cplx s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += std::conj(f.values[j]) * g.values[j];
    return s * f.grid.dx();
}

/// Unconjugated square integral, integral of f^2.
inline cplx bilinear_square(const WaveFunction& f) {
    cplx s = 0.0;
    for (const auto& v : f.values) s += v * v;
    return s * f.grid.dx();
}

}  // namespace anyonpt
