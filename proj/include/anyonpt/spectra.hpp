#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"
#include "anyonpt/hamiltonian.hpp"
#include "anyonpt/io.hpp"
#include "anyonpt/linalg.hpp"
#include "anyonpt/params.hpp"

namespace anyonpt {

/// Continuum branch of H_eff: E(k) = e^{-i phi} k^2 - k v.
inline cplx continuous_dispersion(double k, const AnyonicParams& p) { return p.rotation() * (k * k) - k * p.v; }

struct DispersionCurve {
    std::vector<double> k_samples;
    std::vector<cplx> energy;
};

inline DispersionCurve dispersion_curve(std::span<const double> ks, const AnyonicParams& p) {
    DispersionCurve c;
    c.k_samples.assign(ks.begin(), ks.end());
    c.energy.reserve(ks.size());
    for (double k : ks) c.energy.push_back(continuous_dispersion(k, p));
    return c;
}

inline DispersionCurve dispersion_curve(double k_min, double k_max, std::size_t n, const AnyonicParams& p) {
    if (n < 2 || !(k_max > k_min)) throw ContractError("dispersion_curve: need n >= 2 and k_max > k_min");
    std::vector<double> ks(n);
    for (std::size_t j = 0; j < n; ++j)
        ks[j] = k_min + (k_max - k_min) * static_cast<double>(j) / static_cast<double>(n - 1);
    return dispersion_curve(ks, p);
}

/// Bound-state energies E_1 < ... < E_N < 0 of a Poschl-Teller well.
struct BoundStateFamily {
    std::vector<double> energies;
    std::size_t count() const { return energies.size(); }
};

/// E_n = -(nu - n + 1)^2 for n = 1 .. 1 + floor(nu). For integer nu the last
/// level sits at E = 0, which is the unbound edge state and is dropped.
inline BoundStateFamily poschl_teller_energies(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("poschl_teller_energies: nu must be positive");
    BoundStateFamily f;
    const auto levels = 1 + static_cast<long>(std::floor(nu));
    for (long n = 1; n <= levels; ++n) {
        const double kappa = nu - static_cast<double>(n) + 1.0;
        if (kappa > 0.0) f.energies.push_back(-kappa * kappa);
    }
    return f;
}

/// Point eigenvalue of H_eff inherited from a stationary bound state:
/// E_n e^{-i phi} + beta.
inline cplx shifted_point_energy(double e_n, const AnyonicParams& p) {
    if (!(e_n < 0.0)) throw DomainError("shifted_point_energy: E_n must be negative");
    return e_n * p.rotation() + GaugeFactors::from(p).beta;
}

/// Drift speed at which the bound state of energy E_n delocalises:
/// 2 sqrt|E_n| / sin(phi). No finite threshold exists at phi = 0.
inline std::optional<double> critical_velocity(double e_n, double phi) {
    if (!(e_n < 0.0)) throw DomainError("critical_velocity: E_n must be negative");
    if (phi < 0.0 || phi > 0.5 * pi) throw DomainError("critical_velocity: phi must lie in [0, pi/2]");
    const double s = std::sin(phi);
    if (s == 0.0) return std::nullopt;
    return 2.0 * std::sqrt(-e_n) / s;
}

/// Wavenumber of the continuum state the point eigenvalue merges with at v_c.
inline double critical_wavenumber(double e_n, double phi) {
    if (!(e_n < 0.0)) throw DomainError("critical_wavenumber: E_n must be negative");
    if (!(phi > 0.0) || phi > 0.5 * pi) throw DomainError("critical_wavenumber: phi must lie in (0, pi/2]");
    if (phi == 0.5 * pi) return 0.0;
    return std::sqrt(-e_n) / std::tan(phi);
}

/// sqrt|E_n| - |v/2| sin(phi): the slower of the two tail decay rates of the
/// gauge-transformed bound state. Positive iff that state is normalisable.
inline double delocalization_margin(double e_n, const AnyonicParams& p) {
    return std::sqrt(std::abs(e_n)) - std::abs(0.5 * p.v) * std::sin(p.phi);
}

namespace detail {

// a * e^z without overflowing when |a| is tiny and Re z is large.
inline cplx times_exp(cplx a, cplx z) {
    if (a == cplx{}) return a;
    return std::exp(std::log(a) + z);
}

}  // namespace detail

/// u_n(x) e^{i alpha x}, renormalised, or nullopt once the drift has
/// delocalised it.
inline std::optional<WaveFunction> moving_bound_state(const WaveFunction& u_n, double e_n, const AnyonicParams& p) {
    if (!(e_n < 0.0)) throw DomainError("moving_bound_state: E_n must be negative");
    if (!(delocalization_margin(e_n, p) > 0.0)) return std::nullopt;
    const cplx alpha = GaugeFactors::from(p).alpha;
    WaveFunction out = u_n;
    for (std::size_t j = 0; j < out.size(); ++j)
        out.values[j] = detail::times_exp(out.values[j], cplx(0.0, 1.0) * alpha * out.grid.x(j));
    return out.normalized();
}

/// (integral |u|^2)^2 / integral |u|^4, a length: ~ box size for extended
/// states, ~ localisation length for bound ones.
inline double participation_ratio(const WaveFunction& u) {
    const auto rho = u.density();
    double s2 = 0.0, s4 = 0.0;
    for (double r : rho) {
        s2 += r;
        s4 += r * r;
    }
    if (!(s4 > 0.0)) throw NumericalError("participation_ratio: zero field");
    return s2 * s2 / s4 * u.grid.dx();
}

/// Localisation length from exponential fits to both tails of |u|.
///
/// On each side of the peak the points with amplitude between 1e-10 and
/// 1e-2 of the maximum (out to half the box for periodic fields, the wall
/// otherwise, and no further than the tail minimum) are fitted to ln|u| = a - kappa |x - x_peak|. The length is
/// 1 / min(kappa_left, kappa_right), capped at the box length; a side that
/// never drops into the window counts as non-decaying.
inline double localization_length(const WaveFunction& u, bool periodic = false) {
    const Grid& g = u.grid;
    const std::size_t n = u.size();
    std::size_t peak = 0;
    double amax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::abs(u.values[j]);
        if (a > amax) {
            amax = a;
            peak = j;
        }
    }
    if (!(amax > 0.0)) throw NumericalError("localization_length: zero field");
    const double box = g.length();
    const double hi = 1e-2 * amax;
    const double lo = 1e-10 * amax;

    auto fit_side = [&](int dir) -> double {
        const std::size_t reach = periodic ? n / 2 : (dir > 0 ? n - 1 - peak : peak);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t m = 0;
        double first = -1.0, last = -1.0;
        double lowest = amax;
        for (std::size_t step = 1; step <= reach; ++step) {
            const auto idx = static_cast<long long>(peak) + dir * static_cast<long long>(step);
            const auto wrapped = static_cast<std::size_t>((idx % static_cast<long long>(n) + static_cast<long long>(n)) %
                                                          static_cast<long long>(n));
            const double a = std::abs(u.values[wrapped]);
            // stop at the floor, or where the tail meets the other side's
            if (a < lo || a > 2.0 * lowest) break;
            lowest = std::min(lowest, a);
            if (a > hi) continue;
            const double d = static_cast<double>(step) * g.dx();
            const double y = std::log(a);
            sx += d;
            sy += y;
            sxx += d * d;
            sxy += d * y;
            ++m;
            if (first < 0.0) first = d;
            last = d;
        }
        if (m < 8 || last - first < 1.0) return 0.0;
        const double mm = static_cast<double>(m);
        const double slope = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
        return std::max(0.0, -slope);
    };

    const double kappa = std::min(fit_side(-1), fit_side(+1));
    if (kappa * box <= 1.0) return box;
    return 1.0 / kappa;
}

enum class SpectralClass { Point, Continuum };

inline const char* to_string(SpectralClass c) { return c == SpectralClass::Point ? "point" : "continuum"; }

struct SpectrumOptions {
    /// Point iff participation ratio < point_fraction * box length.
    double point_fraction = 0.2;
    bool compute_vectors = true;
    int inverse_iterations = 3;
};

struct SpectrumResult {
    std::vector<cplx> eigenvalues;
    std::vector<WaveFunction> eigenvectors;
    std::vector<SpectralClass> classification;
    std::vector<double> participation;
    std::vector<double> localization_length;

    std::size_t size() const { return eigenvalues.size(); }

    std::size_t point_count() const {
        return static_cast<std::size_t>(std::count(classification.begin(), classification.end(), SpectralClass::Point));
    }

    std::vector<std::size_t> point_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < classification.size(); ++j)
            if (classification[j] == SpectralClass::Point) idx.push_back(j);
        return idx;
    }

    /// Point eigenvalue with the largest imaginary part (the dominant mode).
    std::optional<std::size_t> dominant_point() const {
        std::optional<std::size_t> best;
        for (std::size_t j : point_indices())
            if (!best || eigenvalues[j].imag() > eigenvalues[*best].imag()) best = j;
        return best;
    }
};

inline constexpr std::size_t max_dense_dimension = 8192;

/// All eigenpairs of H_eff, sorted by (Re E, Im E), with each eigenvector
/// normalised and classified as a point or continuum state.
inline SpectrumResult solve_spectrum(const HamiltonianMatrix& h, const SpectrumOptions& opt = {}) {
    if (h.size() > max_dense_dimension)
        throw ContractError("solve_spectrum: matrix dimension exceeds the dense limit of 8192");
    SpectrumResult r;
    r.eigenvalues = linalg::eigenvalues(h);
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    if (!opt.compute_vectors) return r;

    const bool periodic = h.boundary() == Boundary::Periodic;
    const double threshold = opt.point_fraction * h.grid().length();
    r.eigenvectors.reserve(r.size());
    for (const cplx& lambda : r.eigenvalues) {
        WaveFunction u(h.grid(), linalg::inverse_iteration(h, lambda, opt.inverse_iterations));
        u = u.normalized();
        const double pr = participation_ratio(u);
        r.participation.push_back(pr);
        r.classification.push_back(pr < threshold ? SpectralClass::Point : SpectralClass::Continuum);
        r.localization_length.push_back(localization_length(u, periodic));
        r.eigenvectors.push_back(std::move(u));
    }
    return r;
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumResult& r) {
    os << "re_e,im_e,classification,localization_length\n";
    for (std::size_t j = 0; j < r.size(); ++j) {
        os << fmt(r.eigenvalues[j].real()) << ',' << fmt(r.eigenvalues[j].imag()) << ',';
        if (j < r.classification.size())
            os << to_string(r.classification[j]) << ',' << fmt(r.localization_length[j]);
        else
            os << ',';
        os << '\n';
    }
}

}  // namespace anyonpt
