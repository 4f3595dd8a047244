#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <vector>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"
#include "anyonpt/io.hpp"
#include "anyonpt/params.hpp"
#include "anyonpt/potential.hpp"
#include "anyonpt/propagation.hpp"
#include "anyonpt/spectra.hpp"

namespace anyonpt {

/// Second root of E(q) = E(k) on the dispersion: k_r = -k + v e^{i phi}.
/// Im k_r = v sin(phi), so the reflected wave is evanescent whenever the
/// potential drifts in the anyonic phase.
inline cplx reflected_wavenumber(double k, const AnyonicParams& p) {
    return {-k + p.v * std::cos(p.phi), p.v * std::sin(p.phi)};
}

/// Re dE/dk = 2 k cos(phi) - v.
inline double group_velocity(double k, const AnyonicParams& p) { return 2.0 * k * std::cos(p.phi) - p.v; }

inline constexpr double evanescence_threshold = 1e-9;

struct ReflectionTransmission {
    cplx r;
    cplx t;
};

namespace detail {

inline constexpr double degenerate_basis_gap = 1e-6;

}  // namespace detail

/// Stationary r(k), t(k) for an incident e^{ikx} travelling to the right.
///
/// The solution t e^{ikx} (t = 1) is shot from x = +L0 back to x = -L0 with
/// classical RK4 at step dx / 4 and projected there onto e^{ikx}, e^{i k_r x}.
/// Amplitudes are referred to x = 0.
inline ReflectionTransmission stationary_rt(const PotentialSpec& spec, const AnyonicParams& params, double k,
                                            double dx = 0.01) {
    spec.validate();
    params.validate();
    if (!std::isfinite(k)) throw ContractError("stationary_rt: k must be finite");
    if (!(dx > 0.0)) throw ContractError("stationary_rt: dx must be positive");
    if (!(group_velocity(k, params) > 0.0))
        throw ContractError("stationary_rt: incident wave must travel to the right (v_g > 0)");
    const cplx kr = reflected_wavenumber(k, params);
    if (std::abs(kr - k) < detail::degenerate_basis_gap)
        throw NumericalError("stationary_rt: k and k_r nearly coincide; the two-mode basis is singular");
    if (spec.is_zero()) return {0.0, 1.0};

    const double L0 = decay_half_width(spec);
    const cplx I(0.0, 1.0);
    const cplx rot_inv = std::polar(1.0, params.phi);
    const cplx energy = continuous_dispersion(k, params);
    // u'' = V u + e^{i phi} (i v u' - E u)
    auto rhs = [&](double x, const std::array<cplx, 2>& y) -> std::array<cplx, 2> {
        return {y[1], eval_potential(spec, x) * y[0] + rot_inv * (I * params.v * y[1] - energy * y[0])};
    };

    const double h = 0.25 * dx;
    const auto steps = static_cast<std::size_t>(std::ceil(2.0 * L0 / h));
    const double hs = -2.0 * L0 / static_cast<double>(steps);
    double x = L0;
    std::array<cplx, 2> y{std::exp(I * k * x), I * k * std::exp(I * k * x)};
    auto axpy = [](const std::array<cplx, 2>& a, double s, const std::array<cplx, 2>& b) {
        return std::array<cplx, 2>{a[0] + s * b[0], a[1] + s * b[1]};
    };
    for (std::size_t s = 0; s < steps; ++s) {
        const auto k1 = rhs(x, y);
        const auto k2 = rhs(x + 0.5 * hs, axpy(y, 0.5 * hs, k1));
        const auto k3 = rhs(x + 0.5 * hs, axpy(y, 0.5 * hs, k2));
        const auto k4 = rhs(x + hs, axpy(y, hs, k3));
        for (int c = 0; c < 2; ++c) y[c] += hs / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        x = L0 + static_cast<double>(s + 1) * hs;
        if (!std::isfinite(std::abs(y[0])) || !std::isfinite(std::abs(y[1])))
            throw DivergenceError("stationary_rt: shooting solution overflowed");
    }

    const cplx gap = I * (k - kr);
    const cplx a = (y[1] - I * kr * y[0]) * std::exp(-I * k * x) / gap;
    const cplx b = -(y[1] - I * k * y[0]) * std::exp(-I * kr * x) / gap;
    if (a == cplx{}) throw NumericalError("stationary_rt: vanishing incident amplitude");
    return {b / a, 1.0 / a};
}

/// Initial packet exp(-(x - d)^2 / w^2 + i k x).
struct PacketSpec {
    double center = 0.0;
    double width = 1.0;
    double carrier = 0.0;

    void validate(const Grid& g) const {
        if (!std::isfinite(center) || !std::isfinite(width) || !std::isfinite(carrier))
            throw ContractError("PacketSpec: fields must be finite");
        if (!(width > 0.0)) throw ContractError("PacketSpec: width must be positive");
        if (!(center - 3.0 * width > g.x_min() && center + 3.0 * width < g.x_max()))
            throw ContractError("PacketSpec: packet does not fit inside the grid (need |d| + 3w inside the box)");
    }

    WaveFunction sample(const Grid& g) const {
        validate(g);
        return WaveFunction::from_function(g, [&](double x) {
            const double s = (x - center) / width;
            return std::exp(-s * s) * std::polar(1.0, carrier * x);
        });
    }
};

struct ScatteringConfig {
    Grid grid = Grid::standard();
    PropagatorConfig propagator;
    double separatrix = 0.0;
};

struct ScatteringReport {
    double phi = 0.0;
    double v = 0.0;
    double k_incident = 0.0;
    cplx k_reflected;
    double reflected_power_fraction = 0.0;
    double transmitted_power_fraction = 0.0;
    bool reflected_is_evanescent = false;
};

struct PacketScattering {
    ScatteringReport report;
    EvolutionRecord record;
};

namespace detail {

struct RegionStats {
    double power = 0.0;
    double centroid = 0.0;
};

inline std::array<RegionStats, 2> split_regions(const WaveFunction& psi, double xb) {
    std::array<RegionStats, 2> r{};
    const auto rho = psi.density();
    for (std::size_t j = 0; j < rho.size(); ++j) {
        const double x = psi.grid.x(j);
        auto& side = r[x < xb ? 0 : 1];
        side.power += rho[j];
        side.centroid += rho[j] * x;
    }
    for (auto& s : r) {
        if (s.power > 0.0) s.centroid /= s.power;
        s.power *= psi.grid.dx();
    }
    return r;
}

}  // namespace detail

/// Evolves a Gaussian packet in the moving frame and partitions the final
/// density at the separatrix. The side the packet starts on collects the
/// reflected power.
inline PacketScattering scatter_packet(const PotentialSpec& spec, const AnyonicParams& params,
                                       const PacketSpec& packet, const ScatteringConfig& config) {
    params.validate();
    const auto psi0 = packet.sample(config.grid);
    const double vg = group_velocity(packet.carrier, params);
    const bool from_left = packet.center < config.separatrix;
    if (from_left ? !(vg > 0.0) : !(vg < 0.0))
        throw ContractError("scatter_packet: packet group velocity does not point at the separatrix");

    auto record = evolve(psi0, spec, params, config.propagator);
    const auto regions = detail::split_regions(record.final_state, config.separatrix);
    const double total = regions[0].power + regions[1].power;
    if (!(total > 0.0)) throw NumericalError("scatter_packet: final state has zero norm");

    for (const auto& side : regions) {
        if (side.power / total > 0.01 && std::abs(side.centroid - config.separatrix) < 5.0 * packet.width) {
            std::ostringstream os;
            os << "scatter_packet: interaction incomplete at t = " << config.propagator.t_final
               << " (a region centroid sits at x = " << side.centroid << ", within 5w of the separatrix)";
            throw InconclusiveError(os.str());
        }
    }

    ScatteringReport rep;
    rep.phi = params.phi;
    rep.v = params.v;
    rep.k_incident = packet.carrier;
    rep.k_reflected = reflected_wavenumber(packet.carrier, params);
    rep.reflected_is_evanescent = std::abs(rep.k_reflected.imag()) > evanescence_threshold;
    const auto& refl = regions[from_left ? 0 : 1];
    const auto& trans = regions[from_left ? 1 : 0];
    rep.reflected_power_fraction = refl.power / total;
    rep.transmitted_power_fraction = trans.power / total;
    return {rep, std::move(record)};
}

inline ScatteringReport run_packet_scattering(const PotentialSpec& spec, const AnyonicParams& params,
                                              const PacketSpec& packet, const ScatteringConfig& config) {
    return scatter_packet(spec, params, packet, config).report;
}

inline void write_scattering_header(std::ostream& os) {
    os << "phi,v,k,re_k_r,im_k_r,reflected,transmitted,evanescent\n";
}

inline void write_scattering_row(std::ostream& os, const ScatteringReport& r) {
    os << fmt(r.phi) << ',' << fmt(r.v) << ',' << fmt(r.k_incident) << ',' << fmt(r.k_reflected.real()) << ','
       << fmt(r.k_reflected.imag()) << ',' << fmt(r.reflected_power_fraction) << ','
       << fmt(r.transmitted_power_fraction) << ',' << (r.reflected_is_evanescent ? 1 : 0) << '\n';
}

inline void write_rt_csv(std::ostream& os, std::span<const double> ks, std::span<const ReflectionTransmission> rt) {
    if (ks.size() != rt.size()) throw ContractError("write_rt_csv: length mismatch");
    os << "k,re_r,im_r,re_t,im_t\n";
    for (std::size_t j = 0; j < ks.size(); ++j)
        os << fmt(ks[j]) << ',' << fmt(rt[j].r.real()) << ',' << fmt(rt[j].r.imag()) << ',' << fmt(rt[j].t.real())
           << ',' << fmt(rt[j].t.imag()) << '\n';
}

}  // namespace anyonpt
