#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <ostream>

#include "anyonpt/errors.hpp"
#include "anyonpt/io.hpp"
#include "anyonpt/params.hpp"
#include "anyonpt/spectra.hpp"

namespace anyonpt {

/// Actively mode-locked cavity with AM and FM modulators driven by W(X):
///   i T_R dpsi/dT = (-D + i Dg) psi_XX + i (g - l) psi + (Delta1 - i Delta2) W(X - v T) psi
struct CavityParams {
    double D = 1.0;       // group-velocity dispersion
    double Dg = 0.0;      // spectral filtering
    double delta1 = 0.0;  // FM amplitude
    double delta2 = 0.0;  // AM amplitude
    double g = 0.0;       // saturated gain
    double l = 0.0;       // loss
    double Tm = 1.0;      // modulation period
    double TR = 1.0;      // round-trip time

    void validate() const {
        for (double x : {D, Dg, delta1, delta2, g, l, Tm, TR})
            if (!std::isfinite(x)) throw DomainError("CavityParams: all fields must be finite");
        if (!(TR > 0.0)) throw DomainError("CavityParams: TR must be positive");
        if (!(Tm > 0.0)) throw DomainError("CavityParams: Tm must be positive");
        if (Dg < 0.0) throw DomainError("CavityParams: Dg must be non-negative");
        if (D == 0.0) throw DomainError("CavityParams: D = 0 makes the dispersion degenerate (phi undefined)");
        if (D < 0.0) throw DomainError("CavityParams: D < 0 maps outside phi in [0, pi/2]");
        if (delta1 == 0.0 && delta2 != 0.0)
            throw DomainError("CavityParams: Delta1 = 0 with Delta2 != 0 leaves the modulator tuning undefined");
    }

    /// -D + i Dg = -|.| e^{-i phi}.
    cplx dispersion() const { return {-D, Dg}; }
};

struct LaserMapping {
    AnyonicParams params;
    bool valid_gain_balance = false;
    bool valid_modulator_tuning = false;
};

/// phi = atan(Dg / D), v = 1 - Tm / TR.
///
/// Dividing the master equation by |D - i Dg| gives the model equation in
/// time t = T |D - i Dg| / T_R with V = |Delta| W / |D - i Dg|; v is reported
/// in the cavity's own normalisation, i.e. with that scale set to one.
inline LaserMapping map_to_anyonic(const CavityParams& c, double tol = 1e-9) {
    c.validate();
    if (!(tol >= 0.0)) throw DomainError("map_to_anyonic: tolerance must be non-negative");
    LaserMapping m;
    m.params = AnyonicParams::make(std::atan(c.Dg / c.D), 1.0 - c.Tm / c.TR);
    m.valid_gain_balance = std::abs(c.g - c.l) < tol;
    // no modulation at all satisfies Delta2 = Delta1 Dg / D trivially
    m.valid_modulator_tuning = c.delta1 == 0.0 ? true : std::abs(c.delta2 / c.delta1 - c.Dg / c.D) < tol;
    return m;
}

/// Slow-time units per model time unit: |D - i Dg| / T_R.
inline double time_scale(const CavityParams& c) {
    c.validate();
    return std::abs(c.dispersion()) / c.TR;
}

/// V / W = |Delta1 - i Delta2| / |D - i Dg|.
inline double potential_scale(const CavityParams& c) {
    c.validate();
    return std::abs(cplx(c.delta1, -c.delta2)) / std::abs(c.dispersion());
}

/// Detuning |1 - Tm/TR| at which the pulse (bound state of energy E1) is
/// delocalised. nullopt when phi = 0.
inline std::optional<double> mode_locking_threshold(const CavityParams& c, double well_depth_e1) {
    const auto m = map_to_anyonic(c);
    if (!(well_depth_e1 < 0.0)) throw DomainError("mode_locking_threshold: E1 must be negative");
    return critical_velocity(well_depth_e1, m.params.phi);
}

inline void write_lasermap_header(std::ostream& os) {
    os << "phi,v,valid_gain_balance,valid_modulator_tuning,threshold\n";
}

inline void write_lasermap_row(std::ostream& os, const LaserMapping& m, std::optional<double> threshold) {
    os << fmt(m.params.phi) << ',' << fmt(m.params.v) << ',' << (m.valid_gain_balance ? 1 : 0) << ','
       << (m.valid_modulator_tuning ? 1 : 0) << ',' << (threshold ? fmt(*threshold) : std::string("inf")) << '\n';
}

}  // namespace anyonpt
