#pragma once

#include <cmath>
#include <complex>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"

namespace anyonpt {

/// Anyonic phase and drift velocity, the two knobs deforming the problem.
///
/// phi lies in [0, pi/2]: phi = 0 is ordinary PT symmetry, phi = pi/2 is
/// anti-PT symmetry. v is the velocity of the potential in the lab frame.
struct AnyonicParams {
    double phi = 0.0;
    double v = 0.0;

    static AnyonicParams make(double phi, double v) {
        AnyonicParams p{phi, v};
        p.validate();
        return p;
    }

    void validate() const {
        if (!std::isfinite(phi) || !std::isfinite(v))
            throw DomainError("AnyonicParams: phi and v must be finite");
        if (phi < 0.0 || phi > 0.5 * pi)
            throw DomainError("AnyonicParams: phi must lie in [0, pi/2]");
    }

    /// e^{-i phi}, the factor rotating the stationary Hamiltonian.
    cplx rotation() const { return std::polar(1.0, -phi); }

    friend bool operator==(const AnyonicParams&, const AnyonicParams&) = default;
};

/// Coefficients of the gauge map psi = phi_s exp(i alpha x - i beta t) that
/// removes the drift term from the moving-frame Hamiltonian.
struct GaugeFactors {
    cplx alpha;
    cplx beta;

    static GaugeFactors from(const AnyonicParams& p) {
        const cplx e = std::polar(1.0, p.phi);
        return {0.5 * p.v * e, -0.25 * p.v * p.v * e};
    }
};

}  // namespace anyonpt
