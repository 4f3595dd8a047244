#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"
#include "anyonpt/hamiltonian.hpp"
#include "anyonpt/io.hpp"
#include "anyonpt/params.hpp"
#include "anyonpt/potential.hpp"
#include "anyonpt/spectra.hpp"

namespace anyonpt {

/// Closed-form ground state of the nu = 1 shifted well, 1/cosh(x - i delta),
/// L2-normalised on the grid. Its energy is -1 for every |delta| < pi/2.
inline WaveFunction analytic_bound_state_pt(double delta, const Grid& g) {
    if (!std::isfinite(delta) || std::abs(delta) >= 0.5 * pi)
        throw DomainError("analytic_bound_state_pt: |delta| >= pi/2 is the broken PT phase");
    return WaveFunction::from_function(g, [&](double x) { return sech_shifted(x, delta); }).normalized();
}

/// Moving-frame bound state u_1(x) e^{i alpha x}; throws once delocalised.
inline WaveFunction right_bound_state(const WaveFunction& u1, double e1, const AnyonicParams& p) {
    auto u = moving_bound_state(u1, e1, p);
    if (!u) throw DelocalizedError("bound state is not normalisable at this drift (|v| >= v_c)");
    return *u;
}

/// Bound state of H_eff^dagger: conj(u_1(x)) exp[i (v x / 2) e^{-i phi}],
/// with eigenvalue conj(E~_1). Returned L2-normalised.
inline WaveFunction adjoint_bound_state(const WaveFunction& u1, double e1, const AnyonicParams& p) {
    if (!(e1 < 0.0)) throw DomainError("adjoint_bound_state: E_1 must be negative");
    if (!(delocalization_margin(e1, p) > 0.0))
        throw DelocalizedError("adjoint bound state is not normalisable at this drift (|v| >= v_c)");
    const cplx gamma = 0.5 * p.v * std::polar(1.0, -p.phi);
    WaveFunction out = u1;
    for (std::size_t j = 0; j < out.size(); ++j)
        out.values[j] = detail::times_exp(std::conj(u1.values[j]), cplx(0.0, 1.0) * gamma * out.grid.x(j));
    return out.normalized();
}

/// |integral u^2| / integral |u|^2; equals |integral u^2| for normalised u and
/// vanishes at an exceptional point.
inline double self_orthogonality(const WaveFunction& u) { return std::abs(bilinear_square(u)) / u.norm_squared(); }

namespace detail {

// dx * sum of f over the samples where f >= 1e-14 max f.
inline double truncated_sum(const std::vector<double>& f, double dx) {
    const double peak = *std::max_element(f.begin(), f.end());
    const double floor = 1e-14 * peak;
    double s = 0.0;
    for (double v : f)
        if (v >= floor) s += v;
    return s * dx;
}

inline void check_g_infinity_inputs(const WaveFunction& u1, double e1, const AnyonicParams& p) {
    p.validate();
    if (!(e1 < 0.0)) throw DomainError("g_infinity: E_1 must be negative");
    if (!(delocalization_margin(e1, p) > 0.0))
        throw DelocalizedError("g_infinity: the weighted integrals diverge for |v| >= v_c");
    if (std::abs(bilinear_square(u1)) / u1.norm_squared() < 1e-10)
        throw SingularityError("g_infinity: integral of u_1^2 vanishes (exceptional point)");
}

}  // namespace detail

/// The Petermann factor evaluated two ways on the same grid.
struct PetermannForms {
    /// int |u|^2 e^{-v x sin phi} * int |u|^2 e^{+v x sin phi} / |int u^2|^2
    double weighted = 0.0;
    /// <u~|u~> <u~dag|u~dag> / |<u~dag|u~>|^2 from the explicit bound states
    double biorthogonal = 0.0;
};

inline PetermannForms g_infinity_forms(const WaveFunction& u1, double e1, const AnyonicParams& p) {
    detail::check_g_infinity_inputs(u1, e1, p);
    const Grid& g = u1.grid;
    const double s = p.v * std::sin(p.phi);
    const std::size_t n = u1.size();

    // Weights are referenced to the density peak so the exponentials stay
    // in range on wide domains.
    std::size_t peak = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (std::norm(u1.values[j]) > std::norm(u1.values[peak])) peak = j;
    const double x0 = g.x(peak);

    std::vector<double> minus(n), plus(n), rho(n);
    for (std::size_t j = 0; j < n; ++j) {
        rho[j] = std::norm(u1.values[j]);
        if (rho[j] == 0.0) continue;
        const double w = s * (g.x(j) - x0);
        const double lr = std::log(rho[j]);
        minus[j] = std::exp(lr - w);
        plus[j] = std::exp(lr + w);
    }
    const cplx sq = bilinear_square(u1);

    PetermannForms f;
    f.weighted = detail::truncated_sum(minus, g.dx()) * detail::truncated_sum(plus, g.dx()) / std::norm(sq);

    const WaveFunction right = right_bound_state(u1, e1, p);
    const WaveFunction left = adjoint_bound_state(u1, e1, p);
    const auto rr = right.density();
    const auto ll = left.density();
    const cplx overlap = inner(left, right);
    if (std::abs(overlap) < 1e-300) throw SingularityError("g_infinity: biorthogonal overlap vanishes");
    f.biorthogonal = detail::truncated_sum(rr, g.dx()) * detail::truncated_sum(ll, g.dx()) / std::norm(overlap);
    return f;
}

/// Asymptotic amplification G_inf of the worst-case perturbation.
inline double g_infinity(const WaveFunction& u1, double e1, const AnyonicParams& p) {
    const PetermannForms f = g_infinity_forms(u1, e1, p);
    if (!(std::abs(f.weighted - f.biorthogonal) <= 1e-6 * f.weighted)) {
        std::ostringstream os;
        os << "g_infinity: weighted and biorthogonal forms disagree (" << f.weighted << " vs " << f.biorthogonal
           << "); the grid is probably too narrow for the tails";
        throw NumericalError(os.str());
    }
    return f.weighted;
}

/// Grid wide enough that the slower weighted tail of the nu = 1 state falls
/// below 1e-14 of its peak, at spacing dx.
inline Grid petermann_grid(const AnyonicParams& p, double dx = 0.01) {
    const double slow = 2.0 - std::abs(p.v * std::sin(p.phi));
    if (!(slow > 0.0)) throw DelocalizedError("petermann_grid: |v| >= v_c");
    const double half = std::max(40.0, 33.0 / slow + 10.0);
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / dx));
    return Grid(-half, half, n);
}

/// G_inf of the nu = 1 shifted well using the closed-form state on its own grid.
inline double g_infinity_poschl_teller(double delta, const AnyonicParams& p, double dx = 0.01) {
    return g_infinity(analytic_bound_state_pt(delta, petermann_grid(p, dx)), -1.0, p);
}

inline constexpr std::size_t max_exponential_dimension = 2048;

/// G_t = || exp[-i (H - E_1) t] ||_2^2.
inline double g_t(const HamiltonianMatrix& h, cplx e1, double t) {
    if (h.size() > max_exponential_dimension)
        throw ContractError("g_t: matrix dimension exceeds the dense limit of 2048");
    if (!std::isfinite(t) || t < 0.0) throw DomainError("g_t: t must be finite and non-negative");
    if (t == 0.0) return 1.0;
    Eigen::MatrixXcd m = h.dense();
    m.diagonal().array() -= e1;
    m *= cplx(0.0, -t);
    const Eigen::MatrixXcd e = m.exp();
    if (!e.allFinite()) {
        std::ostringstream os;
        os << "g_t: matrix exponential overflowed at t = " << t << "; retry with t below " << 0.5 * t;
        throw DivergenceError(os.str());
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(e);
    const double s = svd.singularValues()(0);
    if (!std::isfinite(s * s)) throw DivergenceError("g_t: largest singular value overflows");
    return s * s;
}

struct AmplificationReport {
    double phi = 0.0;
    double v = 0.0;
    double delta = 0.0;
    double g_infinity = 1.0;
    std::vector<std::pair<double, double>> g_t_samples;
    double self_orthogonality = 1.0;
    double delocalization_margin = 0.0;
};

inline void write_amplification_header(std::ostream& os) {
    os << "phi,v,delta,g_infinity,self_orthogonality,margin\n";
}

inline void write_amplification_row(std::ostream& os, const AmplificationReport& r) {
    os << fmt(r.phi) << ',' << fmt(r.v) << ',' << fmt(r.delta) << ',' << fmt(r.g_infinity) << ','
       << fmt(r.self_orthogonality) << ',' << fmt(r.delocalization_margin) << '\n';
}

inline void write_g_t_csv(std::ostream& os, const AmplificationReport& r) {
    os << "t,g_t\n";
    for (const auto& [t, g] : r.g_t_samples) os << fmt(t) << ',' << fmt(g) << '\n';
}

}  // namespace anyonpt
