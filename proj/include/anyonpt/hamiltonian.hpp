#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"
#include "anyonpt/params.hpp"
#include "anyonpt/potential.hpp"

namespace anyonpt {

enum class Boundary { Dirichlet, Periodic };

/// Moving-frame Hamiltonian
///   H_eff = -e^{-i phi} d^2/dx^2 + e^{-i phi} V(x) + i v d/dx
/// discretised with central differences. Stored as three bands plus the two
/// corner couplings that close the ring for periodic boundaries.
class HamiltonianMatrix {
public:
    HamiltonianMatrix(Grid grid, Boundary boundary, std::vector<cplx> diag, std::vector<cplx> upper,
                      std::vector<cplx> lower, cplx wrap_upper = 0.0, cplx wrap_lower = 0.0)
        : grid_(grid),
          boundary_(boundary),
          diag_(std::move(diag)),
          upper_(std::move(upper)),
          lower_(std::move(lower)),
          wrap_upper_(boundary == Boundary::Periodic ? wrap_upper : cplx{}),
          wrap_lower_(boundary == Boundary::Periodic ? wrap_lower : cplx{}) {
        const std::size_t n = grid_.size();
        if (diag_.size() != n || upper_.size() + 1 != n || lower_.size() + 1 != n)
            throw ContractError("HamiltonianMatrix: band lengths do not match the grid");
    }

    const Grid& grid() const { return grid_; }
    Boundary boundary() const { return boundary_; }
    std::size_t size() const { return diag_.size(); }

    const std::vector<cplx>& diag() const { return diag_; }
    /// upper()[j] = H(j, j+1)
    const std::vector<cplx>& upper() const { return upper_; }
    /// lower()[j] = H(j+1, j)
    const std::vector<cplx>& lower() const { return lower_; }
    /// H(n-1, 0): the ring neighbour "after" the last node.
    cplx wrap_upper() const { return wrap_upper_; }
    /// H(0, n-1)
    cplx wrap_lower() const { return wrap_lower_; }

    cplx operator()(std::size_t i, std::size_t j) const {
        const std::size_t n = size();
        if (i == j) return diag_[i];
        if (j == i + 1) return upper_[i];
        if (i == j + 1) return lower_[j];
        if (i == n - 1 && j == 0) return wrap_upper_;
        if (i == 0 && j == n - 1) return wrap_lower_;
        return 0.0;
    }

    /// Visits every structurally nonzero entry as f(i, j, value).
    template <class F>
    void for_each_entry(F&& f) const {
        const std::size_t n = size();
        for (std::size_t j = 0; j < n; ++j) f(j, j, diag_[j]);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            f(j, j + 1, upper_[j]);
            f(j + 1, j, lower_[j]);
        }
        if (boundary_ == Boundary::Periodic) {
            f(n - 1, 0, wrap_upper_);
            f(0, n - 1, wrap_lower_);
        }
    }

    std::vector<cplx> apply(std::span<const cplx> psi) const {
        if (psi.size() != size()) throw ContractError("HamiltonianMatrix::apply: size mismatch");
        std::vector<cplx> out(size(), cplx{});
        for_each_entry([&](std::size_t i, std::size_t j, cplx a) { out[i] += a * psi[j]; });
        return out;
    }

    Eigen::MatrixXcd dense() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for_each_entry([&](std::size_t i, std::size_t j, cplx a) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += a;
        });
        return m;
    }

    /// Conjugate transpose.
    HamiltonianMatrix adjoint() const {
        std::vector<cplx> d(diag_.size()), up(upper_.size()), lo(lower_.size());
        std::transform(diag_.begin(), diag_.end(), d.begin(), [](cplx a) { return std::conj(a); });
        std::transform(lower_.begin(), lower_.end(), up.begin(), [](cplx a) { return std::conj(a); });
        std::transform(upper_.begin(), upper_.end(), lo.begin(), [](cplx a) { return std::conj(a); });
        return {grid_, boundary_, std::move(d), std::move(up), std::move(lo), std::conj(wrap_lower_),
                std::conj(wrap_upper_)};
    }

    double max_abs_entry() const {
        double m = 0.0;
        for_each_entry([&](std::size_t, std::size_t, cplx a) { m = std::max(m, std::abs(a)); });
        return m;
    }

private:
    Grid grid_;
    Boundary boundary_;
    std::vector<cplx> diag_;
    std::vector<cplx> upper_;
    std::vector<cplx> lower_;
    cplx wrap_upper_;
    cplx wrap_lower_;
};

inline HamiltonianMatrix build_h_eff(const PotentialSpec& spec, const AnyonicParams& params, const Grid& grid,
                                     Boundary boundary) {
    spec.validate();
    params.validate();
    const std::size_t n = grid.size();
    const double dx = grid.dx();
    const cplx rot = params.rotation();
    const cplx kinetic_off = -rot / (dx * dx);
    const cplx drift = cplx(0.0, params.v / (2.0 * dx));

    std::vector<cplx> diag(n);
    for (std::size_t j = 0; j < n; ++j) diag[j] = rot * (2.0 / (dx * dx) + eval_potential(spec, grid.x(j)));
    std::vector<cplx> upper(n - 1, kinetic_off + drift);
    std::vector<cplx> lower(n - 1, kinetic_off - drift);
    return {grid, boundary, std::move(diag), std::move(upper), std::move(lower), kinetic_off + drift,
            kinetic_off - drift};
}

/// Anyonic PT check on a discretised H_eff.
///
/// The matrix splits into a transpose-symmetric part S (the phase-rotated
/// stationary Hamiltonian) and a transpose-antisymmetric part A (the drift
/// i v d/dx generated by the boost). With P the index reversal and K complex
/// conjugation, the check requires
///   (PK) S (PK) = e^{2 i phi} S   and   (PK) A (PK) = A,
/// i.e. the lab-frame Hamiltonian obeys PT H = e^{2 i phi} H PT while the
/// boost term is PT-even. Tolerance is relative to the largest entry.
inline bool check_anyonic_symmetry(const HamiltonianMatrix& h, double phi, double tol) {
    if (!h.grid().is_symmetric()) throw ContractError("check_anyonic_symmetry: grid must be symmetric about 0");
    const std::size_t n = h.size();
    const cplx phase = std::polar(1.0, 2.0 * phi);
    const double scale = std::max(1.0, h.max_abs_entry());
    double worst = 0.0;
    h.for_each_entry([&](std::size_t i, std::size_t j, cplx) {
        const cplx sym = 0.5 * (h(i, j) + h(j, i));
        const cplx anti = 0.5 * (h(i, j) - h(j, i));
        const std::size_t mi = n - 1 - i;
        const std::size_t mj = n - 1 - j;
        const cplx msym = std::conj(0.5 * (h(mi, mj) + h(mj, mi)));
        const cplx manti = std::conj(0.5 * (h(mi, mj) - h(mj, mi)));
        worst = std::max(worst, std::abs(msym - phase * sym));
        worst = std::max(worst, std::abs(manti - anti));
    });
    return worst <= tol * scale;
}

/// Literal identity (PK) H (PK) = e^{2 i phi} H on the full matrix. Holds only
/// when the drift vanishes or phi = 0.
inline double anyonic_residual_literal(const HamiltonianMatrix& h, double phi) {
    const std::size_t n = h.size();
    const cplx phase = std::polar(1.0, 2.0 * phi);
    double worst = 0.0;
    h.for_each_entry([&](std::size_t i, std::size_t j, cplx a) {
        worst = std::max(worst, std::abs(std::conj(h(n - 1 - i, n - 1 - j)) - phase * a));
    });
    return worst / std::max(1.0, h.max_abs_entry());
}

}  // namespace anyonpt
