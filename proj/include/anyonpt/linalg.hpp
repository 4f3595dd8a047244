#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <lapacke.h>

#include "anyonpt/errors.hpp"
#include "anyonpt/hamiltonian.hpp"

namespace anyonpt::linalg {

namespace detail {

inline lapack_complex_double* lp(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

inline std::string diagnostics(const HamiltonianMatrix& h) {
    double one_norm = 0.0;
    std::vector<double> col(h.size(), 0.0);
    h.for_each_entry([&](std::size_t, std::size_t j, cplx a) { col[j] += std::abs(a); });
    for (double c : col) one_norm = std::max(one_norm, c);
    std::ostringstream os;
    os << "dimension " << h.size() << ", ||H||_1 = " << one_norm << ", max |H_ij| = " << h.max_abs_entry();
    return os.str();
}

}  // namespace detail

/// All eigenvalues of the banded Hamiltonian.
///
/// Dirichlet matrices are tridiagonal: a diagonal similarity maps them onto
/// the complex-symmetric tridiagonal matrix with off-diagonals
/// sqrt(H(j,j+1) H(j+1,j)), which is already upper Hessenberg, so the QR
/// iteration runs directly on it. This also removes the exponential
/// row/column imbalance a drift term produces in a closed box. Periodic
/// matrices go through the balanced general driver.
inline std::vector<cplx> eigenvalues(const HamiltonianMatrix& h) {
    const auto n = static_cast<lapack_int>(h.size());
    const std::size_t nn = h.size();
    std::vector<cplx> a(nn * nn, cplx{});
    std::vector<cplx> w(nn);
    lapack_int info = 0;
    if (h.boundary() == Boundary::Dirichlet) {
        for (std::size_t j = 0; j < nn; ++j) a[j + j * nn] = h.diag()[j];
        for (std::size_t j = 0; j + 1 < nn; ++j) {
            const cplx s = std::sqrt(h.upper()[j] * h.lower()[j]);
            a[j + (j + 1) * nn] = s;
            a[(j + 1) + j * nn] = s;
        }
        cplx dummy{};
        info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, detail::lp(a.data()), n, detail::lp(w.data()),
                              detail::lp(&dummy), 1);
    } else {
        h.for_each_entry([&](std::size_t i, std::size_t j, cplx v) { a[i + j * nn] += v; });
        cplx dummy{};
        info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, detail::lp(a.data()), n, detail::lp(w.data()),
                             detail::lp(&dummy), 1, detail::lp(&dummy), 1);
    }
    if (info != 0) {
        std::ostringstream os;
        os << "eigensolver failed (LAPACK info " << info << "); " << detail::diagnostics(h);
        throw NumericalError(os.str());
    }
    return w;
}

/// LU factorisation of (H - shift I) in LAPACK band storage.
///
/// Periodic matrices are reordered as 0, n-1, 1, n-2, ... which folds the
/// ring into a band of half-width 2.
class ShiftedBandLu {
public:
    ShiftedBandLu(const HamiltonianMatrix& h, cplx shift) : n_(h.size()) {
        const bool ring = h.boundary() == Boundary::Periodic;
        kl_ = ku_ = ring ? 2 : 1;
        ldab_ = 2 * kl_ + ku_ + 1;
        position_.resize(n_);
        if (ring) {
            for (std::size_t i = 0; i < n_; ++i)
                position_[i] = (i < (n_ + 1) / 2) ? 2 * i : 2 * (n_ - 1 - i) + 1;
        } else {
            std::iota(position_.begin(), position_.end(), std::size_t{0});
        }
        factor(h, shift);
        if (info_ > 0) {
            const double eps = std::numeric_limits<double>::epsilon() * std::max(1.0, h.max_abs_entry());
            factor(h, shift + cplx(eps, eps));
        }
        if (info_ != 0) throw NumericalError("ShiftedBandLu: factorisation failed");
    }

    /// Solves (H - shift I) x = b in place (b in natural ordering).
    void solve(std::vector<cplx>& b) const {
        std::vector<cplx> rhs(n_);
        for (std::size_t i = 0; i < n_; ++i) rhs[position_[i]] = b[i];
        const lapack_int info =
            LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), kl_, ku_, 1,
                           detail::lp(const_cast<cplx*>(ab_.data())), ldab_, ipiv_.data(), detail::lp(rhs.data()),
                           static_cast<lapack_int>(n_));
        if (info != 0) throw NumericalError("ShiftedBandLu: triangular solve failed");
        for (std::size_t i = 0; i < n_; ++i) b[i] = rhs[position_[i]];
    }

private:
    void factor(const HamiltonianMatrix& h, cplx shift) {
        ab_.assign(static_cast<std::size_t>(ldab_) * n_, cplx{});
        ipiv_.assign(n_, 0);
        h.for_each_entry([&](std::size_t i, std::size_t j, cplx v) {
            const auto r = static_cast<lapack_int>(position_[i]);
            const auto c = static_cast<lapack_int>(position_[j]);
            const auto row = static_cast<std::size_t>(kl_ + ku_ + r - c);
            ab_[row + static_cast<std::size_t>(c) * static_cast<std::size_t>(ldab_)] += v;
        });
        for (std::size_t i = 0; i < n_; ++i) {
            const auto c = position_[i];
            ab_[static_cast<std::size_t>(kl_ + ku_) + c * static_cast<std::size_t>(ldab_)] -= shift;
        }
        info_ = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_), kl_, ku_,
                               detail::lp(ab_.data()), ldab_, ipiv_.data());
    }

    std::size_t n_;
    lapack_int kl_ = 1;
    lapack_int ku_ = 1;
    lapack_int ldab_ = 4;
    lapack_int info_ = 0;
    std::vector<std::size_t> position_;
    std::vector<cplx> ab_;
    std::vector<lapack_int> ipiv_;
};

/// Eigenvector for a computed eigenvalue by shifted inverse iteration.
/// Returned with unit max-norm.
inline std::vector<cplx> inverse_iteration(const HamiltonianMatrix& h, cplx lambda, int iterations = 3) {
    const ShiftedBandLu lu(h, lambda);
    std::vector<cplx> x(h.size());
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& e : x) e = cplx(u(rng), u(rng));
    for (int it = 0; it < iterations; ++it) {
        lu.solve(x);
        double m = 0.0;
        for (const auto& e : x) m = std::max(m, std::abs(e));
        if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("inverse_iteration: iterate is not finite");
        for (auto& e : x) e /= m;
    }
    return x;
}

}  // namespace anyonpt::linalg
