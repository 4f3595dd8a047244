#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"

namespace anyonpt {

/// amplitude / cosh^2(x - i delta). A well of index nu has amplitude
/// -nu (nu + 1); a barrier has amplitude V0 > 0.
struct PoschlTeller {
    double amplitude = 0.0;
    double delta = 0.0;

    static PoschlTeller well(double nu, double delta) {
        if (!(nu > 0.0)) throw DomainError("PoschlTeller: nu must be positive");
        return {-nu * (nu + 1.0), delta};
    }
    static PoschlTeller barrier(double v0, double delta) { return {v0, delta}; }

    bool is_well() const { return amplitude < 0.0; }

    /// Index nu solving nu (nu + 1) = -amplitude; only meaningful for wells.
    double nu() const {
        if (!is_well()) throw DomainError("PoschlTeller: nu is defined for wells only");
        return 0.5 * (std::sqrt(1.0 - 4.0 * amplitude) - 1.0);
    }

    friend bool operator==(const PoschlTeller&, const PoschlTeller&) = default;
};

/// Complex samples on increasing abscissae, linearly interpolated and zero
/// outside the table.
struct Tabulated {
    std::vector<double> x;
    std::vector<cplx> values;

    friend bool operator==(const Tabulated&, const Tabulated&) = default;
};

struct PotentialSpec {
    std::variant<PoschlTeller, Tabulated> shape;

    static PotentialSpec zero() { return {PoschlTeller{0.0, 0.0}}; }
    static PotentialSpec well(double nu, double delta) { return {PoschlTeller::well(nu, delta)}; }
    static PotentialSpec barrier(double v0, double delta) { return {PoschlTeller::barrier(v0, delta)}; }
    static PotentialSpec tabulated(Tabulated t) { return {std::move(t)}; }

    const PoschlTeller* poschl_teller() const { return std::get_if<PoschlTeller>(&shape); }
    const Tabulated* table() const { return std::get_if<Tabulated>(&shape); }

    bool is_zero() const {
        const auto* pt = poschl_teller();
        return pt && pt->amplitude == 0.0;
    }

    void validate() const {
        if (const auto* pt = poschl_teller()) {
            if (!std::isfinite(pt->amplitude) || !std::isfinite(pt->delta))
                throw DomainError("PoschlTeller: parameters must be finite");
            if (std::abs(pt->delta) >= 0.5 * pi)
                throw DomainError("PoschlTeller: |delta| must be below pi/2 (pole on the real axis)");
            return;
        }
        const auto& t = *table();
        if (t.x.size() != t.values.size() || t.x.size() < 2)
            throw DomainError("Tabulated: need at least two (x, V) samples");
        for (std::size_t j = 0; j < t.x.size(); ++j) {
            if (!std::isfinite(t.x[j]) || !std::isfinite(t.values[j].real()) ||
                !std::isfinite(t.values[j].imag()))
                throw DomainError("Tabulated: samples must be finite");
            if (j > 0 && !(t.x[j] > t.x[j - 1]))
                throw DomainError("Tabulated: abscissae must be strictly increasing");
        }
    }

    friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;
};

namespace detail {

inline constexpr double pole_threshold = 1e-12;

// cosh(x - i delta) = cosh x cos delta - i sinh x sin delta.
inline cplx cosh_shifted(double x, double delta) {
    return {std::cosh(x) * std::cos(delta), -std::sinh(x) * std::sin(delta)};
}

}  // namespace detail

/// 1 / cosh(x - i delta), zero beyond the range where cosh overflows.
inline cplx sech_shifted(double x, double delta) {
    if (std::abs(x) > 700.0) return 0.0;
    const cplx c = detail::cosh_shifted(x, delta);
    if (std::abs(c) < detail::pole_threshold)
        throw DomainError("sech_shifted: too close to a pole of 1/cosh(x - i delta)");
    return 1.0 / c;
}

inline cplx eval_potential(const PotentialSpec& spec, double x) {
    if (!std::isfinite(x)) throw DomainError("eval_potential: x must be finite");
    if (const auto* pt = spec.poschl_teller()) {
        if (pt->amplitude == 0.0) return 0.0;
        const cplx s = sech_shifted(x, pt->delta);
        return pt->amplitude * s * s;
    }
    const auto& t = *spec.table();
    if (x < t.x.front() || x > t.x.back()) return 0.0;
    const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    if (it == t.x.end()) return t.values.back();
    const auto hi = static_cast<std::size_t>(it - t.x.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - t.x[lo]) / (t.x[hi] - t.x[lo]);
    return (1.0 - w) * t.values[lo] + w * t.values[hi];
}

inline std::vector<cplx> sample_potential(const PotentialSpec& spec, const Grid& g, double shift = 0.0) {
    std::vector<cplx> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) v[j] = eval_potential(spec, g.x(j) - shift);
    return v;
}

/// True iff max_j |V(-x_j) - conj V(x_j)| < tol on a mirror-symmetric grid.
inline bool check_pt_condition(const PotentialSpec& spec, const Grid& g, double tol) {
    if (!g.is_symmetric()) throw ContractError("check_pt_condition: grid must be symmetric about 0");
    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const cplx here = eval_potential(spec, g.x(j));
        const cplx there = eval_potential(spec, g.x(g.mirror(j)));
        worst = std::max(worst, std::abs(there - std::conj(here)));
    }
    return worst < tol;
}

/// Smallest half-width L with |V(x)| < threshold for all |x| >= L (probed on
/// a 0.25 lattice out to `limit`). Throws ContractError if the tail never
/// drops below the threshold.
inline double decay_half_width(const PotentialSpec& spec, double threshold = 1e-10, double limit = 400.0) {
    if (const auto* t = spec.table()) {
        if (std::abs(t->values.front()) >= threshold || std::abs(t->values.back()) >= threshold)
            throw ContractError("potential tail does not decay: tabulated end samples exceed threshold");
        return std::max(std::abs(t->x.front()), std::abs(t->x.back()));
    }
    if (spec.is_zero()) return 1.0;
    constexpr double step = 0.25;
    for (double L = step; L <= limit; L += step) {
        bool quiet = true;
        for (double probe = L; probe <= L + 10.0 && quiet; probe += step)
            quiet = std::abs(eval_potential(spec, probe)) < threshold &&
                    std::abs(eval_potential(spec, -probe)) < threshold;
        if (quiet) return L;
    }
    throw ContractError("potential tail does not decay below threshold within the probe range");
}

/// Reads a tabulated potential from CSV with a header row and columns
/// x, Re V, Im V.
inline Tabulated load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated potential file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("tabulated potential file is empty: " + path);
    Tabulated t;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x = 0, re = 0, im = 0;
        if (!(ss >> x >> re >> im))
            throw ConfigError(path + ": row " + std::to_string(row) + " needs three numeric columns");
        t.x.push_back(x);
        t.values.emplace_back(re, im);
    }
    try {
        PotentialSpec{t}.validate();
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return t;
}

}  // namespace anyonpt
