#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "anyonpt/errors.hpp"
#include "anyonpt/fft.hpp"
#include "anyonpt/grid.hpp"
#include "anyonpt/io.hpp"
#include "anyonpt/params.hpp"
#include "anyonpt/potential.hpp"

namespace anyonpt {

enum class Frame { Moving, Lab };

/// Cosine-ramp absorbing layer of the given width at both ends of the box.
/// Inside the layer psi is damped at rate strength * cos^2(pi e / 2 w),
/// e being the distance from the wall.
struct Absorber {
    double width = 0.0;
    double strength = 0.0;

    void validate(const Grid& g) const {
        if (!(width > 0.0) || !(strength >= 0.0) || !std::isfinite(width) || !std::isfinite(strength))
            throw ContractError("Absorber: width must be positive and strength non-negative");
        if (width > 0.25 * g.length()) throw ContractError("Absorber: width exceeds a quarter of the box");
    }

    double rate(const Grid& g, double x) const {
        const double e = std::min(x - g.x_min(), g.x_max() - x);
        if (e >= width) return 0.0;
        const double c = std::cos(0.5 * pi * std::max(e, 0.0) / width);
        return strength * c * c;
    }
};

struct PropagatorConfig {
    double dt = 0.005;
    double t_final = 0.0;
    Frame frame = Frame::Moving;
    std::optional<Absorber> absorber;
    std::size_t snapshot_every = 100;
    std::size_t norm_every = 10;

    void validate(const Grid& g) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("PropagatorConfig: dt must be positive");
        if (!(t_final >= 0.0) || !std::isfinite(t_final))
            throw ContractError("PropagatorConfig: t_final must be finite and non-negative");
        if (snapshot_every == 0 || norm_every == 0)
            throw ContractError("PropagatorConfig: strides must be positive");
        if (absorber) absorber->validate(g);
    }

    /// Number of steps; dt is shrunk slightly so they land on t_final.
    std::size_t steps() const {
        if (t_final == 0.0) return 0;
        return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    }
    double effective_dt() const { return steps() ? t_final / static_cast<double>(steps()) : dt; }
};

struct EvolutionRecord {
    std::vector<double> times;
    std::vector<double> norm;
    std::vector<double> snapshot_times;
    std::vector<WaveFunction> snapshots;
    WaveFunction final_state;

    explicit EvolutionRecord(const Grid& g) : final_state(g) {}
};

inline constexpr double divergence_threshold = 1e150;

/// Strang split-step Fourier integrator for
///   i d psi/dt = e^{-i phi} (-d^2/dx^2 + V) psi + i v d psi/dx   (moving frame)
///   i d psi/dt = e^{-i phi} (-d^2/dX^2 + V(X - v t)) psi          (lab frame)
/// on the periodic grid. The lab-frame potential is frozen at mid-step.
class SplitStepPropagator {
public:
    SplitStepPropagator(PotentialSpec spec, AnyonicParams params, Grid grid, double dt, Frame frame = Frame::Moving,
                        std::optional<Absorber> absorber = std::nullopt)
        : spec_(std::move(spec)), params_(params), grid_(grid), dt_(dt), frame_(frame), fft_(grid.size()) {
        spec_.validate();
        params_.validate();
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("SplitStepPropagator: dt must be positive");
        const std::size_t n = grid_.size();
        const cplx rot = params_.rotation();
        const auto k = grid_.wavenumbers();
        kinetic_.resize(n);
        const double v_drift = frame_ == Frame::Moving ? params_.v : 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const cplx ek = rot * (k[j] * k[j]) - k[j] * v_drift;
            kinetic_[j] = std::exp(cplx(0.0, -dt_) * ek) / static_cast<double>(n);
        }
        damping_.assign(n, 1.0);
        if (absorber) {
            absorber->validate(grid_);
            for (std::size_t j = 0; j < n; ++j) damping_[j] = std::exp(-0.5 * dt_ * absorber->rate(grid_, grid_.x(j)));
        }
        if (frame_ == Frame::Moving) half_potential_ = potential_factor(0.0);
    }

    double dt() const { return dt_; }
    const Grid& grid() const { return grid_; }

    /// Advances psi from t to t + dt.
    void step(std::vector<cplx>& psi, double t) {
        if (psi.size() != grid_.size()) throw ContractError("SplitStepPropagator: field does not match the grid");
        if (frame_ == Frame::Lab) half_potential_ = potential_factor(params_.v * (t + 0.5 * dt_));
        for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= half_potential_[j] * damping_[j];
        fft_.forward(psi);
        for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= kinetic_[j];
        fft_.backward(psi);
        double peak = 0.0;
        for (std::size_t j = 0; j < psi.size(); ++j) {
            psi[j] *= half_potential_[j] * damping_[j];
            peak = std::max(peak, std::abs(psi[j]));
        }
        if (!(peak <= divergence_threshold)) {
            std::ostringstream os;
            os << "split-step evolution diverged at t = " << t + dt_ << " (max |psi| = " << peak
               << "); the PT phase may be broken or dt too large";
            throw DivergenceError(os.str());
        }
    }

private:
    std::vector<cplx> potential_factor(double shift) const {
        const cplx rot = params_.rotation();
        std::vector<cplx> f(grid_.size());
        for (std::size_t j = 0; j < f.size(); ++j)
            f[j] = std::exp(cplx(0.0, -0.5 * dt_) * rot * eval_potential(spec_, grid_.x(j) - shift));
        return f;
    }

    PotentialSpec spec_;
    AnyonicParams params_;
    Grid grid_;
    double dt_;
    Frame frame_;
    FftPair fft_;
    std::vector<cplx> kinetic_;
    std::vector<cplx> half_potential_;
    std::vector<double> damping_;
};

/// One moving-frame Strang step.
inline WaveFunction step_split_fourier(const WaveFunction& psi, const PotentialSpec& spec,
                                       const AnyonicParams& params, double dt) {
    SplitStepPropagator prop(spec, params, psi.grid, dt);
    WaveFunction out = psi;
    prop.step(out.values, 0.0);
    return out;
}

inline EvolutionRecord evolve(const WaveFunction& psi0, const PotentialSpec& spec, const AnyonicParams& params,
                              const PropagatorConfig& config) {
    config.validate(psi0.grid);
    if (!psi0.is_finite()) throw ContractError("evolve: initial state is not finite");
    const std::size_t steps = config.steps();
    const double dt = config.effective_dt();
    SplitStepPropagator prop(spec, params, psi0.grid, dt, config.frame, config.absorber);

    EvolutionRecord rec(psi0.grid);
    WaveFunction psi = psi0;
    auto log_norm = [&](double t) {
        rec.times.push_back(t);
        rec.norm.push_back(psi.norm_squared());
    };
    auto snapshot = [&](double t) {
        rec.snapshot_times.push_back(t);
        rec.snapshots.push_back(psi);
    };
    log_norm(0.0);
    snapshot(0.0);
    for (std::size_t s = 1; s <= steps; ++s) {
        const double t0 = static_cast<double>(s - 1) * dt;
        prop.step(psi.values, t0);
        const double t = static_cast<double>(s) * dt;
        if (s % config.norm_every == 0 || s == steps) log_norm(t);
        if (s % config.snapshot_every == 0 || s == steps) snapshot(t);
    }
    rec.final_state = psi;
    return rec;
}

/// Galilean-invariance control at phi = 0.
///
/// Compares the moving-frame evolution of psi0 with the gauge image
/// e^{i alpha x - i beta t} of the stationary-frame (v = 0) evolution of
/// e^{-i alpha x} psi0, and returns the max-norm of the difference. On the
/// periodic grid the map is exact when alpha L / 2 pi is an integer; otherwise
/// the result also contains whatever reaches the box edges by time t.
inline double gauge_transform_check(const PotentialSpec& spec, const AnyonicParams& params, const WaveFunction& psi0,
                                    double t, double dt = 0.005) {
    params.validate();
    if (params.phi != 0.0)
        throw ContractError("gauge_transform_check: the gauge map is only valid at phi = 0");
    PropagatorConfig cfg;
    cfg.dt = dt;
    cfg.t_final = t;
    cfg.snapshot_every = 1u << 30;
    cfg.norm_every = 1u << 30;

    const auto gf = GaugeFactors::from(params);
    const double alpha = gf.alpha.real();
    const double beta = gf.beta.real();
    const Grid& g = psi0.grid;

    const auto moving = evolve(psi0, spec, params, cfg).final_state;

    WaveFunction start = psi0;
    for (std::size_t j = 0; j < g.size(); ++j) start.values[j] *= std::polar(1.0, -alpha * g.x(j));
    auto rest = evolve(start, spec, AnyonicParams{0.0, 0.0}, cfg).final_state;

    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const cplx mapped = rest.values[j] * std::polar(1.0, alpha * g.x(j) - beta * t);
        worst = std::max(worst, std::abs(moving.values[j] - mapped));
    }
    return worst;
}

/// |psi|^2 / |phi_s|^2 = exp(-v x sin phi) exp((v^2 / 2) t sin phi): the
/// factor by which the gauge image of a stationary-frame solution grows.
inline double gauge_growth_factor(double x, double t, const AnyonicParams& p) {
    const double s = std::sin(p.phi);
    return std::exp(-p.v * x * s + 0.5 * p.v * p.v * t * s);
}

inline void write_norm_csv(std::ostream& os, const EvolutionRecord& r) {
    os << "t,norm\n";
    for (std::size_t j = 0; j < r.times.size(); ++j) os << fmt(r.times[j]) << ',' << fmt(r.norm[j]) << '\n';
}

/// One JSON object per snapshot: {"t": ..., "norm": ..., "density": [...]}.
inline void write_snapshots_ndjson(std::ostream& os, const EvolutionRecord& r) {
    for (std::size_t j = 0; j < r.snapshots.size(); ++j) {
        os << "{\"t\":" << fmt(r.snapshot_times[j]) << ",\"norm\":" << fmt(r.snapshots[j].norm_squared())
           << ",\"density\":";
        write_density_array(os, r.snapshots[j]);
        os << "}\n";
    }
}

}  // namespace anyonpt
