#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "anyonpt/config.hpp"
#include "anyonpt/io.hpp"
#include "anyonpt/laser_map.hpp"
#include "anyonpt/linalg.hpp"
#include "anyonpt/nonnormal.hpp"
#include "anyonpt/propagation.hpp"
#include "anyonpt/scattering.hpp"
#include "anyonpt/spectra.hpp"

namespace anyonpt {

inline constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

/// One cell of the parameter sweep. NaN marks fields that do not apply.
struct SweepPoint {
    std::size_t index = 0;
    double phi = 0.0;
    double v = 0.0;
    double v_over_vc = not_available;
    double delta = not_available;
    double k = not_available;

    AnyonicParams params() const { return AnyonicParams::make(phi, v); }
    std::optional<double> delta_override() const {
        return std::isnan(delta) ? std::nullopt : std::optional<double>(delta);
    }

    std::string describe() const {
        std::ostringstream os;
        os << "sweep point " << index << " (phi=" << fmt(phi) << ", v=" << fmt(v);
        if (!std::isnan(delta)) os << ", delta=" << fmt(delta);
        if (!std::isnan(k)) os << ", k=" << fmt(k);
        os << ")";
        return os.str();
    }
};

/// Sweep cells in output order: delta, then phi, then v, then carrier k.
inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
    std::vector<SweepPoint> out;
    const std::vector<double> deltas = c.delta.empty() ? std::vector<double>{not_available} : c.delta.values;
    const std::vector<double> ks =
        c.experiment == Runner::Scatter ? c.scatter.carrier.values : std::vector<double>{not_available};
    for (double d : deltas)
        for (double phi : c.phi.values)
            for (double v : c.v.values)
                for (double k : ks) {
                    SweepPoint p;
                    p.index = out.size();
                    p.phi = phi;
                    p.delta = d;
                    p.k = k;
                    if (c.v_relative) {
                        p.v_over_vc = v;
                        p.v = v * *critical_velocity(c.potential.ground_energy(), phi);
                    } else {
                        p.v = v;
                        if (c.potential.is_well() && std::sin(phi) > 0.0)
                            p.v_over_vc = v / *critical_velocity(c.potential.ground_energy(), phi);
                    }
                    out.push_back(p);
                }
    return out;
}

namespace detail {

// Re-raises the active exception with `ctx` prepended, keeping its type.
[[noreturn]] inline void rethrow_with_context(const std::string& ctx) {
    try {
        throw;
    } catch (const DelocalizedError& e) {
        throw DelocalizedError(ctx + e.what());
    } catch (const DomainError& e) {
        throw DomainError(ctx + e.what());
    } catch (const ContractError& e) {
        throw ContractError(ctx + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(ctx + e.what());
    } catch (const DivergenceError& e) {
        throw DivergenceError(ctx + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(ctx + e.what());
    } catch (const InconclusiveError& e) {
        throw InconclusiveError(ctx + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(ctx + e.what());
    } catch (const Error& e) {
        throw Error(ctx + e.what());
    }
}

inline std::string shard_name(const char* stem, std::size_t index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.%s", stem, index, ext);
    return buf;
}

}  // namespace detail

/// Evaluates f(0..n-1) on up to `jobs` threads and returns the results in
/// index order. The first failure (by index) is rethrown after all workers
/// stop.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, F&& f) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= n || failed) return;
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(jobs == 0 ? 1 : jobs, 1, std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Files and table rows produced by one sweep point.
struct Shard {
    std::vector<std::pair<std::string, std::string>> files;
    std::vector<std::string> rows;   // main table
    std::vector<std::string> extra;  // secondary table, if any
};

struct RunOptions {
    unsigned jobs = 1;
    std::filesystem::path output_dir = "output";
};

struct RunSummary {
    std::filesystem::path output_dir;
    std::vector<std::string> files;
};

namespace detail {

template <class F>
std::vector<Shard> run_points(const std::vector<SweepPoint>& pts, unsigned jobs, F&& compute) {
    return parallel_map<Shard>(pts.size(), jobs, [&](std::size_t i) {
        try {
            return compute(pts[i]);
        } catch (const Error&) {
            rethrow_with_context(pts[i].describe() + ": ");
        }
    });
}

inline RunSummary publish(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<Shard>& shards,
                          const std::string& table, const std::string& header, const std::string& extra_table = "",
                          const std::string& extra_header = "") {
    StagedOutput out(opt.output_dir);
    RunSummary summary{opt.output_dir, {}};
    auto add = [&](const std::string& name, const std::string& contents) {
        out.write(name, contents);
        summary.files.push_back(name);
    };
    add("config.json", serialize_config(cfg));
    std::string main = header;
    std::string second = extra_header;
    for (const auto& s : shards) {
        for (const auto& [name, body] : s.files) add(name, body);
        for (const auto& r : s.rows) main += r;
        for (const auto& r : s.extra) second += r;
    }
    add(table, main);
    if (!extra_table.empty()) add(extra_table, second);
    out.commit();
    std::sort(summary.files.begin(), summary.files.end());
    return summary;
}

inline std::string na_or(double x) { return std::isnan(x) ? std::string("nan") : fmt(x); }

// delta actually used at this point, NaN for potentials without one
inline double effective_delta(const ExperimentConfig& c, const SweepPoint& pt) {
    if (!c.potential.is_poschl_teller()) return not_available;
    return pt.delta_override().value_or(c.potential.delta);
}

}  // namespace detail

// ---------------------------------------------------------------- spectrum

inline SpectrumResult compute_spectrum(const ExperimentConfig& c, const SweepPoint& pt, bool vectors = true) {
    const auto p = pt.params();
    const auto h = build_h_eff(c.potential.spec(pt.delta_override()), p, c.grid, resolve_boundary(c.boundary, p));
    SpectrumOptions opt;
    opt.point_fraction = c.spectrum.point_fraction;
    opt.compute_vectors = vectors;
    return solve_spectrum(h, opt);
}

inline RunSummary run_spectrum(const ExperimentConfig& c, const RunOptions& opt) {
    const auto pts = sweep_points(c);
    const auto shards = detail::run_points(pts, opt.jobs, [&](const SweepPoint& pt) {
        const auto p = pt.params();
        const auto r = compute_spectrum(c, pt);
        Shard s;
        std::ostringstream cloud, cont, points;
        write_spectrum_csv(cloud, r);

        const auto curve = dispersion_curve(-c.spectrum.k_max, c.spectrum.k_max, c.spectrum.k_samples, p);
        cont << "k,re_e,im_e\n";
        for (std::size_t j = 0; j < curve.k_samples.size(); ++j)
            cont << fmt(curve.k_samples[j]) << ',' << fmt(curve.energy[j].real()) << ',' << fmt(curve.energy[j].imag()) << '\n';

        points << "n,e_n,re_e,im_e,normalizable\n";
        if (c.potential.is_well()) {
            const double nu = c.potential.nu;
            const auto fam = poschl_teller_energies(nu);
            for (std::size_t n = 0; n < fam.count(); ++n) {
                const double en = fam.energies[n];
                const cplx e = shifted_point_energy(en, p);
                points << n + 1 << ',' << fmt(en) << ',' << fmt(e.real()) << ',' << fmt(e.imag()) << ','
                       << (delocalization_margin(en, p) > 0.0 ? 1 : 0) << '\n';
            }
        }
        s.files = {{detail::shard_name("spectrum", pt.index, "csv"), cloud.str()},
                   {detail::shard_name("continuum", pt.index, "csv"), cont.str()},
                   {detail::shard_name("points", pt.index, "csv"), points.str()}};
        const auto b = resolve_boundary(c.boundary, p);
        std::ostringstream row;
        row << pt.index << ',' << fmt(pt.phi) << ',' << fmt(pt.v) << ',' << detail::na_or(detail::effective_delta(c, pt))
            << ',' << (b == Boundary::Periodic ? "periodic" : "dirichlet") << ',' << r.size() << ',' << r.point_count()
            << '\n';
        s.rows.push_back(row.str());
        return s;
    });
    return detail::publish(c, opt, shards, "summary.csv", "index,phi,v,delta,boundary,eigenvalues,point_count\n");
}

// -------------------------------------------------------------- delocalize

struct DelocalizationPoint {
    std::size_t point_count = 0;
    std::optional<WaveFunction> bound_state;  // dominant point state
    double localization_length = not_available;
    double participation_ratio = not_available;
    double margin = not_available;
    std::optional<WaveFunction> analytic;  // gauge image of the nu = 1 state
};

inline DelocalizationPoint compute_delocalization(const ExperimentConfig& c, const SweepPoint& pt) {
    const auto p = pt.params();
    const auto r = compute_spectrum(c, pt);
    DelocalizationPoint d;
    d.point_count = r.point_count();
    if (const auto dom = r.dominant_point()) {
        d.bound_state = r.eigenvectors[*dom];
        d.localization_length = r.localization_length[*dom];
        d.participation_ratio = r.participation[*dom];
    }
    if (c.potential.is_well()) {
        const double e1 = c.potential.ground_energy();
        d.margin = delocalization_margin(e1, p);
        if (c.potential.nu == 1.0) {
            const double delta = pt.delta_override().value_or(c.potential.delta);
            d.analytic = moving_bound_state(analytic_bound_state_pt(delta, c.grid), e1, p);
        }
    }
    return d;
}

inline RunSummary run_delocalize(const ExperimentConfig& c, const RunOptions& opt) {
    const auto pts = sweep_points(c);
    const auto shards = detail::run_points(pts, opt.jobs, [&](const SweepPoint& pt) {
        const auto d = compute_delocalization(c, pt);
        Shard s;
        std::ostringstream prof;
        prof << "x,numeric,analytic\n";
        const auto num = d.bound_state ? d.bound_state->density() : std::vector<double>{};
        const auto ana = d.analytic ? d.analytic->density() : std::vector<double>{};
        for (std::size_t j = 0; j < c.grid.size(); ++j) {
            prof << fmt(c.grid.x(j)) << ',';
            if (!num.empty()) prof << fmt(num[j]);
            prof << ',';
            if (!ana.empty()) prof << fmt(ana[j]);
            prof << '\n';
        }
        s.files = {{detail::shard_name("profile", pt.index, "csv"), prof.str()}};
        std::ostringstream row;
        row << pt.index << ',' << fmt(pt.phi) << ',' << fmt(pt.v) << ',' << detail::na_or(pt.v_over_vc) << ','
            << detail::na_or(detail::effective_delta(c, pt)) << ',' << d.point_count << ',' << detail::na_or(d.localization_length) << ','
            << detail::na_or(d.participation_ratio) << ',' << detail::na_or(d.margin) << '\n';
        s.rows.push_back(row.str());
        return s;
    });
    return detail::publish(
        c, opt, shards, "delocalization.csv",
        "index,phi,v,v_over_vc,delta,point_count,localization_length,participation_ratio,margin\n");
}

// ----------------------------------------------------------------- scatter

inline ScatteringConfig scattering_config(const ExperimentConfig& c) {
    if (!c.propagator) throw ConfigError("scatter: a propagator section is required");
    return {c.grid, *c.propagator, c.scatter.separatrix};
}

inline PacketScattering compute_scatter(const ExperimentConfig& c, const SweepPoint& pt) {
    return scatter_packet(c.potential.spec(pt.delta_override()), pt.params(),
                          PacketSpec{c.scatter.center, c.scatter.width, pt.k}, scattering_config(c));
}

inline RunSummary run_scatter(const ExperimentConfig& c, const RunOptions& opt) {
    auto pts = sweep_points(c);
    const auto shards = detail::run_points(pts, opt.jobs, [&](const SweepPoint& pt) {
        const auto res = compute_scatter(c, pt);
        Shard s;
        std::ostringstream nd, norm, row;
        write_snapshots_ndjson(nd, res.record);
        write_norm_csv(norm, res.record);
        s.files = {{detail::shard_name("density", pt.index, "ndjson"), nd.str()},
                   {detail::shard_name("norm", pt.index, "csv"), norm.str()}};
        row << pt.index << ',';
        write_scattering_row(row, res.report);
        s.rows.push_back(row.str());
        // stationary r(k) once per (delta, phi, v) cell
        if (!c.scatter.stationary_k.empty() && pt.index % c.scatter.carrier.size() == 0) {
            std::vector<ReflectionTransmission> rt;
            for (double k : c.scatter.stationary_k.values)
                rt.push_back(stationary_rt(c.potential.spec(pt.delta_override()), pt.params(), k));
            std::ostringstream os;
            write_rt_csv(os, c.scatter.stationary_k.values, rt);
            s.files.emplace_back(detail::shard_name("rt", pt.index / c.scatter.carrier.size(), "csv"), os.str());
        }
        return s;
    });
    std::ostringstream header;
    header << "index,";
    write_scattering_header(header);
    return detail::publish(c, opt, shards, "scattering.csv", header.str());
}

// ----------------------------------------------------------------- amplify

struct BreakupMetrics {
    double initial_peak = 0.0;
    double max_displacement = 0.0;
    std::optional<double> escape_time;  // first snapshot with the peak outside the radius
};

inline double peak_position(const WaveFunction& w) {
    std::size_t best = 0;
    double m = -1.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (std::norm(w.values[j]) > m) {
            m = std::norm(w.values[j]);
            best = j;
        }
    return w.grid.x(best);
}

inline BreakupMetrics breakup_metrics(const EvolutionRecord& rec, double radius) {
    BreakupMetrics b;
    if (rec.snapshots.empty()) return b;
    b.initial_peak = peak_position(rec.snapshots.front());
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
        const double x = peak_position(rec.snapshots[s]);
        b.max_displacement = std::max(b.max_displacement, std::abs(x - b.initial_peak));
        if (!b.escape_time && std::abs(x) >= radius) b.escape_time = rec.snapshot_times[s];
    }
    return b;
}

struct AmplifyOutcome {
    bool has_bound_state = false;
    AmplificationReport report;
    std::optional<EvolutionRecord> evolution;
    std::optional<BreakupMetrics> breakup;
};

namespace detail {

// Ground state of the stationary (phi = 0, v = 0) problem on g.
inline std::optional<std::pair<WaveFunction, double>> numeric_ground_state(const PotentialSpec& spec, const Grid& g) {
    const auto r = solve_spectrum(build_h_eff(spec, {}, g, Boundary::Dirichlet));
    std::optional<std::size_t> best;
    for (std::size_t j : r.point_indices())
        if (r.eigenvalues[j].real() < 0.0 && (!best || r.eigenvalues[j].real() < r.eigenvalues[*best].real())) best = j;
    if (!best) return std::nullopt;
    return std::make_pair(r.eigenvectors[*best], r.eigenvalues[*best].real());
}

}  // namespace detail

/// G_inf from the closed-form state when nu = 1, otherwise from the
/// numerical ground state on the config grid.
inline AmplifyOutcome compute_amplify(const ExperimentConfig& c, const SweepPoint& pt) {
    const auto p = pt.params();
    const auto spec = c.potential.spec(pt.delta_override());
    const double delta = c.potential.is_poschl_teller() ? pt.delta_override().value_or(c.potential.delta) : 0.0;
    const bool analytic = c.potential.is_well() && c.potential.nu == 1.0;

    AmplifyOutcome out;
    std::optional<WaveFunction> u_grid;  // stationary state on the config grid
    double e1 = 0.0;
    if (analytic) {
        e1 = -1.0;
        out.report.g_infinity = g_infinity(analytic_bound_state_pt(delta, petermann_grid(p)), e1, p);
        u_grid = analytic_bound_state_pt(delta, c.grid);
    } else {
        if (spec.is_zero()) return out;
        auto gs = detail::numeric_ground_state(spec, c.grid);
        if (!gs) return out;
        u_grid = gs->first;
        e1 = gs->second;
        out.report.g_infinity = g_infinity(*u_grid, e1, p);
    }
    out.has_bound_state = true;
    out.report.phi = p.phi;
    out.report.v = p.v;
    out.report.delta = delta;
    out.report.self_orthogonality = self_orthogonality(*u_grid);
    out.report.delocalization_margin = delocalization_margin(e1, p);

    if (!c.amplify.g_t_times.empty()) {
        const Grid& gt = c.amplify.g_t_grid ? *c.amplify.g_t_grid : c.grid;
        const auto h = build_h_eff(spec, p, gt, resolve_boundary(c.boundary, p));
        const cplx target = shifted_point_energy(e1, p);
        const auto ev = linalg::eigenvalues(h);
        const cplx e_num =
            *std::min_element(ev.begin(), ev.end(), [&](cplx a, cplx b) { return std::abs(a - target) < std::abs(b - target); });
        for (double t : c.amplify.g_t_times.values) out.report.g_t_samples.emplace_back(t, g_t(h, e_num, t));
    }

    if (c.amplify.evolve) {
        const auto start = moving_bound_state(*u_grid, e1, p);
        if (!start) throw DelocalizedError("amplify: the initial bound state is not normalisable at this drift");
        out.evolution = evolve(*start, spec, p, *c.propagator);
        out.breakup = breakup_metrics(*out.evolution, c.amplify.breakup_radius);
    }
    return out;
}

inline RunSummary run_amplify(const ExperimentConfig& c, const RunOptions& opt) {
    const auto pts = sweep_points(c);
    const auto shards = detail::run_points(pts, opt.jobs, [&](const SweepPoint& pt) {
        const auto a = compute_amplify(c, pt);
        Shard s;
        if (!a.has_bound_state) return s;
        std::ostringstream row;
        write_amplification_row(row, a.report);
        s.rows.push_back(row.str());
        if (!a.report.g_t_samples.empty()) {
            std::ostringstream gt;
            write_g_t_csv(gt, a.report);
            s.files.emplace_back(detail::shard_name("g_t", pt.index, "csv"), gt.str());
        }
        if (a.evolution) {
            std::ostringstream nd, norm, dyn;
            write_snapshots_ndjson(nd, *a.evolution);
            write_norm_csv(norm, *a.evolution);
            s.files.emplace_back(detail::shard_name("evolution", pt.index, "ndjson"), nd.str());
            s.files.emplace_back(detail::shard_name("norm", pt.index, "csv"), norm.str());
            dyn << pt.index << ',' << fmt(pt.phi) << ',' << fmt(pt.v) << ',' << detail::na_or(pt.v_over_vc) << ','
                << fmt(a.report.delta) << ',' << fmt(a.report.g_infinity) << ',' << fmt(a.breakup->initial_peak) << ','
                << fmt(a.breakup->max_displacement) << ','
                << (a.breakup->escape_time ? fmt(*a.breakup->escape_time) : std::string("nan")) << '\n';
            s.extra.push_back(dyn.str());
        }
        return s;
    });
    std::ostringstream header;
    write_amplification_header(header);
    if (c.amplify.evolve)
        return detail::publish(c, opt, shards, "amplification.csv", header.str(), "dynamics.csv",
                               "index,phi,v,v_over_vc,delta,g_infinity,initial_peak,max_displacement,escape_time\n");
    return detail::publish(c, opt, shards, "amplification.csv", header.str());
}

// ---------------------------------------------------------------- lasermap

inline RunSummary run_lasermap(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& lm = c.lasermap;
    const auto mapping = map_to_anyonic(lm.cavity, lm.tolerance);
    const auto threshold = mode_locking_threshold(lm.cavity, lm.well_energy);
    Shard s;
    std::ostringstream report;
    write_lasermap_header(report);
    write_lasermap_row(report, mapping, threshold);
    s.files.emplace_back("mapping.csv", report.str());
    for (double ratio : lm.tm_over_tr.values) {
        CavityParams cav = lm.cavity;
        cav.Tm = ratio * cav.TR;
        const double v = map_to_anyonic(cav, lm.tolerance).params.v;
        std::ostringstream row;
        row << fmt(ratio) << ',' << fmt(v) << ',' << (threshold ? fmt(*threshold) : std::string("inf")) << ','
            << (!threshold || std::abs(v) < *threshold ? 1 : 0) << '\n';
        s.rows.push_back(row.str());
    }
    return detail::publish(c, opt, {s}, "thresholds.csv", "tm_over_tr,v,threshold,mode_locked\n");
}

inline RunSummary run_experiment(const ExperimentConfig& c, const RunOptions& opt) {
    switch (c.experiment) {
        case Runner::Spectrum: return run_spectrum(c, opt);
        case Runner::Delocalize: return run_delocalize(c, opt);
        case Runner::Scatter: return run_scatter(c, opt);
        case Runner::Amplify: return run_amplify(c, opt);
        case Runner::Lasermap: return run_lasermap(c, opt);
    }
    throw ConfigError("unknown experiment");
}

}  // namespace anyonpt
