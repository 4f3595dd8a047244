#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"
#include "anyonpt/hamiltonian.hpp"
#include "anyonpt/laser_map.hpp"
#include "anyonpt/nonnormal.hpp"
#include "anyonpt/params.hpp"
#include "anyonpt/potential.hpp"
#include "anyonpt/propagation.hpp"
#include "anyonpt/scattering.hpp"

namespace anyonpt {

using json = nlohmann::ordered_json;

enum class Runner { Spectrum, Delocalize, Scatter, Amplify, Lasermap };

inline const char* to_string(Runner r) {
    switch (r) {
        case Runner::Spectrum: return "spectrum";
        case Runner::Delocalize: return "delocalize";
        case Runner::Scatter: return "scatter";
        case Runner::Amplify: return "amplify";
        case Runner::Lasermap: return "lasermap";
    }
    return "?";
}

inline Runner parse_runner(const std::string& s) {
    for (Runner r : {Runner::Spectrum, Runner::Delocalize, Runner::Scatter, Runner::Amplify, Runner::Lasermap})
        if (s == to_string(r)) return r;
    throw ConfigError("unknown experiment '" + s + "' (expected spectrum, delocalize, scatter, amplify or lasermap)");
}

enum class BoundaryChoice { Auto, Dirichlet, Periodic };

/// Auto picks periodic when the point states have asymmetric tails
/// (v sin(phi) != 0), which a hard wall would turn into skin modes.
inline Boundary resolve_boundary(BoundaryChoice c, const AnyonicParams& p) {
    if (c == BoundaryChoice::Dirichlet) return Boundary::Dirichlet;
    if (c == BoundaryChoice::Periodic) return Boundary::Periodic;
    return p.v * std::sin(p.phi) != 0.0 ? Boundary::Periodic : Boundary::Dirichlet;
}

inline constexpr std::size_t max_sweep_points = 10000;

/// Number from JSON: a literal, or a string such as "pi/3", "-2*pi/5",
/// "0.25 pi", "1.5".
inline double parse_number(const json& j, const std::string& where) {
    if (j.is_number()) {
        const double x = j.get<double>();
        if (!std::isfinite(x)) throw ConfigError(where + ": value must be finite");
        return x;
    }
    if (!j.is_string()) throw ConfigError(where + ": expected a number or an expression like \"pi/3\"");
    const std::string s = j.get<std::string>();
    static const std::regex re(
        R"(^\s*([+-]?)\s*(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*(\d+\.?\d*|\.\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, re) || (!m[2].matched && !m[3].matched))
        throw ConfigError(where + ": cannot parse '" + s + "' as a number");
    if (m[3].matched && m[3].str().find('*') != std::string::npos && !m[2].matched)
        throw ConfigError(where + ": cannot parse '" + s + "' as a number");
    double x = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (m[3].matched) x *= pi;
    if (m[4].matched) {
        const double d = std::stod(m[4].str());
        if (d == 0.0) throw ConfigError(where + ": division by zero in '" + s + "'");
        x /= d;
    }
    if (m[1].str() == "-") x = -x;
    return x;
}

/// Values of one sweep dimension. JSON forms: a number, a list, or
/// {"from": a, "to": b, "count": n} (inclusive, evenly spaced).
struct SweepAxis {
    std::vector<double> values;

    SweepAxis() = default;
    SweepAxis(std::initializer_list<double> v) : values(v) {}

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    static SweepAxis parse(const json& j, const std::string& where) {
        SweepAxis a;
        if (j.is_array()) {
            if (j.empty()) throw ConfigError(where + ": sweep list is empty");
            if (j.size() > max_sweep_points) throw ConfigError(where + ": sweep exceeds 10000 points");
            for (std::size_t i = 0; i < j.size(); ++i)
                a.values.push_back(parse_number(j[i], where + "[" + std::to_string(i) + "]"));
        } else if (j.is_object()) {
            for (const auto& [key, _] : j.items())
                if (key != "from" && key != "to" && key != "count")
                    throw ConfigError(where + ": unknown range key '" + key + "'");
            if (!j.contains("from") || !j.contains("to") || !j.contains("count"))
                throw ConfigError(where + ": a range needs from, to and count");
            const double lo = parse_number(j["from"], where + ".from");
            const double hi = parse_number(j["to"], where + ".to");
            if (!j["count"].is_number_integer() || j["count"].get<long long>() < 1)
                throw ConfigError(where + ".count: must be a positive integer");
            const auto n = j["count"].get<long long>();
            if (n > static_cast<long long>(max_sweep_points)) throw ConfigError(where + ": sweep exceeds 10000 points");
            for (long long i = 0; i < n; ++i)
                a.values.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        } else {
            a.values.push_back(parse_number(j, where));
        }
        return a;
    }

    json to_json() const {
        if (values.size() == 1) return values.front();
        return json(values);
    }

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

/// Potential as written in the config, kept in its source parametrisation
/// so serialisation reproduces it exactly.
struct PotentialConfig {
    std::string kind = "zero";  // zero | well | barrier | tabulated
    double nu = 1.0;
    double v0 = 0.0;
    double delta = 0.0;
    Tabulated table;

    bool is_well() const { return kind == "well"; }
    bool is_poschl_teller() const { return kind == "well" || kind == "barrier"; }

    PotentialSpec spec(std::optional<double> delta_override = std::nullopt) const {
        const double d = delta_override.value_or(delta);
        if (kind == "zero") return PotentialSpec::zero();
        if (kind == "well") return PotentialSpec::well(nu, d);
        if (kind == "barrier") return PotentialSpec::barrier(v0, d);
        return PotentialSpec::tabulated(table);
    }

    /// Ground-state energy -nu^2 of a Poschl-Teller well.
    double ground_energy() const {
        if (!is_well()) throw ConfigError("potential: a Poschl-Teller well is required here");
        return -nu * nu;
    }

    friend bool operator==(const PotentialConfig&, const PotentialConfig&) = default;
};

struct SpectrumSettings {
    double point_fraction = 0.2;
    double k_max = 4.0;
    std::size_t k_samples = 401;

    friend bool operator==(const SpectrumSettings&, const SpectrumSettings&) = default;
};

struct ScatterSettings {
    double center = -32.0;
    double width = 10.0;
    SweepAxis carrier{0.0};
    double separatrix = 0.0;
    SweepAxis stationary_k;

    friend bool operator==(const ScatterSettings&, const ScatterSettings&) = default;
};

struct AmplifySettings {
    SweepAxis g_t_times;
    std::optional<Grid> g_t_grid;
    bool evolve = false;
    double breakup_radius = 5.0;

    friend bool operator==(const AmplifySettings&, const AmplifySettings&) = default;
};

struct LasermapSettings {
    CavityParams cavity;
    SweepAxis tm_over_tr;
    double well_energy = -1.0;
    double tolerance = 1e-9;
};

inline bool operator==(const CavityParams& a, const CavityParams& b) {
    return a.D == b.D && a.Dg == b.Dg && a.delta1 == b.delta1 && a.delta2 == b.delta2 && a.g == b.g && a.l == b.l &&
           a.Tm == b.Tm && a.TR == b.TR;
}
inline bool operator==(const LasermapSettings& a, const LasermapSettings& b) {
    return a.cavity == b.cavity && a.tm_over_tr == b.tm_over_tr && a.well_energy == b.well_energy &&
           a.tolerance == b.tolerance;
}

inline bool operator==(const Absorber& a, const Absorber& b) { return a.width == b.width && a.strength == b.strength; }
inline bool operator==(const PropagatorConfig& a, const PropagatorConfig& b) {
    return a.dt == b.dt && a.t_final == b.t_final && a.frame == b.frame && a.absorber == b.absorber &&
           a.snapshot_every == b.snapshot_every && a.norm_every == b.norm_every;
}

struct ExperimentConfig {
    Runner experiment = Runner::Spectrum;
    PotentialConfig potential;
    SweepAxis phi{0.0};
    SweepAxis v{0.0};
    bool v_relative = false;  // v given in units of v_c
    SweepAxis delta;          // empty: use the potential's own delta
    Grid grid = Grid::standard();
    BoundaryChoice boundary = BoundaryChoice::Auto;
    std::optional<PropagatorConfig> propagator;
    SpectrumSettings spectrum;
    ScatterSettings scatter;
    AmplifySettings amplify;
    LasermapSettings lasermap;
    std::string output_dir = "output";
    long long seed = 0;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? parse_number(j[key], where + "." + key) : fallback;
}

inline std::size_t count_or(const json& j, const char* key, std::size_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 1)
        throw ConfigError(where + "." + key + ": must be a positive integer");
    return static_cast<std::size_t>(j[key].get<long long>());
}

inline Grid parse_grid(const json& j, const std::string& where) {
    check_keys(j, where, {"x_min", "x_max", "n"});
    if (!j.contains("x_min") || !j.contains("x_max") || !j.contains("n"))
        throw ConfigError(where + ": needs x_min, x_max and n");
    try {
        return Grid(parse_number(j["x_min"], where + ".x_min"), parse_number(j["x_max"], where + ".x_max"),
                    count_or(j, "n", 0, where));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline json grid_json(const Grid& g) { return {{"x_min", g.x_min()}, {"x_max", g.x_max()}, {"n", g.size()}}; }

inline PotentialConfig parse_potential(const json& j, const std::filesystem::path& base) {
    const std::string where = "potential";
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigError("potential: needs a string 'type'");
    PotentialConfig p;
    p.kind = j["type"].get<std::string>();
    if (p.kind == "zero") {
        check_keys(j, where, {"type"});
    } else if (p.kind == "well") {
        check_keys(j, where, {"type", "nu", "delta"});
        p.nu = number_or(j, "nu", 1.0, where);
        p.delta = number_or(j, "delta", 0.0, where);
    } else if (p.kind == "barrier") {
        check_keys(j, where, {"type", "v0", "delta"});
        if (!j.contains("v0")) throw ConfigError("potential: a barrier needs v0");
        p.v0 = number_or(j, "v0", 0.0, where);
        p.delta = number_or(j, "delta", 0.0, where);
    } else if (p.kind == "tabulated") {
        check_keys(j, where, {"type", "file", "x", "re", "im"});
        if (j.contains("file")) {
            if (j.contains("x")) throw ConfigError("potential: give either file or inline x/re/im, not both");
            std::filesystem::path f = j["file"].get<std::string>();
            if (f.is_relative()) f = base / f;
            p.table = load_tabulated_csv(f.string());
        } else {
            if (!j.contains("x") || !j.contains("re")) throw ConfigError("potential: tabulated needs file or x/re");
            const auto xs = SweepAxis::parse(j["x"], "potential.x").values;
            const auto re = SweepAxis::parse(j["re"], "potential.re").values;
            const auto im = j.contains("im") ? SweepAxis::parse(j["im"], "potential.im").values
                                             : std::vector<double>(re.size(), 0.0);
            if (xs.size() != re.size() || xs.size() != im.size())
                throw ConfigError("potential: x, re and im must have equal lengths");
            p.table.x = xs;
            for (std::size_t i = 0; i < re.size(); ++i) p.table.values.emplace_back(re[i], im[i]);
        }
    } else {
        throw ConfigError("potential: unknown type '" + p.kind + "' (zero, well, barrier, tabulated)");
    }
    try {
        p.spec().validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("potential: ") + e.what());
    }
    return p;
}

inline json potential_json(const PotentialConfig& p) {
    json j{{"type", p.kind}};
    if (p.kind == "well") {
        j["nu"] = p.nu;
        j["delta"] = p.delta;
    } else if (p.kind == "barrier") {
        j["v0"] = p.v0;
        j["delta"] = p.delta;
    } else if (p.kind == "tabulated") {
        json re = json::array(), im = json::array();
        for (const auto& c : p.table.values) {
            re.push_back(c.real());
            im.push_back(c.imag());
        }
        j["x"] = p.table.x;
        j["re"] = re;
        j["im"] = im;
    }
    return j;
}

inline PropagatorConfig parse_propagator(const json& j) {
    const std::string where = "propagator";
    check_keys(j, where, {"dt", "t_final", "frame", "snapshot_every", "norm_every", "absorber"});
    PropagatorConfig c;
    c.dt = number_or(j, "dt", c.dt, where);
    c.t_final = number_or(j, "t_final", c.t_final, where);
    if (j.contains("frame")) {
        const auto f = j["frame"].get<std::string>();
        if (f == "moving") c.frame = Frame::Moving;
        else if (f == "lab") c.frame = Frame::Lab;
        else throw ConfigError("propagator.frame: expected 'moving' or 'lab'");
    }
    c.snapshot_every = count_or(j, "snapshot_every", c.snapshot_every, where);
    c.norm_every = count_or(j, "norm_every", c.norm_every, where);
    if (j.contains("absorber")) {
        check_keys(j["absorber"], "propagator.absorber", {"width", "strength"});
        c.absorber = Absorber{number_or(j["absorber"], "width", 0.0, "propagator.absorber"),
                              number_or(j["absorber"], "strength", 0.0, "propagator.absorber")};
    }
    return c;
}

inline json propagator_json(const PropagatorConfig& c) {
    json j{{"dt", c.dt},
           {"t_final", c.t_final},
           {"frame", c.frame == Frame::Moving ? "moving" : "lab"},
           {"snapshot_every", c.snapshot_every},
           {"norm_every", c.norm_every}};
    if (c.absorber) j["absorber"] = {{"width", c.absorber->width}, {"strength", c.absorber->strength}};
    return j;
}

inline CavityParams parse_cavity(const json& j) {
    const std::string where = "lasermap.cavity";
    check_keys(j, where, {"D", "Dg", "delta1", "delta2", "g", "l", "Tm", "TR"});
    CavityParams c;
    c.D = number_or(j, "D", c.D, where);
    c.Dg = number_or(j, "Dg", c.Dg, where);
    c.delta1 = number_or(j, "delta1", c.delta1, where);
    c.delta2 = number_or(j, "delta2", c.delta2, where);
    c.g = number_or(j, "g", c.g, where);
    c.l = number_or(j, "l", c.l, where);
    c.Tm = number_or(j, "Tm", c.Tm, where);
    c.TR = number_or(j, "TR", c.TR, where);
    return c;
}

inline json cavity_json(const CavityParams& c) {
    return {{"D", c.D}, {"Dg", c.Dg}, {"delta1", c.delta1}, {"delta2", c.delta2},
            {"g", c.g}, {"l", c.l},   {"Tm", c.Tm},         {"TR", c.TR}};
}

// Re-raise a module error from validation as a config error.
template <class F>
void as_config_error(const std::string& where, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace detail

/// Total number of sweep points the runner will evaluate.
inline std::size_t sweep_size(const ExperimentConfig& c) {
    switch (c.experiment) {
        case Runner::Lasermap: return std::max<std::size_t>(c.lasermap.tm_over_tr.size(), 1);
        case Runner::Scatter: return c.phi.size() * c.v.size() * c.scatter.carrier.size();
        default: return c.phi.size() * c.v.size() * std::max<std::size_t>(c.delta.size(), 1);
    }
}

inline void validate(const ExperimentConfig& c) {
    detail::as_config_error("potential", [&] { c.potential.spec().validate(); });
    for (double phi : c.phi.values) detail::as_config_error("params.phi", [&] { AnyonicParams::make(phi, 0.0); });
    if (c.v_relative) {
        c.potential.ground_energy();
        for (double phi : c.phi.values)
            if (std::sin(phi) == 0.0) throw ConfigError("params.v_over_vc: v_c is infinite at phi = 0");
    }
    if (!c.delta.empty() && !c.potential.is_poschl_teller())
        throw ConfigError("params.delta: a delta sweep needs a Poschl-Teller potential");
    for (double d : c.delta.values)
        detail::as_config_error("params.delta", [&] { c.potential.spec(d).validate(); });
    if (sweep_size(c) > max_sweep_points) throw ConfigError("sweep exceeds 10000 points");
    if (c.propagator) detail::as_config_error("propagator", [&] { c.propagator->validate(c.grid); });
    if (!(c.spectrum.point_fraction > 0.0 && c.spectrum.point_fraction <= 1.0))
        throw ConfigError("spectrum.point_fraction must lie in (0, 1]");
    if (!(c.spectrum.k_max > 0.0)) throw ConfigError("spectrum.k_max must be positive");

    switch (c.experiment) {
        case Runner::Spectrum:
        case Runner::Delocalize:
            if (c.grid.size() > max_dense_dimension) throw ConfigError("grid: n exceeds the dense eigensolver limit 8192");
            break;
        case Runner::Scatter:
            if (!c.propagator) throw ConfigError("scatter: a propagator section is required");
            if (c.v_relative) throw ConfigError("scatter: give v directly, v_over_vc is for bound states");
            detail::as_config_error("scatter", [&] {
                for (double k : c.scatter.carrier.values)
                    PacketSpec{c.scatter.center, c.scatter.width, k}.validate(c.grid);
            });
            break;
        case Runner::Amplify: {
            if (!c.potential.is_well() && c.potential.kind != "tabulated" && !c.potential.spec().is_zero())
                throw ConfigError("amplify: the potential must be a well");
            const Grid& gt = c.amplify.g_t_grid ? *c.amplify.g_t_grid : c.grid;
            if (!c.amplify.g_t_times.empty() && gt.size() > max_exponential_dimension)
                throw ConfigError("amplify.g_t_grid: n exceeds the matrix-exponential limit 2048");
            for (double t : c.amplify.g_t_times.values)
                if (!(t >= 0.0)) throw ConfigError("amplify.g_t_times: times must be non-negative");
            if (c.amplify.evolve && !c.propagator) throw ConfigError("amplify.evolve needs a propagator section");
            if (!(c.amplify.breakup_radius > 0.0)) throw ConfigError("amplify.breakup_radius must be positive");
            break;
        }
        case Runner::Lasermap:
            detail::as_config_error("lasermap.cavity", [&] { map_to_anyonic(c.lasermap.cavity, c.lasermap.tolerance); });
            if (!(c.lasermap.well_energy < 0.0)) throw ConfigError("lasermap.well_energy must be negative");
            for (double r : c.lasermap.tm_over_tr.values)
                if (!(r > 0.0)) throw ConfigError("lasermap.tm_over_tr: ratios must be positive");
            break;
    }
}

/// Parses a config document. Relative tabulated-potential paths resolve
/// against `base`.
inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base = ".") {
    detail::check_keys(j, "config",
                       {"experiment", "potential", "params", "grid", "boundary", "propagator", "spectrum", "scatter",
                        "amplify", "lasermap", "output_dir", "seed"});
    ExperimentConfig c;
    if (!j.contains("experiment") || !j["experiment"].is_string()) throw ConfigError("config: 'experiment' is required");
    c.experiment = parse_runner(j["experiment"].get<std::string>());
    if (j.contains("potential")) c.potential = detail::parse_potential(j["potential"], base);

    if (j.contains("params")) {
        const auto& p = j["params"];
        detail::check_keys(p, "params", {"phi", "v", "v_over_vc", "delta"});
        if (p.contains("v") && p.contains("v_over_vc")) throw ConfigError("params: give v or v_over_vc, not both");
        if (p.contains("phi")) c.phi = SweepAxis::parse(p["phi"], "params.phi");
        if (p.contains("v")) c.v = SweepAxis::parse(p["v"], "params.v");
        if (p.contains("v_over_vc")) {
            c.v = SweepAxis::parse(p["v_over_vc"], "params.v_over_vc");
            c.v_relative = true;
        }
        if (p.contains("delta")) c.delta = SweepAxis::parse(p["delta"], "params.delta");
    }
    if (j.contains("grid")) c.grid = detail::parse_grid(j["grid"], "grid");
    if (j.contains("boundary")) {
        const auto b = j["boundary"].get<std::string>();
        if (b == "auto") c.boundary = BoundaryChoice::Auto;
        else if (b == "dirichlet") c.boundary = BoundaryChoice::Dirichlet;
        else if (b == "periodic") c.boundary = BoundaryChoice::Periodic;
        else throw ConfigError("boundary: expected auto, dirichlet or periodic");
    }
    if (j.contains("propagator")) c.propagator = detail::parse_propagator(j["propagator"]);
    if (j.contains("spectrum")) {
        const auto& s = j["spectrum"];
        detail::check_keys(s, "spectrum", {"point_fraction", "k_max", "k_samples"});
        c.spectrum.point_fraction = detail::number_or(s, "point_fraction", c.spectrum.point_fraction, "spectrum");
        c.spectrum.k_max = detail::number_or(s, "k_max", c.spectrum.k_max, "spectrum");
        c.spectrum.k_samples = detail::count_or(s, "k_samples", c.spectrum.k_samples, "spectrum");
        if (c.spectrum.k_samples < 2) throw ConfigError("spectrum.k_samples must be at least 2");
    }
    if (j.contains("scatter")) {
        const auto& s = j["scatter"];
        detail::check_keys(s, "scatter", {"center", "width", "k", "separatrix", "stationary_k"});
        c.scatter.center = detail::number_or(s, "center", c.scatter.center, "scatter");
        c.scatter.width = detail::number_or(s, "width", c.scatter.width, "scatter");
        if (s.contains("k")) c.scatter.carrier = SweepAxis::parse(s["k"], "scatter.k");
        c.scatter.separatrix = detail::number_or(s, "separatrix", c.scatter.separatrix, "scatter");
        if (s.contains("stationary_k")) c.scatter.stationary_k = SweepAxis::parse(s["stationary_k"], "scatter.stationary_k");
    }
    if (j.contains("amplify")) {
        const auto& a = j["amplify"];
        detail::check_keys(a, "amplify", {"g_t_times", "g_t_grid", "evolve", "breakup_radius"});
        if (a.contains("g_t_times")) c.amplify.g_t_times = SweepAxis::parse(a["g_t_times"], "amplify.g_t_times");
        if (a.contains("g_t_grid")) c.amplify.g_t_grid = detail::parse_grid(a["g_t_grid"], "amplify.g_t_grid");
        if (a.contains("evolve")) {
            if (!a["evolve"].is_boolean()) throw ConfigError("amplify.evolve must be true or false");
            c.amplify.evolve = a["evolve"].get<bool>();
        }
        c.amplify.breakup_radius = detail::number_or(a, "breakup_radius", c.amplify.breakup_radius, "amplify");
    }
    if (j.contains("lasermap")) {
        const auto& l = j["lasermap"];
        detail::check_keys(l, "lasermap", {"cavity", "tm_over_tr", "well_energy", "tolerance"});
        if (l.contains("cavity")) c.lasermap.cavity = detail::parse_cavity(l["cavity"]);
        if (l.contains("tm_over_tr")) c.lasermap.tm_over_tr = SweepAxis::parse(l["tm_over_tr"], "lasermap.tm_over_tr");
        c.lasermap.well_energy = detail::number_or(l, "well_energy", c.lasermap.well_energy, "lasermap");
        c.lasermap.tolerance = detail::number_or(l, "tolerance", c.lasermap.tolerance, "lasermap");
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) throw ConfigError("seed must be an integer");
        c.seed = j["seed"].get<long long>();
    }
    validate(c);
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base = ".") {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return parse_config(j, base);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/// Canonical JSON form: every field explicit, sweeps as literal lists.
inline json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["potential"] = detail::potential_json(c.potential);
    json p{{"phi", c.phi.to_json()}};
    p[c.v_relative ? "v_over_vc" : "v"] = c.v.to_json();
    if (!c.delta.empty()) p["delta"] = c.delta.to_json();
    j["params"] = p;
    j["grid"] = detail::grid_json(c.grid);
    j["boundary"] = c.boundary == BoundaryChoice::Auto        ? "auto"
                    : c.boundary == BoundaryChoice::Dirichlet ? "dirichlet"
                                                              : "periodic";
    if (c.propagator) j["propagator"] = detail::propagator_json(*c.propagator);
    j["spectrum"] = {{"point_fraction", c.spectrum.point_fraction},
                     {"k_max", c.spectrum.k_max},
                     {"k_samples", c.spectrum.k_samples}};
    json s{{"center", c.scatter.center},
           {"width", c.scatter.width},
           {"k", c.scatter.carrier.to_json()},
           {"separatrix", c.scatter.separatrix}};
    if (!c.scatter.stationary_k.empty()) s["stationary_k"] = c.scatter.stationary_k.to_json();
    j["scatter"] = s;
    json a{{"evolve", c.amplify.evolve}, {"breakup_radius", c.amplify.breakup_radius}};
    if (!c.amplify.g_t_times.empty()) a["g_t_times"] = c.amplify.g_t_times.to_json();
    if (c.amplify.g_t_grid) a["g_t_grid"] = detail::grid_json(*c.amplify.g_t_grid);
    j["amplify"] = a;
    json l{{"cavity", detail::cavity_json(c.lasermap.cavity)},
           {"well_energy", c.lasermap.well_energy},
           {"tolerance", c.lasermap.tolerance}};
    if (!c.lasermap.tm_over_tr.empty()) l["tm_over_tr"] = c.lasermap.tm_over_tr.to_json();
    j["lasermap"] = l;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j;
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace anyonpt
