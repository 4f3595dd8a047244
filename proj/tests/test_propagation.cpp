#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "anyonpt/fft.hpp"
#include "anyonpt/propagation.hpp"

using namespace anyonpt;
using Catch::Approx;

namespace {

WaveFunction gaussian(const Grid& g, double center, double width, double k) {
    return WaveFunction::from_function(g, [&](double x) {
        const double d = (x - center) / width;
        return std::exp(-d * d) * std::polar(1.0, k * x);
    });
}

double max_diff(const WaveFunction& a, const WaveFunction& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a.values[j] - b.values[j]));
    return m;
}

std::vector<double> normalized_density(const WaveFunction& w) {
    auto rho = w.density();
    const double n = integrate(w.grid, rho);
    for (auto& r : rho) r /= n;
    return rho;
}

}  // namespace

TEST_CASE("free propagation is exact per Fourier mode", "[propagation]") {
    const Grid g(-20.0, 20.0, 256);
    const auto p = AnyonicParams::make(pi / 5, 1.3);
    const double k0 = g.wavenumbers()[7];
    const auto mode = WaveFunction::from_function(g, [&](double x) { return std::polar(1.0, k0 * x); });
    for (double dt : {0.001, 0.01, 0.3}) {
        const auto out = step_split_fourier(mode, PotentialSpec::zero(), p, dt);
        const cplx factor = std::exp(cplx(0.0, -dt) * (p.rotation() * k0 * k0 - k0 * p.v));
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(out.values[j] - factor * mode.values[j]) < 1e-12);
    }

    // many steps compose to exp(-i E(k) t)
    PropagatorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 2.0;
    const auto rec = evolve(mode, PotentialSpec::zero(), p, cfg);
    const cplx factor = std::exp(cplx(0.0, -2.0) * (p.rotation() * k0 * k0 - k0 * p.v));
    auto expected = mode;
    for (auto& e : expected.values) e *= factor;
    CHECK(max_diff(rec.final_state, expected) < 1e-11);
}

TEST_CASE("anyonic phase damps high wavenumbers", "[propagation]") {
    const Grid g(-20.0, 20.0, 256);
    const auto p = AnyonicParams::make(pi / 3, 0.0);
    const auto psi0 = gaussian(g, 0.0, 0.3, 0.0);
    PropagatorConfig cfg;
    cfg.t_final = 0.2;
    const auto rec = evolve(psi0, PotentialSpec::zero(), p, cfg);
    auto a0 = psi0.values;
    auto a1 = rec.final_state.values;
    FftPair fft(g.size());
    fft.forward(a0);
    fft.forward(a1);
    const auto k = g.wavenumbers();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double expected = std::abs(a0[j]) * std::exp(-std::sin(p.phi) * k[j] * k[j] * 0.2);
        CHECK(std::abs(std::abs(a1[j]) - expected) < 1e-12 * std::abs(a0[0]));
    }
}

TEST_CASE("Hermitian evolution conserves the norm", "[propagation]") {
    const Grid g(-40.0, 40.0, 1024);
    const auto psi0 = gaussian(g, -5.0, 2.0, 1.0).normalized();
    SplitStepPropagator prop(PotentialSpec::well(1.0, 0.0), {}, g, 0.005);
    auto psi = psi0;
    double prev = psi.norm_squared();
    for (int s = 0; s < 200; ++s) {
        prop.step(psi.values, s * 0.005);
        const double now = psi.norm_squared();
        CHECK(std::abs(now - prev) < 1e-10);
        prev = now;
    }
    CHECK(std::abs(prev - 1.0) < 1e-8);
}

TEST_CASE("bound state is stationary", "[propagation]") {
    const Grid g(-40.0, 40.0, 2048);
    const auto u = WaveFunction::from_function(g, [](double x) { return cplx(1.0 / std::cosh(x)); }).normalized();
    PropagatorConfig cfg;
    cfg.dt = 0.001;
    cfg.t_final = 20.0;
    const auto rec = evolve(u, PotentialSpec::well(1.0, 0.0), {}, cfg);
    const auto r0 = u.density();
    const auto r1 = rec.final_state.density();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(r1[j] - r0[j]));
    CHECK(worst < 1e-6);
}

TEST_CASE("Strang splitting is second order", "[propagation]") {
    // complex barrier with drift, packet launched into the barrier
    const Grid g(-64.0, 64.0, 2048);
    const auto spec = PotentialSpec::barrier(3.0, -0.5);
    const auto p = AnyonicParams::make(pi / 8, -2.0);
    const auto psi0 = gaussian(g, -8.0, 3.0, 1.0);
    auto run = [&](double dt) {
        PropagatorConfig cfg;
        cfg.dt = dt;
        cfg.t_final = 5.0;
        return evolve(psi0, spec, p, cfg).final_state;
    };
    const auto ref = run(0.02 / 8);
    const double e1 = max_diff(run(0.02), ref);
    const double e2 = max_diff(run(0.01), ref);
    CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("norm drifts only for non-Hermitian settings", "[propagation]") {
    const Grid g(-64.0, 64.0, 2048);
    PropagatorConfig cfg;
    cfg.t_final = 10.0;
    const auto psi0 = gaussian(g, -20.0, 5.0, 0.0).normalized();

    const auto herm = evolve(psi0, PotentialSpec::barrier(3.0, 0.0), AnyonicParams::make(0.0, -2.0), cfg);
    for (double n : herm.norm) CHECK(std::abs(n - 1.0) < 1e-8);

    const auto pt = evolve(psi0, PotentialSpec::barrier(3.0, -0.5), AnyonicParams::make(0.0, -2.0), cfg);
    double dev = 0.0;
    for (double n : pt.norm) dev = std::max(dev, std::abs(n - 1.0));
    CHECK(dev > 1e-3);
}

TEST_CASE("lab and moving frames agree after the coordinate shift", "[propagation]") {
    const Grid g(-40.0, 40.0, 2048);  // v t = 256 dx
    for (double phi : {0.0, pi / 4}) {
        const auto p = AnyonicParams::make(phi, 1.0);
        const auto spec = PotentialSpec::well(1.0, 0.2);
        const auto psi0 = gaussian(g, 0.0, 2.0, 0.0);
        PropagatorConfig cfg;
        cfg.t_final = 10.0;
        const auto moving = evolve(psi0, spec, p, cfg).final_state;
        cfg.frame = Frame::Lab;
        const auto lab = evolve(psi0, spec, p, cfg).final_state;
        const auto rm = normalized_density(moving);
        const auto rl = normalized_density(lab);
        const std::size_t shift = 256;
        double worst = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(rl[(j + shift) % g.size()] - rm[j]));
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("Galilean invariance at phi = 0", "[propagation]") {
    // box length 52 pi puts alpha = v / 2 on the wavenumber grid for v = 1, 2
    const Grid g(-26.0 * pi, 26.0 * pi, 4096);
    const auto psi0 = gaussian(g, 0.0, 2.0, 0.0).normalized();
    CHECK(gauge_transform_check(PotentialSpec::well(1.0, 0.0), {}, psi0, 2.0) == 0.0);
    CHECK(gauge_transform_check(PotentialSpec::well(1.0, 0.0), AnyonicParams::make(0.0, 1.0), psi0, 10.0) < 1e-6);
    CHECK(gauge_transform_check(PotentialSpec::well(1.0, 0.2), AnyonicParams::make(0.0, 2.0), psi0, 10.0) < 1e-6);
    CHECK_THROWS_AS(gauge_transform_check(PotentialSpec::well(1.0, 0.2), AnyonicParams::make(0.1, 2.0), psi0, 1.0),
                    ContractError);
}

TEST_CASE("gauge growth factor", "[propagation]") {
    CHECK(gauge_growth_factor(3.0, 7.0, AnyonicParams::make(0.0, 2.0)) == 1.0);
    CHECK(gauge_growth_factor(0.0, 1.0, AnyonicParams::make(pi / 2, 2.0)) == Approx(std::exp(2.0)));
    CHECK(gauge_growth_factor(-11.6, 0.0, AnyonicParams::make(pi / 2, 2.0)) > 1e10);
    CHECK(gauge_growth_factor(-11.0, 0.0, AnyonicParams::make(pi / 2, 2.0)) < 1e10);
}

TEST_CASE("propagator contracts", "[propagation]") {
    const Grid g(-20.0, 20.0, 256);
    const auto psi0 = gaussian(g, 0.0, 1.0, 0.0);
    PropagatorConfig cfg;
    cfg.t_final = 1.0;
    cfg.absorber = Absorber{11.0, 1.0};
    CHECK_THROWS_AS(evolve(psi0, PotentialSpec::zero(), {}, cfg), ContractError);
    cfg.absorber = Absorber{5.0, 1.0};
    CHECK_NOTHROW(evolve(psi0, PotentialSpec::zero(), {}, cfg));
    cfg.absorber.reset();
    cfg.dt = 0.0;
    CHECK_THROWS_AS(evolve(psi0, PotentialSpec::zero(), {}, cfg), ContractError);

    // a strongly growing potential overflows and is reported
    cfg.dt = 0.01;
    cfg.t_final = 200.0;
    Tabulated gain{{-5.0, 0.0, 5.0}, {cplx(0.0, 0.0), cplx(0.0, 20.0), cplx(0.0, 0.0)}};
    CHECK_THROWS_AS(evolve(psi0, PotentialSpec::tabulated(gain), {}, cfg), DivergenceError);
}

TEST_CASE("absorber removes outgoing waves", "[propagation]") {
    const Grid g(-40.0, 40.0, 1024);
    const auto psi0 = gaussian(g, 0.0, 2.0, 3.0).normalized();
    PropagatorConfig cfg;
    cfg.t_final = 15.0;
    cfg.absorber = Absorber{10.0, 2.0};
    const auto rec = evolve(psi0, PotentialSpec::zero(), {}, cfg);
    CHECK(rec.norm.back() < 0.01);
}

TEST_CASE("evolution record and exports", "[propagation]") {
    const Grid g(-10.0, 10.0, 64);
    const auto psi0 = gaussian(g, 0.0, 1.0, 0.0);
    PropagatorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 1.0;
    cfg.snapshot_every = 25;
    cfg.norm_every = 10;
    const auto rec = evolve(psi0, PotentialSpec::zero(), {}, cfg);
    CHECK(rec.times.size() == 11);
    CHECK(rec.snapshot_times.size() == 5);
    CHECK(rec.snapshot_times.back() == Approx(1.0));
    CHECK(rec.norm.front() == Approx(psi0.norm_squared()));
    CHECK(rec.norm.back() == Approx(rec.final_state.norm_squared()));

    std::ostringstream csv, nd;
    write_norm_csv(csv, rec);
    write_snapshots_ndjson(nd, rec);
    CHECK(csv.str().rfind("t,norm\n0,", 0) == 0);
    const std::string s = nd.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 5);
    CHECK(s.rfind("{\"t\":0,\"norm\":", 0) == 0);
}
