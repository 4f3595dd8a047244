#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "anyonpt/nonnormal.hpp"
#include "oracles.hpp"

using namespace anyonpt;
using Catch::Approx;

TEST_CASE("analytic nu = 1 bound state", "[nonnormal]") {
    const Grid g(-30.0, 30.0, 3000);
    CHECK(sech_shifted(0.0, 0.0) == cplx(1.0));
    const auto u = analytic_bound_state_pt(0.2, g);
    CHECK(u.norm_squared() == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_bound_state_pt(pi / 2, g), DomainError);

    // H_0 u = -u on the interior, up to the O(dx^2) stencil error
    const auto h = build_h_eff(PotentialSpec::well(1.0, 0.2), {}, g, Boundary::Dirichlet);
    const auto hu = h.apply(u.values);
    double res = 0.0;
    for (std::size_t j = 100; j + 100 < g.size(); ++j) res = std::max(res, std::abs(hu[j] + u.values[j]));
    CHECK(res / u.max_abs() < 1e-3);
    // and the residual is second order: four times finer halves the error twice
    const Grid fine(-30.0, 30.0, 12000);
    const auto uf = analytic_bound_state_pt(0.2, fine);
    const auto hf = build_h_eff(PotentialSpec::well(1.0, 0.2), {}, fine, Boundary::Dirichlet).apply(uf.values);
    double rf = 0.0;
    for (std::size_t j = 400; j + 400 < fine.size(); ++j) rf = std::max(rf, std::abs(hf[j] + uf.values[j]));
    CHECK(rf / uf.max_abs() < 1e-4);
    CHECK(rf / uf.max_abs() < res / u.max_abs() / 10.0);

    // near the exceptional point the state approaches i/(x + i eps) around x = 0
    const double eps = 1e-3;
    for (double x : {-0.02, 0.0, 0.01, 0.05}) {
        const cplx near = sech_shifted(x, 0.5 * pi - eps);
        CHECK(std::abs(near * cplx(x, eps) - cplx(0.0, 1.0)) < 2e-3);
    }
}

TEST_CASE("adjoint bound state", "[nonnormal]") {
    const Grid g(-30.0, 30.0, 6000);
    const auto u0 = analytic_bound_state_pt(0.0, g);
    const auto a0 = adjoint_bound_state(u0, -1.0, {});
    for (std::size_t j = 0; j < g.size(); j += 97) CHECK(std::abs(a0.values[j] - u0.values[j]) < 1e-14);

    const auto u2 = analytic_bound_state_pt(0.2, g);
    const auto a2 = adjoint_bound_state(u2, -1.0, {});
    for (std::size_t j = 0; j < g.size(); j += 97) CHECK(std::abs(a2.values[j] - std::conj(u2.values[j])) < 1e-14);

    const auto p = AnyonicParams::make(pi / 3, 1.0);
    const auto adj = adjoint_bound_state(u2, -1.0, p);
    const auto hdag = build_h_eff(PotentialSpec::well(1.0, 0.2), p, g, Boundary::Dirichlet).adjoint();
    const auto r = hdag.apply(adj.values);
    const cplx target = std::conj(shifted_point_energy(-1.0, p));
    double res = 0.0;
    for (std::size_t j = 200; j + 200 < g.size(); ++j) res = std::max(res, std::abs(r[j] - target * adj.values[j]));
    CHECK(res / adj.max_abs() < 1e-4);

    const double vc = *critical_velocity(-1.0, pi / 3);
    CHECK_THROWS_AS(adjoint_bound_state(u2, -1.0, AnyonicParams::make(pi / 3, vc)), DelocalizedError);
}

TEST_CASE("self orthogonality", "[nonnormal]") {
    const Grid g(-60.0, 60.0, 12000);
    CHECK(self_orthogonality(analytic_bound_state_pt(0.0, g)) == Approx(1.0).epsilon(1e-12));
    CHECK(self_orthogonality(analytic_bound_state_pt(0.2, g)) ==
          Approx(oracle::sech_self_orthogonality(0.2)).epsilon(1e-8));
    CHECK(self_orthogonality(analytic_bound_state_pt(0.2, g)) == Approx(0.973545855771626).epsilon(1e-8));
    const double a = self_orthogonality(analytic_bound_state_pt(0.0, g));
    const double b = self_orthogonality(analytic_bound_state_pt(pi / 4, g));
    const double c = self_orthogonality(analytic_bound_state_pt(0.9 * pi / 2, g));
    CHECK(a > b);
    CHECK(b > c);
    CHECK(c < 0.2);
}

TEST_CASE("Petermann factor closed forms", "[nonnormal]") {
    CHECK(g_infinity(analytic_bound_state_pt(0.0, Grid(-40.0, 40.0, 4000)), -1.0, {}) ==
          Approx(1.0).epsilon(1e-10));

    const double vc = *critical_velocity(-1.0, pi / 3);
    for (double frac : {0.0, 0.2, 0.5, 0.8, 0.95}) {
        const auto p = AnyonicParams::make(pi / 3, frac * vc);
        CHECK(g_infinity_poschl_teller(0.2, p) == Approx(oracle::g_infinity_sech(0.2, pi / 3, p.v)).epsilon(1e-6));
    }
    // reference values at 0.2, 0.8 and 0.95 v_c
    CHECK(g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 3, 0.2 * vc)) == Approx(1.2).epsilon(0.15));
    CHECK(g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 3, 0.8 * vc)) == Approx(19.0).epsilon(0.15));
    CHECK(g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 3, 0.95 * vc)) == Approx(366.0).epsilon(0.15));
    CHECK(g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 3, 0.97 * vc)) > 1e3);

    // the factor depends on v only through v / v_c
    const double vc4 = *critical_velocity(-1.0, pi / 4);
    CHECK(g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 4, 0.8 * vc4)) ==
          Approx(g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 3, 0.8 * vc))).epsilon(1e-8));

    // exceptional-point channel at rest
    const double gq = g_infinity_poschl_teller(pi / 4, {});
    const double g9 = g_infinity_poschl_teller(0.9 * pi / 2, {});
    CHECK(gq == Approx(oracle::g_infinity_sech(pi / 4, 0.0, 0.0)).epsilon(1e-6));
    CHECK(g9 > 10.0 * gq);
}

TEST_CASE("Petermann factor properties", "[nonnormal]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double delta = 1.4 * u(rng) - 0.7;
        const double phi = 0.5 * pi * u(rng);
        const double vc = phi > 0.0 ? 2.0 / std::sin(phi) : 10.0;
        const double v = (2.0 * u(rng) - 1.0) * 0.95 * std::min(vc, 10.0);
        const auto p = AnyonicParams::make(phi, v);
        const auto f = g_infinity_forms(analytic_bound_state_pt(delta, petermann_grid(p, 0.02)), -1.0, p);
        CHECK(f.weighted >= 1.0 - 1e-12);
        CHECK(std::abs(f.weighted - f.biorthogonal) <= 1e-8 * f.weighted);
    }

    double prev = 0.0;
    const double vc = *critical_velocity(-1.0, pi / 3);
    for (double frac : {0.0, 0.2, 0.5, 0.8, 0.95}) {
        const double gv = g_infinity_poschl_teller(0.2, AnyonicParams::make(pi / 3, frac * vc));
        CHECK(gv > prev);
        prev = gv;
    }
}

TEST_CASE("Petermann factor errors", "[nonnormal]") {
    const Grid g(-30.0, 30.0, 600);
    const auto u = analytic_bound_state_pt(0.2, g);
    const double vc = *critical_velocity(-1.0, pi / 3);
    CHECK_THROWS_AS(g_infinity(u, -1.0, AnyonicParams::make(pi / 3, vc)), DelocalizedError);
    CHECK_THROWS_AS(g_infinity(u, -1.0, AnyonicParams::make(pi / 3, 1.2 * vc)), DomainError);

    // two separated lumps, one real and one imaginary: integral of u^2 ~ 0
    const auto self_orthogonal = WaveFunction::from_function(g, [](double x) {
        return cplx(std::exp(-(x - 5.0) * (x - 5.0)), std::exp(-(x + 5.0) * (x + 5.0)));
    });
    CHECK_THROWS_AS(g_infinity(self_orthogonal, -1.0, {}), SingularityError);
}

TEST_CASE("transient amplification G_t", "[nonnormal]") {
    const Grid g(-20.0, 20.0, 256);
    const auto herm = build_h_eff(PotentialSpec::well(1.0, 0.0), {}, g, Boundary::Dirichlet);
    CHECK(g_t(herm, -1.0, 0.0) == 1.0);
    for (double t : {0.5, 1.0, 2.0, 5.0}) CHECK(g_t(herm, -1.0, t) <= 1.0 + 1e-6);

    CHECK_THROWS_AS(g_t(build_h_eff(PotentialSpec::zero(), {}, Grid(-10.0, 10.0, 2049), Boundary::Dirichlet),
                        0.0, 1.0),
                    ContractError);
    // growing modes with Im E far above E_1 overflow the exponential
    CHECK_THROWS_AS(g_t(herm, cplx(0.0, -100.0), 50.0), DivergenceError);
}

TEST_CASE("G_t approaches G_inf for the drifting well", "[nonnormal]") {
    const Grid g(-20.0, 20.0, 400);
    const double vc = *critical_velocity(-1.0, pi / 3);
    const auto p = AnyonicParams::make(pi / 3, 0.2 * vc);
    const auto h = build_h_eff(PotentialSpec::well(1.0, 0.2), p, g, Boundary::Periodic);
    SpectrumOptions opt;
    const auto r = solve_spectrum(h, opt);
    const auto dom = r.dominant_point();
    REQUIRE(dom);
    const double ginf = g_infinity_poschl_teller(0.2, p);
    const double late = g_t(h, r.eigenvalues[*dom], 30.0);
    CHECK(late == Approx(ginf).epsilon(0.2));
    CHECK(late == Approx(oracle::g_infinity_sech(0.2, pi / 3, p.v)).epsilon(0.2));
}

TEST_CASE("amplification CSV", "[nonnormal]") {
    AmplificationReport r;
    r.phi = pi / 3;
    r.v = 0.5;
    r.delta = 0.2;
    r.g_infinity = 1.25;
    r.g_t_samples = {{0.0, 1.0}, {1.0, 1.1}};
    std::ostringstream os;
    write_amplification_header(os);
    write_amplification_row(os, r);
    CHECK(os.str() == "phi,v,delta,g_infinity,self_orthogonality,margin\n1.0471975512,0.5,0.2,1.25,1,0\n");
    std::ostringstream gt;
    write_g_t_csv(gt, r);
    CHECK(gt.str() == "t,g_t\n0,1\n1,1.1\n");
}
