#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "anyonpt/scattering.hpp"

using namespace anyonpt;
using Catch::Approx;

namespace {

ScatteringConfig fig3_config(double t_final) {
    ScatteringConfig c{Grid(-128.0, 128.0, 4096), {}, 0.0};
    c.propagator.t_final = t_final;
    return c;
}

}  // namespace

TEST_CASE("reflected wavenumber", "[scattering]") {
    CHECK(reflected_wavenumber(1.7, {}) == cplx(-1.7, 0.0));
    CHECK(reflected_wavenumber(1.0, AnyonicParams::make(0.0, -2.0)) == cplx(-3.0, 0.0));
    const auto p = AnyonicParams::make(pi / 8, -2.0);
    const cplx kr = reflected_wavenumber(1.0, p);
    CHECK(kr.real() == Approx(-2.8477590650225735).epsilon(1e-12));
    CHECK(kr.imag() == Approx(-0.7653668647301796).epsilon(1e-12));
    CHECK(std::abs(continuous_dispersion(1.0, p) - (p.rotation() * kr * kr - kr * p.v)) < 1e-12);
}

TEST_CASE("elastic identity and evanescence", "[scattering]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double k = 8.0 * u(rng) - 4.0;
        const auto p = AnyonicParams::make(0.5 * pi * u(rng), 8.0 * u(rng) - 4.0);
        const cplx kr = reflected_wavenumber(k, p);
        const cplx e = continuous_dispersion(k, p);
        CHECK(std::abs(e - (p.rotation() * kr * kr - kr * p.v)) < 1e-12 * std::max(1.0, std::abs(e)));
        CHECK(kr.imag() == p.v * std::sin(p.phi));
    }
    CHECK(reflected_wavenumber(2.0, AnyonicParams::make(pi / 3, 0.0)).imag() == 0.0);
    CHECK(reflected_wavenumber(2.0, AnyonicParams::make(0.0, 3.0)).imag() == 0.0);
}

TEST_CASE("group velocity", "[scattering]") {
    CHECK(group_velocity(0.0, AnyonicParams::make(0.0, -2.0)) == 2.0);
    CHECK(std::abs(group_velocity(3.0, AnyonicParams::make(pi / 2, 0.0))) < 1e-15);
    CHECK(group_velocity(1.0, AnyonicParams::make(pi / 8, -2.0)) == Approx(2.0 * std::cos(pi / 8) + 2.0));
}

TEST_CASE("stationary reflection and transmission", "[scattering]") {
    const auto free = stationary_rt(PotentialSpec::zero(), AnyonicParams::make(pi / 5, -1.0), 0.7);
    CHECK(free.r == cplx(0.0));
    CHECK(free.t == cplx(1.0));

    for (double k : {0.3, 0.8, 1.5, 2.5}) {
        const auto rt = stationary_rt(PotentialSpec::well(1.0, 0.0), {}, k);
        CHECK(std::abs(rt.r) < 1e-8);
        CHECK(std::abs(rt.t) == Approx(1.0).epsilon(1e-8));
    }

    for (double k = 0.2; k <= 3.0 + 1e-12; k += 0.2) {
        const auto rt = stationary_rt(PotentialSpec::barrier(1.0, 0.0), {}, k);
        CHECK(std::norm(rt.r) + std::norm(rt.t) == Approx(1.0).margin(1e-6));
    }

    // a tall barrier reflects slow waves, a weak one barely touches fast ones
    CHECK(std::norm(stationary_rt(PotentialSpec::barrier(3.0, 0.0), {}, 0.5).r) > 0.9);
    CHECK(std::norm(stationary_rt(PotentialSpec::barrier(0.01, 0.0), {}, 2.0).r) < 1e-4);

    // drifting barrier in the anyonic phase: the reflected mode is evanescent
    const auto p = AnyonicParams::make(pi / 8, -2.0);
    const auto rt = stationary_rt(PotentialSpec::barrier(3.0, -0.5), p, 0.5);
    CHECK(reflected_wavenumber(0.5, p).imag() != 0.0);
    CHECK(std::isfinite(std::abs(rt.r)));
    CHECK(std::abs(rt.r) > 0.0);
}

TEST_CASE("stationary_rt errors", "[scattering]") {
    CHECK_THROWS_AS(stationary_rt(PotentialSpec::barrier(1.0, 0.0), AnyonicParams::make(0.0, 2.0), 0.5),
                    ContractError);
    // zero group velocity
    CHECK_THROWS_AS(stationary_rt(PotentialSpec::barrier(1.0, 0.0), AnyonicParams::make(0.0, -2.0), -1.0),
                    ContractError);
    CHECK_THROWS_AS(stationary_rt(PotentialSpec::barrier(1.0, 0.0), {}, 0.0), ContractError);
    // k and k_r = -k almost coincide
    CHECK_THROWS_AS(stationary_rt(PotentialSpec::barrier(1.0, 0.0), {}, 2e-7), NumericalError);
    Tabulated slab{{-5.0, 5.0}, {cplx(1.0), cplx(1.0)}};
    CHECK_THROWS_AS(stationary_rt(PotentialSpec::tabulated(slab), {}, 1.0), ContractError);
}

TEST_CASE("packet specification", "[scattering]") {
    const Grid g(-50.0, 50.0, 512);
    CHECK_THROWS_AS(PacketSpec({0.0, 0.0, 0.0}).validate(g), ContractError);
    CHECK_THROWS_AS(PacketSpec({25.0, 10.0, 0.0}).validate(g), ContractError);
    CHECK_NOTHROW(PacketSpec({-15.0, 10.0, 1.0}).validate(g));
    const auto psi = PacketSpec{-15.0, 10.0, 1.0}.sample(g);
    std::size_t peak = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(psi.values[j]) > std::abs(psi.values[peak])) peak = j;
    CHECK(g.x(peak) == Approx(-15.0).margin(g.dx()));
}

TEST_CASE("free packet is fully transmitted", "[scattering]") {
    for (double phi : {0.0, pi / 8}) {
        const auto rep = run_packet_scattering(PotentialSpec::zero(), AnyonicParams::make(phi, -2.0),
                                               PacketSpec{-32.0, 10.0, 0.0}, fig3_config(50.0));
        CHECK(rep.transmitted_power_fraction > 0.999);
        CHECK(rep.reflected_power_fraction + rep.transmitted_power_fraction == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("drifting barrier becomes reflectionless in the anyonic phase", "[scattering]") {
    const auto barrier = PotentialSpec::barrier(3.0, -0.5);
    const auto pt = run_packet_scattering(barrier, AnyonicParams::make(0.0, -2.0), PacketSpec{-32.0, 10.0, 0.0},
                                          fig3_config(50.0));
    CHECK(pt.reflected_power_fraction > 0.5);
    CHECK_FALSE(pt.reflected_is_evanescent);
    for (double k : {0.0, 1.0}) {
        const auto rep = run_packet_scattering(barrier, AnyonicParams::make(pi / 8, -2.0), PacketSpec{-32.0, 10.0, k},
                                               fig3_config(k == 0.0 ? 50.0 : 30.0));
        CHECK(rep.reflected_power_fraction < 0.01);
        CHECK(rep.reflected_is_evanescent);
        CHECK(rep.k_reflected.imag() == Approx(-2.0 * std::sin(pi / 8)));
    }
}

TEST_CASE("narrow-band packet matches the stationary coefficient", "[scattering]") {
    // PT barrier at phi = 0: the packet sees |r(k)|^2 around the carrier
    const auto barrier = PotentialSpec::barrier(1.0, 0.0);
    for (double v : {0.0, -2.0}) {
        const auto p = AnyonicParams::make(0.0, v);
        const double k = v == 0.0 ? 1.0 : 0.0;
        const double r2 = std::norm(stationary_rt(barrier, p, k).r);
        const auto rep =
            run_packet_scattering(barrier, p, PacketSpec{-40.0, 12.0, k}, {Grid(-160.0, 160.0, 4096), {0.005, 60.0}, 0.0});
        CHECK(rep.reflected_power_fraction == Approx(r2).epsilon(0.1));
    }
}

TEST_CASE("unfinished interaction is inconclusive", "[scattering]") {
    CHECK_THROWS_AS(run_packet_scattering(PotentialSpec::barrier(3.0, -0.5), AnyonicParams::make(0.0, -2.0),
                                          PacketSpec{-32.0, 10.0, 0.0}, fig3_config(10.0)),
                    InconclusiveError);
    // packet launched away from the barrier
    CHECK_THROWS_AS(run_packet_scattering(PotentialSpec::barrier(3.0, -0.5), AnyonicParams::make(0.0, 2.0),
                                          PacketSpec{-32.0, 10.0, 0.0}, fig3_config(10.0)),
                    ContractError);
}

TEST_CASE("scattering exports", "[scattering]") {
    ScatteringReport r;
    r.phi = 0.5;
    r.v = -2.0;
    r.k_incident = 1.0;
    r.k_reflected = cplx(-3.0, -0.25);
    r.reflected_power_fraction = 0.125;
    r.transmitted_power_fraction = 0.875;
    r.reflected_is_evanescent = true;
    std::ostringstream os;
    write_scattering_header(os);
    write_scattering_row(os, r);
    CHECK(os.str() == "phi,v,k,re_k_r,im_k_r,reflected,transmitted,evanescent\n0.5,-2,1,-3,-0.25,0.125,0.875,1\n");

    const std::vector<double> ks{0.5, 1.0};
    const std::vector<ReflectionTransmission> rt{{cplx(0.5, -0.5), cplx(1.0, 0.0)}, {cplx(0.0), cplx(0.0, 1.0)}};
    std::ostringstream csv;
    write_rt_csv(csv, ks, rt);
    CHECK(csv.str() == "k,re_r,im_r,re_t,im_t\n0.5,0.5,-0.5,1,0\n1,0,0,0,1\n");
}
