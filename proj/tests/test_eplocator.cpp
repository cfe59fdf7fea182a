#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "epcirc/chirality.hpp"
#include "epcirc/eplocator.hpp"

using namespace epcirc;

namespace {

ParamSet mech_set(double o1, double o2, double k1, double k2, double f, double g) {
    OscillatorParams p;
    p.omega1 = o1;
    p.omega2 = o2;
    p.k1 = k1;
    p.k2 = k2;
    p.f = f;
    p.g = g;
    return ParamSet::from_mechanical(p);
}

// the mechanical EP of the omega1=omega2=1, k1=0.1, k2=0 family over (f, g),
// seeded by a coarse discriminant scan (the oracle the spec names)
EPResult mechanical_ep() {
    const ParamSet base = mech_set(1.0, 1.0, 0.1, 0.0, 0.0, 0.0);
    double best_f = 0.0, best_g = 0.0, best = 1e300;
    for (int i = 1; i <= 60; ++i)
        for (int j = 0; j <= 30; ++j) {
            ParamSet p = base;
            p.set(ParamId::f, 0.005 * i);
            p.set(ParamId::g, 0.005 * j);
            const double d = std::abs(discriminant(p, 1.0));
            if (d < best) {
                best = d;
                best_f = 0.005 * i;
                best_g = 0.005 * j;
            }
        }
    ParamSet seed = base;
    seed.set(ParamId::f, best_f);
    seed.set(ParamId::g, std::max(best_g, 1e-4));
    const auto rhp = resonances(build_matrix(seed)).right_half_plane();
    const cplx omega_guess = (rhp[0] + rhp[1]) / 2.0;
    EpOptions opt;
    opt.omega_ref = 1.0;
    return find_ep(omega_guess, {best_f, std::max(best_g, 1e-4)},
                   {ParamId::f, ParamId::g}, base, opt);
}

ParamSet circuit_at(const EPResult& ep, const CircuitParams& base) {
    CircuitParams c = base;
    c.rp = ep.param_values[0];
    c.cp = ep.param_values[1];
    return ParamSet::from_circuit(c);
}

}  // namespace

TEST_SUITE_BEGIN("eplocator");

TEST_CASE("ep_residual vanishes at reported resonances and grows far away") {
    const ParamSet p = ParamSet::from_circuit(default_table1());
    const ResonanceSet r = resonances(build_matrix(p));
    double max_abs = 0.0;
    for (const cplx& w : r.omega) {
        CHECK(std::abs(ep_residual(w, p).d) <= 1e-9);
        max_abs = std::max(max_abs, std::abs(w));
    }
    CHECK(std::abs(ep_residual(cplx(10.0 * max_abs, 0.0), p).d) > 1e3);
}

TEST_CASE("ep_residual derivative matches central finite differences") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ParamSet p = ParamSet::from_circuit(default_table1());
    for (int rep = 0; rep < 100; ++rep) {
        const cplx omega(9e4 * (1.0 + 0.5 * u(rng)), 1e4 * u(rng));
        const double h = 1e-4 * std::abs(omega);
        const EpResidual r = ep_residual(omega, p);
        const cplx fd_re = (ep_residual(omega + h, p).d - ep_residual(omega - h, p).d) / (2.0 * h);
        CHECK(std::abs(r.dprime - fd_re) <= 1e-6 * std::max(std::abs(r.dprime), 1e-30));
        // differentiating along the imaginary axis must agree (analyticity)
        const cplx fd_im = (ep_residual(omega + cplx(0.0, h), p).d -
                            ep_residual(omega - cplx(0.0, h), p).d) /
                           cplx(0.0, 2.0 * h);
        CHECK(std::abs(r.dprime - fd_im) <= 1e-6 * std::max(std::abs(r.dprime), 1e-30));
    }
}

TEST_CASE("discriminant: diabolic zero, generic nonzero") {
    CHECK(std::abs(discriminant(mech_set(1.0, 1.0, 0.0, 0.0, 0.0, 0.0), 1.0)) <= 1e-12);
    CHECK(std::abs(discriminant(mech_set(1.0, 2.0, 0.0, 0.0, 0.0, 0.0), 1.0)) > 1e-3);
}

TEST_CASE("discriminant dips to a tangential zero across the located EP") {
    const EPResult ep = locate_circuit_ep(default_table1());
    CircuitParams c = default_table1();
    c.rp = ep.param_values[0];
    c.cp = ep.param_values[1];
    const double d0 = std::abs(discriminant(ParamSet::from_circuit(c)));
    CircuitParams lo = c, hi = c;
    lo.rp *= 1.0 - 1e-3;
    hi.rp *= 1.0 + 1e-3;
    const double dlo = std::abs(discriminant(ParamSet::from_circuit(lo)));
    const double dhi = std::abs(discriminant(ParamSet::from_circuit(hi)));
    CHECK(d0 <= 1e-6 * std::max(dlo, dhi));
}

TEST_CASE("seed_from_sweep lands near the singular-point target") {
    const SweepSpec spec = fig2_sweep(ParamSet::from_circuit(default_table1()));
    const SeedResult seed = seed_from_sweep(spec);
    const cplx target(92000.0, -11500.0);
    CHECK(std::abs(seed.omega_guess - target) <= 0.10 * std::abs(target));
    // interior minimum in the Cp direction
    const std::size_t j = seed.flat_index % spec.n2();
    CHECK(j > 0);
    CHECK(j < spec.n2() - 1);
}

TEST_CASE("seed_from_sweep on a single-point grid returns that point") {
    SweepSpec s = fig2_sweep(ParamSet::from_circuit(default_table1()));
    s.start1 = s.stop1 = 470.0;
    s.step1 = 1.0;
    s.start2 = s.stop2 = 65.0e-9;
    s.step2 = 1e-9;
    const SeedResult seed = seed_from_sweep(s);
    CHECK(seed.flat_index == 0);
    CHECK(seed.value1 == 470.0);
    CHECK(seed.value2 == 65.0e-9);
    ParamSet p = s.base;
    p.set(ParamId::rp, 470.0);
    p.set(ParamId::cp, 65.0e-9);
    const auto rhp = resonances(build_matrix(p)).right_half_plane();
    CHECK(std::abs(seed.omega_guess - (rhp[0] + rhp[1]) / 2.0) <= 1e-12 * std::abs(seed.omega_guess));
}

TEST_CASE("seed_from_sweep agrees with an independent brute-force scan") {
    const SweepSpec spec = fig2_sweep(ParamSet::from_circuit(default_table1()));
    const SeedResult seed = seed_from_sweep(spec, ExecPolicy::serial);
    // oracle: direct scan in declared order, strict-less keeps first minimum
    std::size_t best_idx = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < spec.n1(); ++i)
        for (std::size_t j = 0; j < spec.n2(); ++j) {
            const auto rhp = resonances(build_matrix(spec.at(i, j))).right_half_plane();
            const double d = std::abs(rhp[0] - rhp[1]);
            if (d < best) {
                best = d;
                best_idx = i * spec.n2() + j;
            }
        }
    CHECK(seed.flat_index == best_idx);
}

TEST_CASE("seed_from_sweep fails cleanly on overdamped grids") {
    CircuitParams c = default_table1();
    c.r1 = 5000.0;  // kills the port-A resonance pair
    c.r2 = 5000.0;
    SweepSpec s = fig2_sweep(ParamSet::from_circuit(c));
    s.start1 = s.stop1 = 470.0;
    s.step1 = 1.0;
    CHECK_THROWS_AS(seed_from_sweep(s), seed_failure_error);
}

TEST_CASE("locus grid: parallel fan-out is bitwise-identical to serial") {
    const SweepSpec spec = fig2_sweep(ParamSet::from_circuit(default_table1()));
    const auto a = locus_grid(spec, ExecPolicy::serial);
    const auto b = locus_grid(spec, ExecPolicy::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].min_pair_distance == b[i].min_pair_distance);
        for (int k = 0; k < 4; ++k) CHECK(a[i].res.omega[k] == b[i].res.omega[k]);
    }
}

TEST_CASE("find_ep converges on the circuit near the measured singular point") {
    const EPResult ep = locate_circuit_ep(default_table1());
    CHECK(ep.residual_det <= 1e-9);
    CHECK(ep.residual_ddet <= 1e-9);
    CHECK(ep.omega_ep.imag() < 0.0);
    CHECK(std::abs(ep.omega_ep.real() - 92000.0) <= 0.10 * 92000.0);
    CHECK(std::abs(ep.omega_ep.imag() + 11500.0) <= 0.40 * 11500.0);
    CHECK(ep.newton_iterations <= 20);

    // coalescence: exactly two reported resonances agree to 1e-6 relative
    const ResonanceSet r = resonances(build_matrix(circuit_at(ep, default_table1())));
    const auto rhp = r.right_half_plane();
    REQUIRE(rhp.size() == 2);
    CHECK(std::abs(rhp[0] - rhp[1]) <= 1e-6 * std::abs(ep.omega_ep));
    CHECK(std::abs((rhp[0] + rhp[1]) / 2.0 - ep.omega_ep) <= 1e-6 * std::abs(ep.omega_ep));
}

TEST_CASE("find_ep converges on the mechanical family over (f, g)") {
    const EPResult ep = mechanical_ep();
    CHECK(ep.residual_det <= 1e-9);
    CHECK(ep.residual_ddet <= 1e-9);
    ParamSet p = mech_set(1.0, 1.0, 0.1, 0.0, ep.param_values[0], ep.param_values[1]);
    CHECK(std::abs(discriminant(p, 1.0)) <= 1e-8);
}

TEST_CASE("find_ep basin stability under 1% seed perturbation") {
    const EPResult ep = locate_circuit_ep(default_table1());
    const EPResult ep2 = find_ep(ep.omega_ep * 1.01,
                                 {ep.param_values[0] * 1.01, ep.param_values[1] * 0.99},
                                 {ParamId::rp, ParamId::cp},
                                 ParamSet::from_circuit(default_table1()));
    CHECK(std::abs(ep2.omega_ep - ep.omega_ep) <= 1e-6 * std::abs(ep.omega_ep));
    CHECK(std::abs(ep2.param_values[0] - ep.param_values[0]) <= 1e-6 * ep.param_values[0]);
    CHECK(std::abs(ep2.param_values[1] - ep.param_values[1]) <= 1e-6 * ep.param_values[1]);
}

TEST_CASE("the mirror frequency satisfies the EP conditions too") {
    const EPResult ep = locate_circuit_ep(default_table1());
    const ParamSet p = circuit_at(ep, default_table1());
    const EpResidual r = ep_residual(-std::conj(ep.omega_ep), p);
    CHECK(std::abs(r.d) <= 1e-9);
    CHECK(std::abs(r.dprime) * 1e5 <= 1e-9);  // scale-free derivative residual
}

TEST_CASE("Newton residual history is recorded and contracts") {
    const EPResult ep = locate_circuit_ep(default_table1());
    REQUIRE(ep.residual_history.size() >= 2);
    // final steps contract at least quadratically-ish; record the constants
    for (std::size_t k = 0; k + 1 < ep.residual_history.size(); ++k) {
        const double r0 = ep.residual_history[k], r1 = ep.residual_history[k + 1];
        CHECK(r1 < r0);
        if (r0 < 1e-2) {
            const double c = r1 / (r0 * r0);
            MESSAGE("quadratic constant C = ", c, " at r = ", r0);
            CHECK(c <= 1e8);
        }
    }
}

TEST_CASE("branch-point monodromy: a small loop swaps the coalescing pair") {
    const EPResult ep = locate_circuit_ep(default_table1());
    const double rp0 = ep.param_values[0], cp0 = ep.param_values[1];
    const int steps = 64;
    std::array<cplx, 2> track{};
    std::array<cplx, 2> start{};
    for (int s = 0; s <= steps; ++s) {
        const double th = 2.0 * M_PI * double(s) / steps;
        CircuitParams c = default_table1();
        c.rp = rp0 * (1.0 + 1e-3 * std::cos(th));
        c.cp = cp0 * (1.0 + 1e-3 * std::sin(th));
        const auto rhp = resonances(circuit_matrix(c)).right_half_plane();
        REQUIRE(rhp.size() == 2);
        if (s == 0) {
            track = {rhp[0], rhp[1]};
            start = track;
        } else {
            // nearest-neighbor continuation
            const double keep = std::abs(rhp[0] - track[0]) + std::abs(rhp[1] - track[1]);
            const double swap = std::abs(rhp[1] - track[0]) + std::abs(rhp[0] - track[1]);
            track = (keep <= swap) ? std::array<cplx, 2>{rhp[0], rhp[1]}
                                   : std::array<cplx, 2>{rhp[1], rhp[0]};
        }
    }
    CHECK(std::abs(track[0] - start[1]) < std::abs(track[0] - start[0]));
    CHECK(std::abs(track[1] - start[0]) < std::abs(track[1] - start[1]));
}

TEST_CASE("find_ep error paths") {
    // iteration limit with a hopeless budget
    EpOptions strict;
    strict.max_iterations = 1;
    CHECK_THROWS_AS(find_ep(cplx(9.0e4, -9.0e3), {470.0, 6.5e-8}, {ParamId::rp, ParamId::cp},
                            ParamSet::from_circuit(default_table1()), strict),
                    iteration_limit_error);

    // distinct free parameters required
    CHECK_THROWS_AS(find_ep(cplx(9.0e4, -9.0e3), {470.0, 470.0}, {ParamId::rp, ParamId::rp},
                            ParamSet::from_circuit(default_table1())),
                    precondition_error);

    // a diabolic family: identical decoupled oscillators stay doubly
    // degenerate with two eigenvectors, so the rank test must reject it
    const ParamSet dia = mech_set(1.0, 1.0, 0.1, 0.1, 0.0, 0.0);
    EpOptions opt;
    opt.omega_ref = 1.0;
    const cplx s_dia(std::sqrt(1.0 - 0.01), -0.1);  // the exact double resonance
    CHECK_THROWS_AS(
        find_ep(s_dia, {1.0, 0.1}, {ParamId::omega2, ParamId::k2}, dia, opt),
        diabolic_point_error);
}

TEST_CASE("EPResult JSON export carries the pinned keys") {
    const EPResult ep = locate_circuit_ep(default_table1());
    const std::string j = ep.to_json();
    for (const char* key : {"omega_ep_re", "omega_ep_im", "params", "rp_ohm", "cp_f",
                            "residual_det", "residual_ddet", "iterations"})
        CHECK(j.find(key) != std::string::npos);
}

TEST_SUITE_END();
