#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "epcirc/chirality.hpp"
#include "epcirc/virtualab.hpp"

using namespace epcirc;

namespace {

double max_abs_eig(const SystemMatrix& m) {
    const double scale = std::max(1.0, m.m.max_row_sum());
    double v = 0.0;
    for (const cplx& sig : poly_roots(char_poly(m.m * (1.0 / scale))))
        v = std::max(v, std::abs(sig) * scale);
    return v;
}

// end-to-end eigenvalue recovery error through the impulse pipeline with the
// ideal-impulse (flat) voltage-spectrum normalization
double pipeline_error(const SystemMatrix& m, double tp, bool port_a_only,
                      ResonanceSet* fitted_out = nullptr) {
    const ImpulseResult imp = impulse_experiment(m, tp, 1e-6, 8192, port_a_only);
    double max_re = 0.0;
    const ResonanceSet direct = resonances(m);
    for (const cplx& w : direct.omega) max_re = std::max(max_re, std::abs(w.real()));
    const SpectrumSamples ia = dft(imp.ts, "i_a").restricted(3.0 * max_re);
    const SpectrumSamples va = flat_pulse_spectrum(ia, imp.pulse_area);
    const RationalFit fit = fit_rational(ia, va);
    const ResonanceSet fitted = fitted_eigenvalues(fit);
    if (fitted_out) *fitted_out = fitted;
    double err = 0.0;
    for (int k = 0; k < 4; ++k)
        err = std::max(err, std::abs(fitted.omega[k] - direct.omega[k]) /
                                std::abs(direct.omega[k]));
    return err;
}

}  // namespace

TEST_SUITE_BEGIN("virtualab");

TEST_CASE("impulse pulse-width bookkeeping and the validity warning flag") {
    const SystemMatrix m = circuit_matrix(default_table1());
    const double wmax = max_abs_eig(m);
    // 1 us < 0.1/max|omega| ~ 1.07 us: valid impulse, no warning
    const ImpulseResult ok = impulse_experiment(m, 1e-6, 1e-6, 256);
    CHECK(!ok.pulse_width_warning);
    CHECK(ok.t_p == 1e-6);
    // 5/max|omega| is far too wide
    const ImpulseResult bad = impulse_experiment(m, 5.0 / wmax, 1e-6, 256);
    CHECK(bad.pulse_width_warning);
    CHECK_THROWS_AS(impulse_experiment(m, -1.0, 1e-6, 64), precondition_error);
}

TEST_CASE("zero-amplitude pulse produces identically zero response") {
    const SystemMatrix m = circuit_matrix(default_table1());
    const ImpulseResult r = impulse_experiment(m, 1e-6, 1e-6, 512, false, 0.0);
    for (const auto& ch : r.ts.samples)
        for (double v : ch) CHECK(v == 0.0);
}

TEST_CASE("dft of a unit impulse is flat") {
    TimeSeries ts;
    ts.dt = 1e-6;
    ts.channels = {"x"};
    ts.samples = {std::vector<double>(64, 0.0)};
    ts.samples[0][0] = 1.0;
    const SpectrumSamples sp = dft(ts, "x");
    CHECK(sp.omega.size() == 129);  // 4*64/2 + 1 one-sided bins
    CHECK(sp.omega[0] == 0.0);
    for (const cplx& v : sp.value) CHECK(std::abs(v - 1.0) <= 1e-12);
}

TEST_CASE("dft of an integer-period sinusoid concentrates on its bin") {
    const std::size_t n = 128;
    TimeSeries ts;
    ts.dt = 1.0;
    ts.channels = {"x"};
    ts.samples = {std::vector<double>(n)};
    const int cycles = 12;
    for (std::size_t k = 0; k < n; ++k)
        ts.samples[0][k] = std::sin(2.0 * M_PI * cycles * double(k) / double(n));
    const SpectrumSamples sp = dft(ts, "x");
    // peak sits at padded index 4*cycles; compare against the other bins of
    // the natural (unpadded) grid, where integer-period leakage is exactly zero
    const std::size_t peak = 4 * cycles;
    const double pm = std::abs(sp.value[peak]);
    for (std::size_t k = 0; k + 1 < sp.omega.size(); k += 4)
        if (k != peak) CHECK(pm >= 100.0 * std::abs(sp.value[k]));
}

TEST_CASE("dft matches the direct quadratic-time summation oracle") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 100;
    TimeSeries ts;
    ts.dt = 2.5e-4;
    ts.channels = {"x"};
    ts.samples = {std::vector<double>(n)};
    for (double& v : ts.samples[0]) v = u(rng);
    const SpectrumSamples sp = dft(ts, "x");

    const std::size_t padded = 512;  // 4 * next_pow2(100)
    REQUIRE(sp.omega.size() == padded / 2 + 1);
    double scale = 0.0;
    for (const cplx& v : sp.value) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k <= padded / 2; k += 7) {
        cplx direct = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * M_PI * double(j) * double(k) / double(padded);
            direct += ts.samples[0][j] * cplx(std::cos(ang), std::sin(ang));
        }
        CHECK(std::abs(sp.value[k] - direct) <= 1e-9 * scale);
    }
}

TEST_CASE("fit_rational recovers a known rational function exactly") {
    RationalFit truth;
    truth.omega_ref = 1e5;
    truth.num = {0.3, -1.2, 0.8, 0.05, 0.4};
    truth.den = {1.1, 0.7, 2.3, 0.9, 1.0};
    SpectrumSamples f, ones;
    for (int k = 1; k <= 400; ++k) {
        const double w = 600.0 * double(k);
        f.omega.push_back(w);
        f.value.push_back(truth.eval(w));
        ones.omega.push_back(w);
        ones.value.push_back(1.0);
    }
    const RationalFit fit = fit_rational(f, ones, truth.omega_ref);
    for (int j = 0; j < 5; ++j) {
        CHECK(std::abs(fit.num[j] - truth.num[j]) <= 1e-8 * std::max(1.0, std::abs(truth.num[j])));
        CHECK(std::abs(fit.den[j] - truth.den[j]) <= 1e-8 * std::max(1.0, std::abs(truth.den[j])));
    }
}

TEST_CASE("fit_rational rejects structureless and short inputs") {
    SpectrumSamples f, ones;
    for (int k = 1; k <= 100; ++k) {
        f.omega.push_back(1000.0 * k);
        f.value.push_back(cplx(2.5, 0.0));  // constant response: rank-deficient
        ones.omega.push_back(1000.0 * k);
        ones.value.push_back(1.0);
    }
    CHECK_THROWS_AS(fit_rational(f, ones), fit_degenerate_error);

    SpectrumSamples tiny = f, tones = ones;
    tiny.omega.resize(8);
    tiny.value.resize(8);
    tones.omega.resize(8);
    tones.value.resize(8);
    CHECK_THROWS_AS(fit_rational(tiny, tones), precondition_error);
}

TEST_CASE("fitted_eigenvalues unscales the denominator roots") {
    RationalFit fit;
    fit.omega_ref = 1e5;
    fit.num = {1.0, 0.0, 0.0, 0.0, 0.0};
    fit.den = {4.0, 0.0, 5.0, 0.0, 1.0};  // (sigma^2+1)(sigma^2+4)
    const ResonanceSet r = fitted_eigenvalues(fit);
    std::vector<double> re;
    for (const cplx& w : r.omega) {
        re.push_back(std::abs(w.real()));
        CHECK(std::abs(w.imag()) <= 1e-9 * std::abs(w.real()));
    }
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(1e5).epsilon(1e-9));
    CHECK(re[1] == doctest::Approx(1e5).epsilon(1e-9));
    CHECK(re[2] == doctest::Approx(2e5).epsilon(1e-9));
    CHECK(re[3] == doctest::Approx(2e5).epsilon(1e-9));
}

TEST_CASE("impulse pipeline recovers the default-circuit eigenvalues to 1e-2") {
    const SystemMatrix m = circuit_matrix(default_table1());
    CHECK(pipeline_error(m, 1e-6, false) <= 1e-2);
}

TEST_CASE("violating the pulse-width condition degrades the recovery >= 5x") {
    const SystemMatrix m = circuit_matrix(default_table1());
    const double wmax = max_abs_eig(m);
    const double base = pipeline_error(m, 0.1 / wmax, false);
    const double wide = pipeline_error(m, 5.0 / wmax, false);
    CHECK(wide >= 5.0 * base);
}

TEST_CASE("fitted eigenvalues are configuration-independent (port A vs both)") {
    const SystemMatrix m = circuit_matrix(default_table1());
    ResonanceSet both, a_only;
    pipeline_error(m, 1e-6, false, &both);
    pipeline_error(m, 1e-6, true, &a_only);
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(both.omega[k] - a_only.omega[k]) <= 1e-3 * std::abs(both.omega[k]));
}

TEST_CASE("excitation signal identities") {
    ExcitationSpec e;
    e.amplitude = 2.0;
    e.omega0 = 9.2e4;
    e.gamma0 = 8.2e3;
    e.phi_v = M_PI / 2.0;
    e.validate();
    for (double t : {0.0, 1e-5, 7e-5, 3e-4})
        CHECK(std::abs(e(t) - 2.0 * std::cos(e.omega0 * t) * std::exp(-e.gamma0 * t)) <= 1e-12);
    CHECK(e(-1e-9) == 0.0);

    ExcitationSpec bad = e;
    bad.gamma0 = -1.0;
    CHECK_THROWS_AS(bad.validate(), precondition_error);
}

TEST_CASE("fit_decaying_sinusoid recovers amplitude and phase") {
    const double w0 = 9.0e4, g0 = 8.0e3;
    TimeSeries ts;
    ts.dt = 1e-6;
    ts.channels = {"y"};
    const std::size_t n = 700;
    ts.samples = {std::vector<double>(n)};

    SUBCASE("noiseless synthetic signal") {
        for (std::size_t k = 0; k < n; ++k) {
            const double t = double(k) * ts.dt;
            ts.samples[0][k] = std::exp(-g0 * t) * std::sin(w0 * t + 0.3);
        }
        const SinusoidFit f = fit_decaying_sinusoid(ts, "y", w0, g0);
        CHECK(std::abs(f.amplitude - 1.0) <= 1e-10);
        CHECK(std::abs(f.phase - 0.3) <= 1e-10);
        CHECK(f.residual <= 1e-10);
    }
    SUBCASE("quadrature phase maps to the cosine coefficient") {
        for (std::size_t k = 0; k < n; ++k) {
            const double t = double(k) * ts.dt;
            ts.samples[0][k] = 0.7 * std::exp(-g0 * t) * std::sin(w0 * t + M_PI / 2.0);
        }
        const SinusoidFit f = fit_decaying_sinusoid(ts, "y", w0, g0);
        CHECK(std::abs(f.phase - M_PI / 2.0) <= 1e-9);
        CHECK(std::abs(f.amplitude - 0.7) <= 1e-9);
    }
    SUBCASE("a second decaying mode 40 dB down shifts the phase < 0.01 rad") {
        for (std::size_t k = 0; k < n; ++k) {
            const double t = double(k) * ts.dt;
            ts.samples[0][k] = std::exp(-g0 * t) * std::sin(w0 * t + 0.3) +
                               0.01 * std::exp(-1.3 * g0 * t) * std::sin(0.93 * w0 * t + 1.1);
        }
        const SinusoidFit f = fit_decaying_sinusoid(ts, "y", w0, g0);
        CHECK(std::abs(f.phase - 0.3) <= 0.01);
    }
    SUBCASE("short windows are rejected") {
        TimeSeries small = ts;
        small.samples[0].resize(100);  // 100 us < 4 periods (= 279 us)
        CHECK_THROWS_AS(fit_decaying_sinusoid(small, "y", w0, g0), insufficient_data_error);
    }
}

TEST_CASE("phase experiment: decoupled identical circuits follow the drive") {
    CircuitParams c = default_table1();
    c.cs = c.cp;
    c.ls = c.lp;
    c.rs = c.rp;
    c.r2 = c.r1;
    c.mmut = 1e-12;  // effectively decoupled
    const SystemMatrix m = circuit_matrix(c);

    const auto rhp = resonances(m).right_half_plane();
    EPResult drive;
    drive.omega_ep = rhp[0];
    const PhaseExperimentResult r = phase_experiment(m, drive, 8);
    // each port only sees its own drive, so the current phase difference
    // tracks the excitation phase difference (up to the ~0.07 rad wobble the
    // decaying-sinusoid fit puts on a resonantly driven channel)
    for (std::size_t k = 0; k < r.dphi_v.size(); ++k) {
        double diff = r.dphi_i[k] - r.dphi_v[k];
        while (diff > M_PI) diff -= 2.0 * M_PI;
        while (diff <= -M_PI) diff += 2.0 * M_PI;
        CHECK(std::abs(diff) <= 0.10);
    }
}

TEST_CASE("phase experiment at the EP: plateau regression and ratio agreement") {
    const EPResult ep = locate_circuit_ep(default_table1());
    CircuitParams c = default_table1();
    c.rp = ep.param_values[0];
    c.cp = ep.param_values[1];
    const SystemMatrix m = circuit_matrix(c);
    const PhaseExperimentResult r = phase_experiment(m, ep, 16);

    REQUIRE(r.dphi_i.size() == 16);
    double mean = 0.0;
    for (double v : r.dphi_i) mean += v;
    mean /= 16.0;
    double sd = 0.0;
    for (double v : r.dphi_i) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / 16.0);

    // the plateau sits on the chirality argument (within 0.05 rad)
    const CVec4 u = ep_eigenvector(m, state_eig_from_reported(ep.omega_ep));
    const double plateau_target = measured_ratio(m, u).arg_rad;
    CHECK(std::abs(mean - plateau_target) <= 0.05);
    CHECK(std::abs(mean - M_PI / 2.0) <= 0.10 * M_PI / 2.0);

    // regression pins for the protocol (see notes on the 5% flatness clause)
    CHECK(mean == doctest::Approx(1.6066).epsilon(0.02));
    CHECK(sd == doctest::Approx(0.261).epsilon(0.10));

    CHECK_THROWS_AS(phase_experiment(m, ep, 4), precondition_error);
}

TEST_CASE("phase experiment fan-out is bitwise-identical serial vs parallel") {
    const EPResult ep = locate_circuit_ep(default_table1());
    CircuitParams c = default_table1();
    c.rp = ep.param_values[0];
    c.cp = ep.param_values[1];
    const SystemMatrix m = circuit_matrix(c);
    const PhaseExperimentResult a = phase_experiment(m, ep, 16, {}, ExecPolicy::serial);
    const PhaseExperimentResult b = phase_experiment(m, ep, 16, {}, ExecPolicy::parallel);
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(a.dphi_i[k] == b.dphi_i[k]);
        CHECK(a.phi_ia[k] == b.phi_ia[k]);
        CHECK(a.residual[k] == b.residual[k]);
    }
}

TEST_CASE("settling adequacy holds when every mode outpaces the drive decay") {
    // At the EP itself the secular envelope decays only algebraically (see
    // notes); with a drive slower than every mode the transient separation is
    // exponential and doubling the settle window moves the phases < 1e-4 rad.
    const EPResult ep = locate_circuit_ep(default_table1());
    CircuitParams c = default_table1();
    c.rp = ep.param_values[0];
    c.cp = ep.param_values[1];
    const SystemMatrix m = circuit_matrix(c);

    const double w0 = std::abs(ep.omega_ep.real());
    const double g0 = 0.3 * (-ep.omega_ep.imag());  // slower than every mode
    const double period = 2.0 * M_PI / w0;

    auto fitted_phase = [&](double t_settle) {
        const double t_hi = t_settle + 6.0 * period;
        const std::size_t n = std::size_t(std::ceil(t_hi / 1e-6)) + 2;
        const PortInput input = [&](double t) {
            const double v = std::sin(w0 * t) * std::exp(-g0 * t);
            return std::array<double, 2>{v, v};
        };
        const TimeSeries ts = simulate(m, input, 1e-6, n);
        const TimeSeries win = ts.slice(t_settle, t_hi);
        return fit_decaying_sinusoid(win, "i_a", w0, g0).phase;
    };

    // settle by the decay-rate *gap*: the transient is down e^-12 at t1
    const double gap = (-ep.omega_ep.imag()) - g0;
    const double t1 = 12.0 / gap;
    const double p1 = fitted_phase(t1);
    const double p2 = fitted_phase(2.0 * t1);
    CHECK(std::abs(p2 - p1) <= 1e-4);
}

TEST_CASE("doubling the settle window at the EP drifts algebraically (recorded)") {
    const EPResult ep = locate_circuit_ep(default_table1());
    CircuitParams c = default_table1();
    c.rp = ep.param_values[0];
    c.cp = ep.param_values[1];
    const SystemMatrix m = circuit_matrix(c);
    PhaseExperimentOptions opt;
    const PhaseExperimentResult a = phase_experiment(m, ep, 8, opt);
    opt.settle_decay_constants = 6.0;
    const PhaseExperimentResult b = phase_experiment(m, ep, 8, opt);
    double drift = 0.0;
    for (std::size_t k = 0; k < 8; ++k)
        drift = std::max(drift, std::abs(b.phi_ia[k] - a.phi_ia[k]));
    MESSAGE("EP-case settle drift (rad): ", drift);
    CHECK(drift <= 0.7);  // regression corridor; not the 1e-4 of the settled regime
    CHECK(drift >= 1e-3);  // and genuinely algebraic, far from settled
}

TEST_CASE("phase CSV carries the pinned column prefix") {
    PhaseExperimentResult r;
    r.dphi_v = {0.0};
    r.dphi_i = {1.5};
    r.residual = {0.1};
    r.phi_ia = {0.2};
    r.phi_ib = {-1.3};
    const std::string csv = r.to_csv();
    CHECK(csv.rfind("dphi_v_rad,dphi_i_rad,residual", 0) == 0);
}

TEST_SUITE_END();
