#include "epcirc/virtualab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epcirc/textio.hpp"

namespace epcirc {

void SpectrumSamples::validate() const {
    if (omega.size() != value.size())
        throw precondition_error("spectrum: size mismatch");
    for (std::size_t k = 1; k < omega.size(); ++k)
        if (!(omega[k] > omega[k - 1]))
            throw precondition_error("spectrum: grid not strictly increasing");
    for (const cplx& v : value)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw precondition_error("spectrum: non-finite value");
}

SpectrumSamples SpectrumSamples::restricted(double omega_max) const {
    SpectrumSamples out;
    for (std::size_t k = 0; k < omega.size(); ++k)
        if (omega[k] > 0.0 && omega[k] <= omega_max) {
            out.omega.push_back(omega[k]);
            out.value.push_back(value[k]);
        }
    return out;
}

std::string SpectrumSamples::to_csv() const {
    CsvWriter w("omega_rad_s,re,im");
    for (std::size_t k = 0; k < omega.size(); ++k)
        w.row({fmt_double(omega[k]), fmt_double(value[k].real()),
               fmt_double(value[k].imag())});
    return w.str();
}

ImpulseResult impulse_experiment(const SystemMatrix& m, double t_p, double dt,
                                 std::size_t n, bool port_a_only, double amplitude) {
    if (!(t_p > 0.0)) throw precondition_error("impulse: t_p must be positive");

    double max_abs_omega = 0.0;
    for (const cplx& w : resonances(m).omega)
        max_abs_omega = std::max(max_abs_omega, std::abs(w));

    const std::size_t pulse_samples = std::max<std::size_t>(1, std::size_t(std::llround(t_p / dt)));
    const double t_p_snapped = double(pulse_samples) * dt;

    const PortInput input = [&](double t) -> std::array<double, 2> {
        const double amp = (t < t_p_snapped - 0.5 * dt) ? amplitude : 0.0;
        return {amp, port_a_only ? 0.0 : amp};
    };

    ImpulseResult res;
    res.ts = simulate(m, input, dt, n);
    res.t_p = t_p_snapped;
    res.pulse_area = amplitude * double(pulse_samples);
    res.pulse_width_warning = max_abs_omega > 0.0 && t_p_snapped > 0.1 / max_abs_omega;

    // record the drive waveforms alongside the response
    std::vector<double> va(n), vb(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto u = input(double(k) * dt);
        va[k] = u[0];
        vb[k] = u[1];
    }
    res.ts.channels.push_back("v_a");
    res.ts.channels.push_back("v_b");
    res.ts.samples.push_back(std::move(va));
    res.ts.samples.push_back(std::move(vb));
    return res;
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// iterative radix-2 decimation-in-time FFT, forward sign e^{-i 2 pi jk/N}
void fft_radix2(std::vector<cplx>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / double(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

SpectrumSamples dft(const TimeSeries& ts, const std::string& channel) {
    if (ts.size() == 0) throw precondition_error("dft: empty series");
    const auto& x = ts.samples[std::size_t(ts.channel_index(channel))];
    const std::size_t padded = 4 * next_pow2(x.size());
    std::vector<cplx> buf(padded, cplx(0.0));
    for (std::size_t k = 0; k < x.size(); ++k) buf[k] = x[k];
    fft_radix2(buf);

    SpectrumSamples sp;
    const std::size_t half = padded / 2;
    sp.omega.resize(half + 1);
    sp.value.resize(half + 1);
    const double dw = 2.0 * M_PI / (double(padded) * ts.dt);
    for (std::size_t k = 0; k <= half; ++k) {
        sp.omega[k] = dw * double(k);
        sp.value[k] = buf[k];
    }
    return sp;
}

SpectrumSamples flat_pulse_spectrum(const SpectrumSamples& like, double area) {
    SpectrumSamples sp;
    sp.omega = like.omega;
    sp.value.assign(like.omega.size(), cplx(area, 0.0));
    return sp;
}

cplx RationalFit::eval(double omega) const {
    const cplx x = cplx(0.0, omega / omega_ref);
    cplx n = num[4], d = den[4];
    for (int k = 3; k >= 0; --k) {
        n = n * x + num[k];
        d = d * x + den[k];
    }
    return n / d;
}

std::string RationalFit::to_json() const {
    std::ostringstream o;
    o << "{\n  \"a\": [";
    for (int k = 0; k < 5; ++k) o << (k ? ", " : "") << fmt_double(num[k]);
    o << "],\n  \"b\": [";
    for (int k = 0; k < 5; ++k) o << (k ? ", " : "") << fmt_double(den[k]);
    o << "],\n  \"omega_ref\": " << fmt_double(omega_ref) << "\n}\n";
    return o.str();
}

RationalFit fit_rational(const SpectrumSamples& current, const SpectrumSamples& voltage,
                         double omega_ref) {
    current.validate();
    voltage.validate();
    if (current.omega.size() != voltage.omega.size())
        throw precondition_error("fit_rational: spectra on different grids");
    const std::size_t ns = current.omega.size();
    if (ns < 32) throw precondition_error("fit_rational: need at least 32 samples");
    if (!(current.omega.front() > 0.0))
        throw precondition_error("fit_rational: frequency grid must be strictly positive");

    std::vector<cplx> f(ns), x(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        f[k] = current.value[k] / voltage.value[k];
        x[k] = cplx(0.0, current.omega[k] / omega_ref);
    }

    // unknowns: a0..a4, b0..b3 (b4 = 1). Levy rows:
    //   sum a_j x^j - F sum_{j<4} b_j x^j = F x^4
    std::vector<double> coef(9, 0.0), prev;
    std::vector<double> weight(ns, 1.0);
    for (int sweep = 0; sweep < 10; ++sweep) {
        std::vector<double> a(2 * ns * 9), rhs(2 * ns);
        for (std::size_t k = 0; k < ns; ++k) {
            cplx pw(1.0);
            cplx cols[9];
            for (int j = 0; j < 5; ++j) {
                cols[j] = pw;
                if (j < 4) cols[5 + j] = -f[k] * pw;
                pw *= x[k];
            }
            const cplx r = f[k] * pw / x[k];  // F x^4
            for (int j = 0; j < 9; ++j) {
                a[(2 * k) * 9 + j] = weight[k] * cols[j].real();
                a[(2 * k + 1) * 9 + j] = weight[k] * cols[j].imag();
            }
            rhs[2 * k] = weight[k] * r.real();
            rhs[2 * k + 1] = weight[k] * r.imag();
        }
        prev = coef;
        coef = least_squares(std::move(a), std::move(rhs), int(2 * ns), 9);

        // Sanathanan-Koerner: reweight by the current denominator estimate
        for (std::size_t k = 0; k < ns; ++k) {
            cplx den = 1.0;
            for (int j = 3; j >= 0; --j) den = den * x[k] + coef[5 + j];
            const double m = std::abs(den);
            weight[k] = (m > 1e-300) ? 1.0 / m : 1.0;
        }
        if (sweep > 0) {
            double dn = 0.0, nn = 0.0;
            for (int j = 0; j < 9; ++j) {
                dn += (coef[j] - prev[j]) * (coef[j] - prev[j]);
                nn += coef[j] * coef[j];
            }
            if (dn <= 1e-20 * nn) break;
        }
    }

    RationalFit fit;
    fit.omega_ref = omega_ref;
    for (int j = 0; j < 5; ++j) fit.num[j] = coef[j];
    for (int j = 0; j < 4; ++j) fit.den[j] = coef[5 + j];
    fit.den[4] = 1.0;
    return fit;
}

ResonanceSet fitted_eigenvalues(const RationalFit& fit) {
    PolyCoeffs p;
    for (int j = 0; j < 5; ++j) p.c[j] = fit.den[j];
    const std::vector<cplx> roots = poly_roots(p);
    if (roots.size() != 4)
        throw degenerate_polynomial_error("fitted denominator is not a quartic");
    std::array<cplx, 4> s{};
    for (int k = 0; k < 4; ++k) s[k] = roots[k] * fit.omega_ref;
    return resonance_set_from_state_eigs(s);
}

void ExcitationSpec::validate() const {
    if (!(gamma0 > 0.0)) throw precondition_error("excitation: gamma0 must be positive");
    if (!(amplitude > 0.0)) throw precondition_error("excitation: amplitude must be positive");
}

double ExcitationSpec::operator()(double t) const {
    if (t < t0) return 0.0;
    const double tau = t - t0;
    return amplitude * std::sin(omega0 * tau + phi_v) * std::exp(-gamma0 * tau);
}

SinusoidFit fit_decaying_sinusoid(const TimeSeries& ts, const std::string& channel,
                                  double omega0, double gamma0) {
    const std::size_t n = ts.size();
    const double span = double(n) * ts.dt;
    if (omega0 <= 0.0 || span < 4.0 * 2.0 * M_PI / omega0)
        throw insufficient_data_error("fit_decaying_sinusoid: window shorter than 4 periods");

    const auto& y = ts.samples[std::size_t(ts.channel_index(channel))];
    std::vector<double> a(2 * n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = ts.time(k);
        const double env = std::exp(-gamma0 * t);
        a[2 * k] = env * std::sin(omega0 * t);
        a[2 * k + 1] = env * std::cos(omega0 * t);
        b[k] = y[k];
    }
    const std::vector<double> ab = least_squares(std::move(a), b, int(n), 2);

    SinusoidFit fit;
    fit.amplitude = std::hypot(ab[0], ab[1]);
    fit.phase = std::atan2(ab[1], ab[0]);
    double misfit = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = ts.time(k);
        const double env = std::exp(-gamma0 * t);
        const double model = env * (ab[0] * std::sin(omega0 * t) + ab[1] * std::cos(omega0 * t));
        misfit += (y[k] - model) * (y[k] - model);
        norm += y[k] * y[k];
    }
    fit.residual = (norm > 0.0) ? std::sqrt(misfit / norm) : 0.0;
    return fit;
}

std::string PhaseExperimentResult::to_csv() const {
    CsvWriter w("dphi_v_rad,dphi_i_rad,residual,phi_ia_rad,phi_ib_rad");
    for (std::size_t k = 0; k < dphi_v.size(); ++k)
        w.row({fmt_double(dphi_v[k]), fmt_double(dphi_i[k]), fmt_double(residual[k]),
               fmt_double(phi_ia[k]), fmt_double(phi_ib[k])});
    return w.str();
}

namespace {

double wrap_pi(double x) {
    while (x <= -M_PI) x += 2.0 * M_PI;
    while (x > M_PI) x -= 2.0 * M_PI;
    return x;
}

}  // namespace

PhaseExperimentResult phase_experiment(const SystemMatrix& m, const EPResult& ep,
                                       int n_phases, const PhaseExperimentOptions& opt,
                                       ExecPolicy policy) {
    if (n_phases < 8) throw precondition_error("phase_experiment: n_phases must be >= 8");

    PhaseExperimentResult out;
    out.omega0 = std::abs(ep.omega_ep.real());
    out.gamma0 = -ep.omega_ep.imag();
    if (!(out.gamma0 > 0.0))
        throw precondition_error("phase_experiment: EP decay rate must be positive");

    // slowest decay among the reported resonances at the operating parameters
    double gamma_slowest = std::numeric_limits<double>::infinity();
    for (const cplx& w : resonances(m).omega)
        gamma_slowest = std::min(gamma_slowest, std::abs(w.imag()));
    if (!(gamma_slowest > 0.0))
        throw precondition_error("phase_experiment: undamped operating point never settles");
    out.t_settle = opt.settle_decay_constants / gamma_slowest;

    const double period = 2.0 * M_PI / out.omega0;
    const double t_hi = out.t_settle + opt.fit_periods * period;
    const std::size_t n_steps = std::size_t(std::ceil(t_hi / opt.dt)) + 2;

    out.dphi_v.resize(std::size_t(n_phases));
    out.dphi_i.resize(std::size_t(n_phases));
    out.residual.resize(std::size_t(n_phases));
    out.phi_ia.resize(std::size_t(n_phases));
    out.phi_ib.resize(std::size_t(n_phases));

    for_each_index(std::size_t(n_phases), policy, [&](std::size_t k) {
        const double dphi = 2.0 * M_PI * double(k) / double(n_phases);
        ExcitationSpec va{1.0, out.omega0, out.gamma0, dphi, 0.0};
        ExcitationSpec vb{1.0, out.omega0, out.gamma0, 0.0, 0.0};
        va.validate();
        const PortInput input = [&](double t) -> std::array<double, 2> {
            return {va(t), vb(t)};
        };
        const TimeSeries ts = simulate(m, input, opt.dt, n_steps);
        const TimeSeries win = ts.slice(out.t_settle, t_hi);
        const SinusoidFit fa = fit_decaying_sinusoid(win, "i_a", out.omega0, out.gamma0);
        const SinusoidFit fb = fit_decaying_sinusoid(win, "i_b", out.omega0, out.gamma0);
        out.dphi_v[k] = dphi;
        out.dphi_i[k] = wrap_pi(fa.phase - fb.phase);
        out.residual[k] = std::max(fa.residual, fb.residual);
        out.phi_ia[k] = wrap_pi(fa.phase);
        out.phi_ib[k] = wrap_pi(fb.phase);
    });
    return out;
}

}  // namespace epcirc
