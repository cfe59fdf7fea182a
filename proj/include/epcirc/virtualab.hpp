#pragma once

// The two virtual measurement pipelines: impulse-response
// spectroscopy with rational transfer-function fitting, and the steady-state
// decaying-sinusoid phase experiment at the exceptional point.

#include <array>
#include <vector>

#include "epcirc/dynamics.hpp"
#include "epcirc/eplocator.hpp"
#include "epcirc/exec.hpp"

namespace epcirc {

struct SpectrumSamples {
    std::vector<double> omega;  // strictly increasing, rad/s
    std::vector<cplx> value;

    void validate() const;
    // Keep only bins with 0 < omega <= omega_max.
    SpectrumSamples restricted(double omega_max) const;
    std::string to_csv() const;  // "omega_rad_s,re,im"
};

struct ImpulseResult {
    TimeSeries ts;            // channels: states, i_a, i_b, v_a, v_b
    double t_p;               // realized pulse width (snapped to the grid)
    double pulse_area;        // amplitude * t_p / dt, in DFT sample units
    bool pulse_width_warning; // t_p > 0.1 / max|omega_i|
};

// Rectangular voltage pulse of width t_p into port A (and B unless
// port_a_only); sampled response via the ZOH integrator.
ImpulseResult impulse_experiment(const SystemMatrix& m, double t_p, double dt,
                                 std::size_t n, bool port_a_only = false,
                                 double amplitude = 1.0);

// One-sided DFT of a channel at omega_k = 2 pi k/(N dt), zero-padded to
// 4 * next power of two.
SpectrumSamples dft(const TimeSeries& ts, const std::string& channel);

// Flat spectrum of the ideal impulse carrying the same area: the voltage
// spectrum the fitting step assumes when the response is treated as the
// system's impulse response (valid only for t_p << 1/max|omega_i|).
SpectrumSamples flat_pulse_spectrum(const SpectrumSamples& like, double area);

// Quartic-over-quartic rational transfer function (N = M = 4), fitted on the
// scaled axis x = i omega / omega_ref so all coefficients are real.
struct RationalFit {
    std::array<double, 5> num{};  // a_0..a_4
    std::array<double, 5> den{};  // b_0..b_4, monic (b_4 = 1)
    double omega_ref = 1e5;

    cplx eval(double omega) const;
    std::string to_json() const;
};

// Levy linearization followed by Sanathanan-Koerner reweighting (<= 10
// sweeps, stop at 1e-10 relative coefficient change). current/voltage are
// divided pointwise. Throws fit_degenerate_error on rank-deficient normal
// systems and precondition_error on short input.
RationalFit fit_rational(const SpectrumSamples& current, const SpectrumSamples& voltage,
                         double omega_ref = 1e5);

// Denominator roots mapped back through omega_ref to the reporting convention.
ResonanceSet fitted_eigenvalues(const RationalFit& fit);

// Decaying-sinusoid excitation v(t) = C sin(omega0 t + phi_v) e^{-gamma0 (t-t0)},
// zero before t0.
struct ExcitationSpec {
    double amplitude = 1.0;
    double omega0 = 0.0;
    double gamma0 = 0.0;  // must be positive
    double phi_v = 0.0;
    double t0 = 0.0;

    void validate() const;
    double operator()(double t) const;
};

struct SinusoidFit {
    double amplitude = 0.0;
    double phase = 0.0;     // rad, atan2 convention
    double residual = 0.0;  // relative l2 misfit over the window
};

// Linear least squares on e^{-gamma0 t}(alpha sin omega0 t + beta cos omega0 t)
// over the whole series; pass a slice for windowed fits. Needs >= 4 periods.
SinusoidFit fit_decaying_sinusoid(const TimeSeries& ts, const std::string& channel,
                                  double omega0, double gamma0);

struct PhaseExperimentResult {
    std::vector<double> dphi_v;    // excitation phase differences, [0, 2pi)
    std::vector<double> dphi_i;    // fitted current phase differences, (-pi, pi]
    std::vector<double> residual;  // max of the two per-port fit residuals
    std::vector<double> phi_ia;    // per-port phases relative to v_B's zero phase
    std::vector<double> phi_ib;
    double omega0 = 0.0;
    double gamma0 = 0.0;
    double t_settle = 0.0;

    std::string to_csv() const;  // "dphi_v_rad,dphi_i_rad,residual,phi_ia_rad,phi_ib_rad"
};

struct PhaseExperimentOptions {
    double dt = 1e-6;
    double settle_decay_constants = 3.0;  // t_settle = this / gamma_slowest
    double fit_periods = 6.0;
};

// Phase-plateau experiment: for each excitation phase difference, drive port
// A at phase dphi_v and port B at phase 0 (decaying sinusoids at the EP's
// omega0 = |Re S1|, gamma0 = -Im S1), simulate from rest, discard the settle
// window and fit both port currents. Grid points fan out in parallel.
PhaseExperimentResult phase_experiment(const SystemMatrix& m, const EPResult& ep,
                                       int n_phases,
                                       const PhaseExperimentOptions& opt = {},
                                       ExecPolicy policy = ExecPolicy::parallel);

}  // namespace epcirc
