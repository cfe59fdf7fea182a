#pragma once

// State matrices for both parameterizations, resonance extraction with the
// lower-half-plane reporting convention, driven stationary response, and
// exact zero-order-hold time simulation.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "epcirc/model.hpp"
#include "epcirc/numerics.hpp"

namespace epcirc {

// 4x4 real state matrix with the port input map B (4x2), output map C (2x4)
// and feedthrough D (2x2) producing the port currents i_A, i_B.
// State ordering: (p1, p2, q1, q2) mechanical, (vC1, vC2, iL1, iL2) circuit.
struct SystemMatrix {
    enum class Form { mechanical, circuit };
    Form form = Form::mechanical;
    Mat4 m;
    std::array<double, 8> b{};     // row-major 4x2
    std::array<double, 8> cout{};  // row-major 2x4
    std::array<double, 4> d{};     // row-major 2x2

    std::array<cplx, 2> output(const CVec4& x, const std::array<cplx, 2>& u) const;
    std::array<double, 2> output(const Vec4& x, const std::array<double, 2>& u) const;
    std::array<std::string, 4> state_names() const;
};

// Equation-of-motion matrix of the mechanical analog (rows 3-4 are the identity
// injection dq/dt = p).
SystemMatrix mechanical_matrix(const OscillatorParams& p);

// Kirchhoff state equations of the coupled series loops:
//   port -> R_series -> (L || R_parallel) -> C -> ground,
// inductors coupled by mmut. With beta_j = R_par/(R_par + R_ser):
//   C_j dv_j/dt   = beta_j i_Lj + (v_port_j - v_j)/(R_ser_j + R_par_j)
//   L  d(i_L)/dt  = u,  u_j = beta_j (v_port_j - R_ser_j i_Lj - v_j)
//   i_port_j      = beta_j i_Lj + (v_port_j - v_j)/(R_ser_j + R_par_j)
// The winding orientation puts -mmut on the off-diagonal of L (the choice
// that makes port A's phase lead at the EP, as in the experiment).
SystemMatrix circuit_matrix(const CircuitParams& c);

SystemMatrix build_matrix(const ParamSet& p);

// Four complex eigen-frequencies, reported as omega = Omega - i|sigma| for
// state eigenvalues s = sigma +- i Omega; mirror_index pairs omega with -conj(omega).
struct ResonanceSet {
    std::array<cplx, 4> omega{};
    std::array<int, 4> mirror_index{};

    // The two reported values with Re > 0, ascending in Re.
    std::vector<cplx> right_half_plane() const;
    double min_rhp_distance() const;
};

ResonanceSet resonances(const SystemMatrix& m);
// Reporting-convention mapping used by resonances() and the rational fit.
ResonanceSet resonance_set_from_state_eigs(const std::array<cplx, 4>& s);

// State eigenvalue corresponding to a reported frequency (the e^{st} branch
// with Im s >= 0 for Re omega >= 0): s = i * conj(omega).
cplx state_eig_from_reported(cplx omega_reported);

struct DriveSpec {
    cplx amp_a{0.0, 0.0};
    cplx amp_b{0.0, 0.0};
};

struct StationaryResult {
    CVec4 state{};
    cplx i_a, i_b;
};

// Particular solution x e^{i w t} of the driven system. omega is in the reporting convention (conjugated internally). Throws
// resonance_singularity_error when i*omega_internal sits within
// 1e-12*||M|| of an eigenvalue.
StationaryResult stationary_response(const SystemMatrix& m, const DriveSpec& d, cplx omega);

struct TimeSeries {
    double dt = 0.0;
    double t0 = 0.0;
    std::vector<std::string> channels;
    std::vector<std::vector<double>> samples;  // per channel

    std::size_t size() const { return samples.empty() ? 0 : samples[0].size(); }
    double time(std::size_t k) const { return t0 + double(k) * dt; }
    int channel_index(const std::string& name) const;
    TimeSeries slice(double t_lo, double t_hi) const;
    std::string to_csv() const;  // "t,<channel>,..." 17 significant digits
};

using PortInput = std::function<std::array<double, 2>(double t)>;

// Exact zero-order-hold stepping x_{k+1} = E x_k + (E-I) M^{-1} B u_k with
// E = exp(M dt); falls back to classic RK4 (same dt) when M is singular.
// Output channels: the four states plus i_a, i_b.
TimeSeries simulate(const SystemMatrix& m, const PortInput& input, double dt,
                    std::size_t n_steps, const Vec4& x0 = Vec4{});

// Runge-Kutta reference stepper over the same held-input grid; substeps
// quarter the step for the integrator cross-check oracle.
TimeSeries simulate_rk4(const SystemMatrix& m, const PortInput& input, double dt,
                        std::size_t n_steps, const Vec4& x0 = Vec4{}, int substeps = 1);

}  // namespace epcirc
