#pragma once

// The two equivalent parameterizations of the coupled-oscillator system: the
// electronic circuit (the default_table1 component values) and
// its mechanical analog (momenta <-> voltages, coordinates <-> currents).

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "epcirc/errors.hpp"

namespace epcirc {

struct CircuitParams {
    double cp;    // F
    double cs;    // F
    double lp;    // H
    double ls;    // H
    double r1;    // ohm, series sense resistor port A
    double r2;    // ohm, series sense resistor port B
    double rp;    // ohm, parallel to Lp
    double rs;    // ohm, parallel to Ls
    double mmut;  // H, mutual inductance

    double coupling_coefficient() const;  // mmut / sqrt(lp*ls)
    // Throws invalid_coupling_error / param_domain_error on violated invariants.
    void validate() const;
};

// The canonical component values of the reference circuit.
CircuitParams default_table1();

struct OscillatorParams {
    double omega1 = 0.0;  // rad/s
    double omega2 = 0.0;  // rad/s
    double k1 = 0.0;      // 1/s
    double k2 = 0.0;      // 1/s
    double f = 0.0;       // rad^2/s^2, coupling stiffness
    double g = 0.0;       // 1/s, coupling damping
    std::complex<double> c1{0.0, 0.0};  // drive amplitudes
    std::complex<double> c2{0.0, 0.0};

    void validate() const;
};

// First-order mapping to the mechanical analog: omega_j = 1/sqrt(L_j C_j),
// k_j = R_series/(2 L_j) + 1/(2 R_parallel C_j), f = kappa*omega1*omega2,
// g = kappa*(k1+k2)/2. A convenience approximation; circuit_matrix is the
// ground truth for eigenvalues.
OscillatorParams circuit_to_oscillator(const CircuitParams& c);

// Identifiers for sweepable / free parameters in either parameterization.
enum class ParamId {
    cp, cs, lp, ls, r1, r2, rp, rs, mmut,
    omega1, omega2, k1, k2, f, g,
};

std::string param_name(ParamId id);
ParamId param_from_name(const std::string& name);

// A point in parameter space, circuit or mechanical.
struct ParamSet {
    enum class Kind { circuit, mechanical };
    Kind kind = Kind::circuit;
    CircuitParams circuit = default_table1();
    OscillatorParams mech{};

    double get(ParamId id) const;
    void set(ParamId id, double value);
    void validate() const;

    static ParamSet from_circuit(const CircuitParams& c);
    static ParamSet from_mechanical(const OscillatorParams& o);
};

// Two-parameter sweep over a ParamSet grid (eigenvalue-loci sweeps).
struct SweepSpec {
    ParamId var1, var2;
    double start1, stop1, step1;
    double start2, stop2, step2;
    ParamSet base;

    void validate() const;
    std::size_t n1() const;
    std::size_t n2() const;
    double value1(std::size_t i) const;
    double value2(std::size_t j) const;
    ParamSet at(std::size_t i, std::size_t j) const;
};

// The Rp x Cp grid of the reproduce-fig2 sweep: Rp in {430,470,510} ohm,
// Cp from 57.0 nF to 72.0 nF in steps of 0.22 nF.
SweepSpec fig2_sweep(const ParamSet& base);

// --- config file -----------------------------------------------------------
// Flat "key = value" text, SI units. Keys: cp_f, cs_f, lp_h, ls_h, r1_ohm,
// r2_ohm, rp_ohm, rs_ohm, mmut_h. Missing keys fall back to the defaults.

CircuitParams parse_config(std::istream& in, const std::string& filename);
CircuitParams read_config_file(const std::string& path);
void write_config_file(const std::string& path, const CircuitParams& p);
// Apply one "key=value" override (the CLI --set flag).
void apply_override(CircuitParams& p, const std::string& key_equals_value);

}  // namespace epcirc
