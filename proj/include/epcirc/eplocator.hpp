#pragma once

// Exceptional-point location: the secular determinant and its frequency
// derivative as analytic functions of the reported frequency, a quartic
// discriminant for degeneracy detection, locus sweeps for seeding, and a
// damped Newton solve over (Re omega, Im omega, two real parameters).

#include <array>
#include <string>
#include <vector>

#include "epcirc/dynamics.hpp"
#include "epcirc/exec.hpp"
#include "epcirc/model.hpp"

namespace epcirc {

// D(omega) = det(sigma I - M/omega_ref) at sigma = -i omega / omega_ref: a
// monic quartic in the scaled variable, analytic in omega, vanishing at every
// reported resonance. Returns (D, dD/domega).
struct EpResidual {
    cplx d;       // normalized determinant (omega_ref^4 scaling)
    cplx dprime;  // derivative of d with respect to omega
};

EpResidual ep_residual(cplx omega, const ParamSet& params, double omega_ref = 1e5);

// Discriminant of the scaled characteristic quartic; zero iff the state
// matrix has a repeated eigenvalue (both EPs and diabolic points).
double discriminant(const ParamSet& params, double omega_ref = 1e5);

struct LocusPoint {
    double value1, value2;
    ResonanceSet res;
    double min_pair_distance;  // between the two right-half-plane resonances
};

// Resonances over the whole sweep grid, flat index = i1 * n2 + i2.
std::vector<LocusPoint> locus_grid(const SweepSpec& spec,
                                   ExecPolicy policy = ExecPolicy::parallel);

struct SeedResult {
    cplx omega_guess;  // midpoint of the closest RHP pair, reporting convention
    double value1, value2;
    std::size_t flat_index;
};

// Grid point minimizing the RHP pair distance (ties: lowest flat index).
// Throws seed_failure_error when the grid has no finite RHP pairs.
SeedResult seed_from_sweep(const SweepSpec& spec,
                           ExecPolicy policy = ExecPolicy::parallel);

struct EPResult {
    cplx omega_ep;  // reporting convention, Im < 0
    std::array<ParamId, 2> free_params;
    std::array<double, 2> param_values;
    double residual_det = 0.0;   // |D| at convergence (omega_ref^4-normalized)
    double residual_ddet = 0.0;  // |dD/dsigma| at convergence (omega_ref^3-normalized)
    int newton_iterations = 0;
    cplx eigvec_ratio;  // measured-current ratio of the coalescing eigenvector
    std::vector<double> residual_history;  // hypot(|D|,|D'|) per iteration

    std::string to_json() const;
};

struct EpOptions {
    double omega_ref = 1e5;
    double tol = 1e-9;
    int max_iterations = 100;
    double fd_rel_step = 1e-6;
    int max_halvings = 8;
};

// Damped Newton on (Re omega, Im omega, p1, p2) solving D = D' = 0, seeded by
// omega_guess/param_guess; validates against diabolic points by the Jordan
// rank test. Throws iteration_limit_error, diabolic_point_error or
// param_domain_error.
EPResult find_ep(cplx omega_guess, std::array<double, 2> param_guess,
                 std::array<ParamId, 2> free_params, const ParamSet& base,
                 const EpOptions& opt = {});

// Convenience pipeline: loci-sweep seed + Newton over (Rp, Cp).
EPResult locate_circuit_ep(const CircuitParams& base,
                           ExecPolicy policy = ExecPolicy::parallel);

}  // namespace epcirc
