#pragma once

// The coalescing eigenvector at an exceptional point: adjugate-based null
// space extraction, the Jordan chain, component ratios (elliptic
// polarization), and the exact 2x2 complex-symmetric reference.

#include <complex>
#include <utility>

#include "epcirc/dynamics.hpp"
#include "epcirc/numerics.hpp"

namespace epcirc {

// Null vector of (s_ep I - M) from the largest column of the adjugate
// (rank 3 at a generic EP), normalized so the 4th component is 1 when
// nonzero. Throws degenerate_rank_error at diabolic points (rank <= 2) and
// precondition_error when s_ep is not a (near-)double eigenvalue.
CVec4 ep_eigenvector(const SystemMatrix& m, cplx s_ep);

struct JordanPair {
    CVec4 u{};                       // eigenvector, (M - sI) u = 0
    CVec4 v{};                       // generalized vector, (M - sI) v = u, v orth u
    cplx s_ep;                       // state-matrix eigenvalue
    double rank_defect_residual = 0; // smallest-singular-value proxy of (sI - M)
};

JordanPair jordan_chain(const SystemMatrix& m, cplx s_ep);

struct ChiralityReport {
    cplx ratio;      // q1-component / q2-component
    double modulus;
    double arg_rad;  // in (-pi, pi]
};

// Raw coordinate ratio u[3rd]/u[4th] of a state-space vector. Throws
// normalization_error when the 4th component vanishes.
ChiralityReport component_ratio(const CVec4& u);

// Ratio of the measured port-current amplitudes (C u)_A / (C u)_B carried by
// the eigenvector. Coincides with component_ratio for the mechanical form,
// where the output map picks q1, q2 directly; for the circuit the port
// current mixes iL and v components and this is the quantity the phase
// experiment actually sees.
ChiralityReport measured_ratio(const SystemMatrix& m, const CVec4& u);

// Exceptional point of H = [[e1, delta],[delta, e2]]: returns (delta_ep,
// eigenvector ratio). The two branches delta = +-i(e1-e2)/2 carry ratios
// -+i; the branch with Im(delta) > 0 (tie: Re(delta) > 0) is returned.
// Throws diabolic_point_error when e1 == e2.
std::pair<cplx, cplx> symmetric2x2_ep(cplx e1, cplx e2);

}  // namespace epcirc
