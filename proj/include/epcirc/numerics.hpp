#pragma once

// Small dense kernels, deliberately specialized to the 4x4 / quartic problems
// of the two-oscillator system: characteristic polynomial by principal minors,
// Aberth-Ehrlich root finding, pivoted complex solves, matrix exponential and
// adjugate. Everything is exact-dimension, allocation-free where it matters.

#include <array>
#include <complex>
#include <vector>

#include "epcirc/errors.hpp"

namespace epcirc {

using cplx = std::complex<double>;

struct Mat4 {
    std::array<double, 16> a{};
    double& operator()(int i, int j) { return a[4 * i + j]; }
    double operator()(int i, int j) const { return a[4 * i + j]; }

    static Mat4 identity();
    Mat4 operator*(const Mat4& o) const;
    Mat4 operator*(double s) const;
    Mat4 operator+(const Mat4& o) const;
    Mat4 operator-(const Mat4& o) const;
    std::array<double, 4> operator*(const std::array<double, 4>& x) const;
    double max_row_sum() const;   // induced inf-norm
    double frobenius() const;
};

struct CMat4 {
    std::array<cplx, 16> a{};
    cplx& operator()(int i, int j) { return a[4 * i + j]; }
    cplx operator()(int i, int j) const { return a[4 * i + j]; }
    double max_row_sum() const;
};

using Vec4 = std::array<double, 4>;
using CVec4 = std::array<cplx, 4>;

// Variable convention of a polynomial: s is a state-matrix eigenvalue
// (resonance frequencies are omega = -i s on the reporting branch), possibly
// rescaled by a reference frequency.
enum class PolyVariable { state_eigenvalue };

// Degree <= 4 polynomial, ascending coefficients.
struct PolyCoeffs {
    std::array<cplx, 5> c{};
    PolyVariable variable = PolyVariable::state_eigenvalue;

    int degree() const;                 // highest index with c != 0
    cplx eval(cplx s) const;
    PolyCoeffs derivative() const;
    double max_abs_coeff() const;
};

// det(sI - M) as a monic quartic with real coefficients, assembled from sums
// of principal minors (exact cofactor arithmetic, no iteration).
PolyCoeffs char_poly(const Mat4& m);

// All roots by Aberth-Ehrlich simultaneous iteration. Backward error per root
// <= 1e-10 * max|c_i| * max(1,|root|)^deg; clustered values for multiple
// roots. Throws degenerate_polynomial_error if degree < 1.
std::vector<cplx> poly_roots(const PolyCoeffs& p);

// Row-pivoted complex solve. Throws near_singular_error when a pivot drops
// below 1e-13 * max_row_sum(a) (expected exactly at resonances/EPs).
CVec4 solve_complex(const CMat4& a, const CVec4& b);

// Real 4x4 solve with the same pivot policy.
Vec4 solve_real(const Mat4& a, const Vec4& b);
// Solve A X = B for a 4x2 right-hand side (used by the ZOH stepper).
std::array<double, 8> solve_real_4x2(const Mat4& a, const std::array<double, 8>& b);

// exp(M*dt) by Pade-13 scaling and squaring.
Mat4 matrix_exp(const Mat4& m, double dt);

cplx det(const CMat4& a);
// Adjugate by 3x3 cofactors: adj(a)*a = det(a)*I exactly in exact arithmetic.
// When rank(a) == 3 any nonzero column spans the null space.
CMat4 adjugate(const CMat4& a);

// Dense least squares min ||A x - b||_2 via Householder QR, A row-major m x n.
// Throws fit_degenerate_error when a diagonal of R collapses (rank < n).
std::vector<double> least_squares(std::vector<double> a, std::vector<double> b,
                                  int m, int n);

// Discriminant of a monic quartic with real coefficients; zero iff the
// quartic has a repeated root.
double quartic_discriminant(const PolyCoeffs& p);

}  // namespace epcirc
