#include "epcirc/chirality.hpp"

#include <algorithm>
#include <cmath>

namespace epcirc {

namespace {

CMat4 shifted(const SystemMatrix& m, cplx s) {
    CMat4 a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = (i == j ? s : cplx(0.0)) - m.m(i, j);
    return a;
}

// require s to sit within 1e-6 (relative) of at least two eigenvalues
void check_double_eigenvalue(const SystemMatrix& m, cplx s) {
    const double scale = std::max(1.0, m.m.max_row_sum());
    const PolyCoeffs p = char_poly(m.m * (1.0 / scale));
    int close = 0;
    const double tol = 1e-6 * std::max(std::abs(s), scale);
    for (const cplx& sig : poly_roots(p))
        if (std::abs(sig * scale - s) <= tol) ++close;
    if (close < 2)
        throw precondition_error("s_ep is not within 1e-6 of a double eigenvalue");
}

double max_abs(const CVec4& v) {
    double m = 0.0;
    for (const cplx& x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

CVec4 ep_eigenvector(const SystemMatrix& m, cplx s_ep) {
    check_double_eigenvalue(m, s_ep);
    const CMat4 a = shifted(m, s_ep);
    const CMat4 adj = adjugate(a);

    int best_col = 0;
    double best_norm = -1.0;
    double total = 0.0;
    for (int j = 0; j < 4; ++j) {
        double cn = 0.0;
        for (int i = 0; i < 4; ++i) cn += std::abs(adj(i, j));
        total = std::max(total, cn);
        if (cn > best_norm) {
            best_norm = cn;
            best_col = j;
        }
    }
    // at a diabolic point all 3x3 minors vanish
    const double a_scale = a.max_row_sum();
    if (total <= 1e-10 * a_scale * a_scale * a_scale)
        throw degenerate_rank_error("adjugate numerically zero: rank defect > 1 (diabolic)");

    CVec4 u;
    for (int i = 0; i < 4; ++i) u[i] = adj(i, best_col);
    if (std::abs(u[3]) > 1e-12 * max_abs(u)) {
        const cplx inv = 1.0 / u[3];
        for (cplx& x : u) x *= inv;
    }
    return u;
}

JordanPair jordan_chain(const SystemMatrix& m, cplx s_ep) {
    JordanPair jp;
    jp.s_ep = s_ep;
    jp.u = ep_eigenvector(m, s_ep);

    // A v = u with A = (M - s I), constrained v orth u: the positive definite
    // system (A^H A + uu^H/|u|^2) v = A^H u has exactly that solution, since
    // null(A) = span(u) and u is in range(A) at a Jordan block of size 2.
    CMat4 a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = m.m(i, j) - (i == j ? s_ep : cplx(0.0));

    const double unorm2 = [&] {
        double s = 0.0;
        for (const cplx& x : jp.u) s += std::norm(x);
        return s;
    }();

    CMat4 g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < 4; ++k) s += std::conj(a(k, i)) * a(k, j);
            g(i, j) = s + jp.u[i] * std::conj(jp.u[j]) / unorm2;
        }
    CVec4 rhs{};
    for (int i = 0; i < 4; ++i) {
        cplx s = 0.0;
        for (int k = 0; k < 4; ++k) s += std::conj(a(k, i)) * jp.u[k];
        rhs[i] = s;
    }
    jp.v = solve_complex(g, rhs);

    // smallest-singular-value proxy: |det A| / ||adj A||_F (= sigma_min when rank 3)
    const CMat4 adj = adjugate(shifted(m, s_ep));
    double adj_f = 0.0;
    for (const cplx& x : adj.a) adj_f += std::norm(x);
    adj_f = std::sqrt(adj_f);
    jp.rank_defect_residual = (adj_f > 0.0) ? std::abs(det(shifted(m, s_ep))) / adj_f : 0.0;
    return jp;
}

namespace {

ChiralityReport make_report(cplx ratio) {
    ChiralityReport r;
    r.ratio = ratio;
    r.modulus = std::abs(ratio);
    r.arg_rad = std::arg(ratio);
    return r;
}

}  // namespace

ChiralityReport component_ratio(const CVec4& u) {
    if (std::abs(u[3]) <= 1e-12 * max_abs(u))
        throw normalization_error("component_ratio: vanishing 4th component");
    return make_report(u[2] / u[3]);
}

ChiralityReport measured_ratio(const SystemMatrix& m, const CVec4& u) {
    const auto y = m.output(u, {cplx(0.0), cplx(0.0)});
    if (std::abs(y[1]) <= 1e-12 * std::max(std::abs(y[0]), std::abs(y[1])))
        throw normalization_error("measured_ratio: vanishing port-B amplitude");
    return make_report(y[0] / y[1]);
}

std::pair<cplx, cplx> symmetric2x2_ep(cplx e1, cplx e2) {
    if (e1 == e2)
        throw diabolic_point_error("symmetric2x2_ep: e1 == e2 (delta = 0 is not an EP)");
    const cplx d = (e1 - e2) / 2.0;
    cplx delta = cplx(0.0, 1.0) * d;
    double sign = 1.0;
    if (delta.imag() < 0.0 || (delta.imag() == 0.0 && delta.real() < 0.0)) {
        delta = -delta;
        sign = -1.0;
    }
    // null vector of [[d, delta],[delta, -d]] is (-delta, d): ratio -delta/d
    const cplx ratio = cplx(0.0, -sign);
    return {delta, ratio};
}

}  // namespace epcirc
