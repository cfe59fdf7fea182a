#include "epcirc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epcirc {

Mat4 Mat4::identity() {
    Mat4 r;
    for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
    return r;
}

Mat4 Mat4::operator*(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double v = (*this)(i, k);
            for (int j = 0; j < 4; ++j) r(i, j) += v * o(k, j);
        }
    return r;
}

Mat4 Mat4::operator*(double s) const {
    Mat4 r;
    for (int i = 0; i < 16; ++i) r.a[i] = a[i] * s;
    return r;
}

Mat4 Mat4::operator+(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 16; ++i) r.a[i] = a[i] + o.a[i];
    return r;
}

Mat4 Mat4::operator-(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 16; ++i) r.a[i] = a[i] - o.a[i];
    return r;
}

std::array<double, 4> Mat4::operator*(const std::array<double, 4>& x) const {
    std::array<double, 4> y{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
}

double Mat4::max_row_sum() const {
    double m = 0.0;
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

double Mat4::frobenius() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double CMat4::max_row_sum() const {
    double m = 0.0;
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

int PolyCoeffs::degree() const {
    for (int k = 4; k >= 0; --k)
        if (c[k] != cplx(0.0, 0.0)) return k;
    return -1;
}

cplx PolyCoeffs::eval(cplx s) const {
    cplx r = c[4];
    for (int k = 3; k >= 0; --k) r = r * s + c[k];
    return r;
}

PolyCoeffs PolyCoeffs::derivative() const {
    PolyCoeffs d;
    for (int k = 1; k <= 4; ++k) d.c[k - 1] = c[k] * double(k);
    return d;
}

double PolyCoeffs::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& v : c) m = std::max(m, std::abs(v));
    return m;
}

namespace {

double det2(const Mat4& m, int r0, int r1, int c0, int c1) {
    return m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
}

double det3(const Mat4& m, int r0, int r1, int r2, int c0, int c1, int c2) {
    return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
           m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
           m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
}

double det4(const Mat4& m) {
    double d = 0.0;
    for (int j = 0; j < 4; ++j) {
        const int c[3] = {j == 0 ? 1 : 0, j <= 1 ? 2 : 1, j <= 2 ? 3 : 2};
        const double minor = det3(m, 1, 2, 3, c[0], c[1], c[2]);
        d += ((j % 2) ? -1.0 : 1.0) * m(0, j) * minor;
    }
    return d;
}

}  // namespace

PolyCoeffs char_poly(const Mat4& m) {
    // det(sI - M) = s^4 - e1 s^3 + e2 s^2 - e3 s + e4 with e_k the sums of
    // k x k principal minors of M.
    const double e1 = m(0, 0) + m(1, 1) + m(2, 2) + m(3, 3);
    double e2 = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) e2 += det2(m, i, j, i, j);
    double e3 = 0.0;
    for (int i = 0; i < 4; ++i) {
        int r[3], n = 0;
        for (int k = 0; k < 4; ++k)
            if (k != i) r[n++] = k;
        e3 += det3(m, r[0], r[1], r[2], r[0], r[1], r[2]);
    }
    const double e4 = det4(m);

    PolyCoeffs p;
    p.c[4] = 1.0;
    p.c[3] = -e1;
    p.c[2] = e2;
    p.c[1] = -e3;
    p.c[0] = e4;
    return p;
}

std::vector<cplx> poly_roots(const PolyCoeffs& p) {
    int deg = p.degree();
    if (deg < 1) throw degenerate_polynomial_error("polynomial has no roots (degree < 1)");

    // work on a local ascending copy, deflating exact zero roots first
    std::vector<cplx> c(p.c.begin(), p.c.begin() + deg + 1);
    std::vector<cplx> roots;
    while (c.size() > 1 && c[0] == cplx(0.0, 0.0)) {
        roots.push_back(0.0);
        c.erase(c.begin());
    }
    const int n = int(c.size()) - 1;
    if (n >= 1) {
        // Cauchy bound initial circle, deterministic phase offset
        double r = 0.0;
        for (int k = 0; k < n; ++k) r = std::max(r, std::abs(c[k] / c[n]));
        r = 1.0 + r;
        std::vector<cplx> z(n);
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * M_PI * k / n + 0.4;
            z[k] = r * cplx(std::cos(th), std::sin(th));
        }

        auto eval = [&](cplx s, cplx& pv, cplx& dv) {
            pv = c[n];
            dv = 0.0;
            for (int k = n - 1; k >= 0; --k) {
                dv = dv * s + pv;
                pv = pv * s + c[k];
            }
        };
        auto error_bound = [&](cplx s) {
            // running bound on the evaluation roundoff, Horner-style
            double b = std::abs(c[n]);
            const double as = std::abs(s);
            for (int k = n - 1; k >= 0; --k) b = b * as + std::abs(c[k]);
            return b * 4.0 * std::numeric_limits<double>::epsilon();
        };

        std::vector<bool> done(n, false);
        for (int it = 0; it < 200; ++it) {
            bool all = true;
            for (int k = 0; k < n; ++k) {
                if (done[k]) continue;
                cplx pv, dv;
                eval(z[k], pv, dv);
                if (std::abs(pv) <= error_bound(z[k])) {
                    done[k] = true;
                    continue;
                }
                all = false;
                cplx w = (dv != cplx(0.0)) ? pv / dv : cplx(0.0);
                cplx rep = 0.0;
                for (int j = 0; j < n; ++j)
                    if (j != k && z[k] != z[j]) rep += 1.0 / (z[k] - z[j]);
                const cplx denom = 1.0 - w * rep;
                cplx step = (std::abs(denom) > 1e-300) ? w / denom : w;
                if (dv == cplx(0.0) && pv != cplx(0.0)) {
                    // stationary start (symmetric configurations): nudge off
                    step = cplx(0.1 * r, 0.05 * r);
                }
                z[k] -= step;
            }
            if (all) break;
        }
        roots.insert(roots.end(), z.begin(), z.end());
    }

    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

namespace {

// shared pivoted elimination over real or complex scalars
template <typename T, typename MatT>
std::array<T, 4> lu_solve(const MatT& a0, const std::array<T, 4>& b0, double pivot_floor) {
    std::array<T, 16> a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[4 * i + j] = a0(i, j);
    std::array<T, 4> b = b0;

    for (int k = 0; k < 4; ++k) {
        int piv = k;
        double best = std::abs(a[4 * k + k]);
        for (int i = k + 1; i < 4; ++i) {
            const double v = std::abs(a[4 * i + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < pivot_floor)
            throw near_singular_error("pivot below threshold in 4x4 solve");
        if (piv != k) {
            for (int j = 0; j < 4; ++j) std::swap(a[4 * k + j], a[4 * piv + j]);
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < 4; ++i) {
            const T f = a[4 * i + k] / a[4 * k + k];
            a[4 * i + k] = T(0.0);
            for (int j = k + 1; j < 4; ++j) a[4 * i + j] -= f * a[4 * k + j];
            b[i] -= f * b[k];
        }
    }
    std::array<T, 4> x{};
    for (int i = 3; i >= 0; --i) {
        T s = b[i];
        for (int j = i + 1; j < 4; ++j) s -= a[4 * i + j] * x[j];
        x[i] = s / a[4 * i + i];
    }
    return x;
}

}  // namespace

CVec4 solve_complex(const CMat4& a, const CVec4& b) {
    return lu_solve<cplx>(a, b, 1e-13 * a.max_row_sum());
}

Vec4 solve_real(const Mat4& a, const Vec4& b) {
    return lu_solve<double>(a, b, 1e-13 * a.max_row_sum());
}

std::array<double, 8> solve_real_4x2(const Mat4& a, const std::array<double, 8>& b) {
    Vec4 c0{b[0], b[2], b[4], b[6]}, c1{b[1], b[3], b[5], b[7]};
    const Vec4 x0 = solve_real(a, c0), x1 = solve_real(a, c1);
    return {x0[0], x1[0], x0[1], x1[1], x0[2], x1[2], x0[3], x1[3]};
}

Mat4 matrix_exp(const Mat4& m, double dt) {
    Mat4 a = m * dt;
    // Pade-13 with scaling and squaring (Higham 2005 coefficients)
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const double theta13 = 5.371920351148152;
    int squarings = 0;
    const double nrm = a.max_row_sum();
    if (nrm > theta13) {
        squarings = int(std::ceil(std::log2(nrm / theta13)));
        a = a * std::pow(2.0, -squarings);
    }

    const Mat4 i4 = Mat4::identity();
    const Mat4 a2 = a * a;
    const Mat4 a4 = a2 * a2;
    const Mat4 a6 = a4 * a2;
    Mat4 u = a * (a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) +
                  a6 * b[7] + a4 * b[5] + a2 * b[3] + i4 * b[1]);
    Mat4 v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) +
             a6 * b[6] + a4 * b[4] + a2 * b[2] + i4 * b[0];

    // solve (v - u) r = (v + u)
    const Mat4 num = v + u, den = v - u;
    Mat4 r;
    for (int col = 0; col < 4; ++col) {
        Vec4 rhs{num(0, col), num(1, col), num(2, col), num(3, col)};
        const Vec4 x = solve_real(den, rhs);
        for (int i = 0; i < 4; ++i) r(i, col) = x[i];
    }
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

namespace {

cplx cdet3(const CMat4& m, int r0, int r1, int r2, int c0, int c1, int c2) {
    return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
           m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
           m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
}

}  // namespace

cplx det(const CMat4& a) {
    cplx d = 0.0;
    for (int j = 0; j < 4; ++j) {
        const int c[3] = {j == 0 ? 1 : 0, j <= 1 ? 2 : 1, j <= 2 ? 3 : 2};
        d += ((j % 2) ? -1.0 : 1.0) * a(0, j) * cdet3(a, 1, 2, 3, c[0], c[1], c[2]);
    }
    return d;
}

CMat4 adjugate(const CMat4& a) {
    CMat4 adj;
    for (int i = 0; i < 4; ++i) {
        int r[3], nr = 0;
        for (int k = 0; k < 4; ++k)
            if (k != i) r[nr++] = k;
        for (int j = 0; j < 4; ++j) {
            int cc[3], nc = 0;
            for (int k = 0; k < 4; ++k)
                if (k != j) cc[nc++] = k;
            const cplx minor = cdet3(a, r[0], r[1], r[2], cc[0], cc[1], cc[2]);
            adj(j, i) = (((i + j) % 2) ? -1.0 : 1.0) * minor;  // transpose of cofactors
        }
    }
    return adj;
}

std::vector<double> least_squares(std::vector<double> a, std::vector<double> b,
                                  int m, int n) {
    if (m < n) throw fit_degenerate_error("least squares: fewer rows than unknowns");
    // Householder QR, in place on the row-major matrix
    for (int k = 0; k < n; ++k) {
        double norm = 0.0;
        for (int i = k; i < m; ++i) norm += a[i * n + k] * a[i * n + k];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw fit_degenerate_error("least squares: rank-deficient column");
        if (a[k * n + k] > 0) norm = -norm;
        // v = x - norm*e1, stored in the column below the diagonal
        const double akk = a[k * n + k] - norm;
        a[k * n + k] = akk;
        double vtv = 0.0;
        for (int i = k; i < m; ++i) vtv += a[i * n + k] * a[i * n + k];
        if (vtv == 0.0) throw fit_degenerate_error("least squares: rank-deficient column");
        for (int j = k + 1; j < n; ++j) {
            double dot = 0.0;
            for (int i = k; i < m; ++i) dot += a[i * n + k] * a[i * n + j];
            const double f = 2.0 * dot / vtv;
            for (int i = k; i < m; ++i) a[i * n + j] -= f * a[i * n + k];
        }
        double dotb = 0.0;
        for (int i = k; i < m; ++i) dotb += a[i * n + k] * b[i];
        const double fb = 2.0 * dotb / vtv;
        for (int i = k; i < m; ++i) b[i] -= fb * a[i * n + k];
        a[k * n + k] = norm;  // R diagonal
    }
    // back substitution on R x = Qt b
    std::vector<double> x(n);
    const double rmax = std::abs(a[0]);
    for (int i = n - 1; i >= 0; --i) {
        if (std::abs(a[i * n + i]) < 1e-13 * rmax)
            throw fit_degenerate_error("least squares: collapsed R diagonal");
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
        x[i] = s / a[i * n + i];
    }
    return x;
}

double quartic_discriminant(const PolyCoeffs& p) {
    // monic quartic x^4 + a x^3 + b x^2 + c x + d
    if (p.degree() != 4) throw precondition_error("discriminant: not a quartic");
    const double lead = p.c[4].real();
    const double a = p.c[3].real() / lead;
    const double b = p.c[2].real() / lead;
    const double c = p.c[1].real() / lead;
    const double d = p.c[0].real() / lead;

    const double a2 = a * a, b2 = b * b, c2 = c * c, d2 = d * d;
    return 256.0 * d2 * d - 192.0 * a * c * d2 - 128.0 * b2 * d2 +
           144.0 * a2 * b * d2 - 27.0 * a2 * a2 * d2 + 144.0 * b * c2 * d -
           6.0 * a2 * c2 * d - 80.0 * a * b2 * c * d + 18.0 * a2 * a * b * c * d +
           16.0 * b2 * b2 * d - 4.0 * a2 * b2 * b * d - 27.0 * c2 * c2 +
           18.0 * a * b * c2 * c - 4.0 * a2 * a * c2 * c - 4.0 * b2 * b * c2 +
           a2 * b2 * c2;
}

}  // namespace epcirc
