#include "epcirc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epcirc/textio.hpp"

namespace epcirc {

std::array<cplx, 2> SystemMatrix::output(const CVec4& x, const std::array<cplx, 2>& u) const {
    std::array<cplx, 2> y{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 4; ++j) y[i] += cout[4 * i + j] * x[j];
        for (int j = 0; j < 2; ++j) y[i] += d[2 * i + j] * u[j];
    }
    return y;
}

std::array<double, 2> SystemMatrix::output(const Vec4& x, const std::array<double, 2>& u) const {
    std::array<double, 2> y{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 4; ++j) y[i] += cout[4 * i + j] * x[j];
        for (int j = 0; j < 2; ++j) y[i] += d[2 * i + j] * u[j];
    }
    return y;
}

std::array<std::string, 4> SystemMatrix::state_names() const {
    if (form == Form::mechanical) return {"p1", "p2", "q1", "q2"};
    return {"v1", "v2", "il1", "il2"};
}

SystemMatrix mechanical_matrix(const OscillatorParams& p) {
    p.validate();
    SystemMatrix sm;
    sm.form = SystemMatrix::Form::mechanical;
    Mat4& m = sm.m;
    m(0, 0) = -2.0 * p.g - 2.0 * p.k1;
    m(0, 1) = 2.0 * p.g;
    m(0, 2) = -p.f - p.omega1 * p.omega1;
    m(0, 3) = p.f;
    m(1, 0) = 2.0 * p.g;
    m(1, 1) = -2.0 * p.g - 2.0 * p.k2;
    m(1, 2) = p.f;
    m(1, 3) = -p.f - p.omega2 * p.omega2;
    m(2, 0) = 1.0;
    m(3, 1) = 1.0;
    // drives (c1, c2) enter the momentum rows directly
    sm.b = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    // the measured response quantities are the coordinates q1, q2
    sm.cout = {0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    sm.d = {0.0, 0.0, 0.0, 0.0};
    return sm;
}

SystemMatrix circuit_matrix(const CircuitParams& c) {
    c.validate();
    const double mu = -c.mmut;  // winding orientation, see header
    const double ldet = c.lp * c.ls - mu * mu;
    if (!(ldet > 0.0))
        throw invalid_coupling_error("inductance matrix not positive definite");
    const double li11 = c.ls / ldet, li12 = -mu / ldet;
    const double li21 = -mu / ldet, li22 = c.lp / ldet;
    const double b1 = c.rp / (c.rp + c.r1);
    const double b2 = c.rs / (c.rs + c.r2);

    SystemMatrix sm;
    sm.form = SystemMatrix::Form::circuit;
    Mat4& m = sm.m;
    m(0, 0) = -1.0 / ((c.r1 + c.rp) * c.cp);
    m(0, 2) = b1 / c.cp;
    m(1, 1) = -1.0 / ((c.r2 + c.rs) * c.cs);
    m(1, 3) = b2 / c.cs;
    // L^{-1} * (u-terms): u = (-b1 v1 - b1 r1 iL1, -b2 v2 - b2 r2 iL2) + drive
    m(2, 0) = li11 * -b1;
    m(2, 1) = li12 * -b2;
    m(2, 2) = li11 * -b1 * c.r1;
    m(2, 3) = li12 * -b2 * c.r2;
    m(3, 0) = li21 * -b1;
    m(3, 1) = li22 * -b2;
    m(3, 2) = li21 * -b1 * c.r1;
    m(3, 3) = li22 * -b2 * c.r2;

    sm.b = {1.0 / ((c.r1 + c.rp) * c.cp), 0.0,
            0.0, 1.0 / ((c.r2 + c.rs) * c.cs),
            li11 * b1, li12 * b2,
            li21 * b1, li22 * b2};
    sm.cout = {-1.0 / (c.r1 + c.rp), 0.0, b1, 0.0,
               0.0, -1.0 / (c.r2 + c.rs), 0.0, b2};
    sm.d = {1.0 / (c.r1 + c.rp), 0.0, 0.0, 1.0 / (c.r2 + c.rs)};
    return sm;
}

SystemMatrix build_matrix(const ParamSet& p) {
    if (p.kind == ParamSet::Kind::circuit) return circuit_matrix(p.circuit);
    return mechanical_matrix(p.mech);
}

std::vector<cplx> ResonanceSet::right_half_plane() const {
    std::vector<cplx> out;
    for (const cplx& w : omega)  // relative floor keeps overdamped roundoff out
        if (w.real() > 1e-9 * std::abs(w)) out.push_back(w);
    std::sort(out.begin(), out.end(),
              [](cplx a, cplx b) { return a.real() < b.real(); });
    return out;
}

double ResonanceSet::min_rhp_distance() const {
    const auto rhp = right_half_plane();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rhp.size(); ++i)
        for (std::size_t j = i + 1; j < rhp.size(); ++j)
            best = std::min(best, std::abs(rhp[i] - rhp[j]));
    return best;
}

ResonanceSet resonance_set_from_state_eigs(const std::array<cplx, 4>& s) {
    ResonanceSet r;
    for (int k = 0; k < 4; ++k)
        r.omega[k] = cplx(s[k].imag(), -std::abs(s[k].real()));
    std::sort(r.omega.begin(), r.omega.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    for (int k = 0; k < 4; ++k) {
        const cplx target = -std::conj(r.omega[k]);
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 4; ++j) {
            const double dd = std::abs(r.omega[j] - target);
            if (dd < bd) {
                bd = dd;
                best = j;
            }
        }
        r.mirror_index[k] = best;
    }
    return r;
}

ResonanceSet resonances(const SystemMatrix& m) {
    // scaled substitution s = scale * sigma keeps quartic coefficients O(1)
    const double scale = std::max(1.0, m.m.max_row_sum());
    const PolyCoeffs p = char_poly(m.m * (1.0 / scale));
    const std::vector<cplx> sig = poly_roots(p);
    std::array<cplx, 4> s{};
    for (int k = 0; k < 4; ++k) s[k] = sig[k] * scale;
    return resonance_set_from_state_eigs(s);
}

cplx state_eig_from_reported(cplx omega_reported) {
    return cplx(0.0, 1.0) * std::conj(omega_reported);
}

StationaryResult stationary_response(const SystemMatrix& m, const DriveSpec& d, cplx omega) {
    const cplx s = state_eig_from_reported(omega);  // i * omega_internal
    // precondition: not within 1e-12*||M|| of an eigenvalue
    const double nrm = m.m.max_row_sum();
    const double scale = std::max(1.0, nrm);
    const PolyCoeffs p = char_poly(m.m * (1.0 / scale));
    for (const cplx& sig : poly_roots(p)) {
        const cplx sk = sig * scale;
        if (std::abs(s - sk) < 1e-12 * nrm)
            throw resonance_singularity_error("drive frequency hits a resonance", sk);
    }

    CMat4 a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = (i == j ? s : cplx(0.0)) - m.m(i, j);
    const std::array<cplx, 2> u{d.amp_a, d.amp_b};
    CVec4 rhs{};
    for (int i = 0; i < 4; ++i) rhs[i] = m.b[2 * i] * u[0] + m.b[2 * i + 1] * u[1];

    StationaryResult res;
    try {
        res.state = solve_complex(a, rhs);
    } catch (const near_singular_error&) {
        throw resonance_singularity_error("near-singular stationary solve", s);
    }
    const auto y = m.output(res.state, u);
    res.i_a = y[0];
    res.i_b = y[1];
    return res;
}

int TimeSeries::channel_index(const std::string& name) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i] == name) return int(i);
    throw precondition_error("no such channel: " + name);
}

TimeSeries TimeSeries::slice(double t_lo, double t_hi) const {
    TimeSeries out;
    out.dt = dt;
    out.channels = channels;
    out.samples.resize(samples.size());
    const std::size_t n = size();
    std::size_t first = n;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = time(k);
        if (t >= t_lo && t <= t_hi) {
            if (first == n) first = k;
            for (std::size_t c = 0; c < samples.size(); ++c)
                out.samples[c].push_back(samples[c][k]);
        }
    }
    out.t0 = (first == n) ? t_lo : time(first);
    return out;
}

std::string TimeSeries::to_csv() const {
    std::string header = "t";
    for (const auto& c : channels) header += "," + c;
    CsvWriter w(header);
    std::vector<std::string> cells(channels.size() + 1);
    for (std::size_t k = 0; k < size(); ++k) {
        cells[0] = fmt_double(time(k));
        for (std::size_t c = 0; c < channels.size(); ++c)
            cells[c + 1] = fmt_double(samples[c][k]);
        w.row(cells);
    }
    return w.str();
}

namespace {

void check_resolution(const SystemMatrix& m, double dt) {
    if (!(dt > 0.0)) throw resolution_error("simulate: dt must be positive");
    double max_re = 0.0;
    for (const cplx& w : resonances(m).omega) max_re = std::max(max_re, std::abs(w.real()));
    if (max_re > 0.0 && dt * max_re > 0.1)
        throw resolution_error("simulate: dt too large to resolve the fastest resonance");
}

TimeSeries make_series(const SystemMatrix& m, double dt, std::size_t n) {
    TimeSeries ts;
    ts.dt = dt;
    const auto names = m.state_names();
    ts.channels.assign(names.begin(), names.end());
    ts.channels.push_back("i_a");
    ts.channels.push_back("i_b");
    ts.samples.assign(6, std::vector<double>(n));
    return ts;
}

}  // namespace

TimeSeries simulate(const SystemMatrix& m, const PortInput& input, double dt,
                    std::size_t n_steps, const Vec4& x0) {
    check_resolution(m, dt);

    Mat4 e = matrix_exp(m.m, dt);
    bool zoh_ok = true;
    std::array<double, 8> phi{};
    try {
        // phi = (E - I) M^{-1} B
        const std::array<double, 8> minv_b = solve_real_4x2(m.m, m.b);
        const Mat4 em1 = e - Mat4::identity();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += em1(i, k) * minv_b[2 * k + j];
                phi[2 * i + j] = s;
            }
    } catch (const near_singular_error&) {
        zoh_ok = false;  // singular M: RK4 fallback with the same dt
    }

    if (!zoh_ok) return simulate_rk4(m, input, dt, n_steps, x0, 1);

    TimeSeries ts = make_series(m, dt, n_steps);
    Vec4 x = x0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const auto u = input(double(k) * dt);
        const auto y = m.output(x, u);
        for (int c = 0; c < 4; ++c) ts.samples[c][k] = x[c];
        ts.samples[4][k] = y[0];
        ts.samples[5][k] = y[1];
        Vec4 xn = e * x;
        for (int i = 0; i < 4; ++i)
            xn[i] += phi[2 * i] * u[0] + phi[2 * i + 1] * u[1];
        x = xn;
    }
    return ts;
}

TimeSeries simulate_rk4(const SystemMatrix& m, const PortInput& input, double dt,
                        std::size_t n_steps, const Vec4& x0, int substeps) {
    check_resolution(m, dt);
    TimeSeries ts = make_series(m, dt, n_steps);

    auto deriv = [&](const Vec4& x, const std::array<double, 2>& u) {
        Vec4 dx = m.m * x;
        for (int i = 0; i < 4; ++i)
            dx[i] += m.b[2 * i] * u[0] + m.b[2 * i + 1] * u[1];
        return dx;
    };

    Vec4 x = x0;
    const double h = dt / substeps;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const auto u = input(double(k) * dt);  // held over the step
        const auto y = m.output(x, u);
        for (int c = 0; c < 4; ++c) ts.samples[c][k] = x[c];
        ts.samples[4][k] = y[0];
        ts.samples[5][k] = y[1];
        for (int s = 0; s < substeps; ++s) {
            const Vec4 k1 = deriv(x, u);
            Vec4 t2 = x;
            for (int i = 0; i < 4; ++i) t2[i] += 0.5 * h * k1[i];
            const Vec4 k2 = deriv(t2, u);
            Vec4 t3 = x;
            for (int i = 0; i < 4; ++i) t3[i] += 0.5 * h * k2[i];
            const Vec4 k3 = deriv(t3, u);
            Vec4 t4 = x;
            for (int i = 0; i < 4; ++i) t4[i] += h * k3[i];
            const Vec4 k4 = deriv(t4, u);
            for (int i = 0; i < 4; ++i)
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    return ts;
}

}  // namespace epcirc
