#include "epcirc/eplocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "epcirc/chirality.hpp"
#include "epcirc/textio.hpp"

namespace epcirc {

namespace {

PolyCoeffs scaled_char_poly(const ParamSet& params, double omega_ref) {
    const SystemMatrix sm = build_matrix(params);
    return char_poly(sm.m * (1.0 / omega_ref));
}

}  // namespace

EpResidual ep_residual(cplx omega, const ParamSet& params, double omega_ref) {
    params.validate();
    const PolyCoeffs p = scaled_char_poly(params, omega_ref);
    const cplx sigma = cplx(0.0, -1.0) * omega / omega_ref;
    EpResidual r;
    r.d = p.eval(sigma);
    // d sigma / d omega = -i / omega_ref
    r.dprime = p.derivative().eval(sigma) * cplx(0.0, -1.0) / omega_ref;
    return r;
}

double discriminant(const ParamSet& params, double omega_ref) {
    params.validate();
    return quartic_discriminant(scaled_char_poly(params, omega_ref));
}

std::vector<LocusPoint> locus_grid(const SweepSpec& spec, ExecPolicy policy) {
    spec.validate();
    const std::size_t n1 = spec.n1(), n2 = spec.n2();
    std::vector<LocusPoint> out(n1 * n2);
    for_each_index(n1 * n2, policy, [&](std::size_t idx) {
        const std::size_t i = idx / n2, j = idx % n2;
        LocusPoint& lp = out[idx];
        lp.value1 = spec.value1(i);
        lp.value2 = spec.value2(j);
        lp.res = resonances(build_matrix(spec.at(i, j)));
        lp.min_pair_distance = lp.res.min_rhp_distance();
    });
    return out;
}

SeedResult seed_from_sweep(const SweepSpec& spec, ExecPolicy policy) {
    const auto grid = locus_grid(spec, policy);
    std::size_t best = grid.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const double d = grid[idx].min_pair_distance;
        if (std::isfinite(d) && d < best_d) {  // strict: ties keep the lower index
            best_d = d;
            best = idx;
        }
    }
    if (best == grid.size())
        throw seed_failure_error("sweep grid produced no finite resonance pairs");

    const auto rhp = grid[best].res.right_half_plane();
    SeedResult s;
    s.flat_index = best;
    s.value1 = grid[best].value1;
    s.value2 = grid[best].value2;
    s.omega_guess = rhp.size() == 2 ? (rhp[0] + rhp[1]) / 2.0 : rhp.at(0);
    return s;
}

std::string EPResult::to_json() const {
    std::ostringstream o;
    o << "{\n";
    o << "  \"omega_ep_re\": " << fmt_double(omega_ep.real()) << ",\n";
    o << "  \"omega_ep_im\": " << fmt_double(omega_ep.imag()) << ",\n";
    o << "  \"params\": {\n";
    o << "    \"" << param_name(free_params[0]) << "\": " << fmt_double(param_values[0]) << ",\n";
    o << "    \"" << param_name(free_params[1]) << "\": " << fmt_double(param_values[1]) << "\n";
    o << "  },\n";
    o << "  \"residual_det\": " << fmt_double(residual_det) << ",\n";
    o << "  \"residual_ddet\": " << fmt_double(residual_ddet) << ",\n";
    o << "  \"iterations\": " << newton_iterations << "\n";
    o << "}\n";
    return o.str();
}

EPResult find_ep(cplx omega_guess, std::array<double, 2> param_guess,
                 std::array<ParamId, 2> free_params, const ParamSet& base,
                 const EpOptions& opt) {
    if (!std::isfinite(omega_guess.real()) || !std::isfinite(omega_guess.imag()) ||
        !std::isfinite(param_guess[0]) || !std::isfinite(param_guess[1]))
        throw precondition_error("find_ep: non-finite guesses");
    if (free_params[0] == free_params[1])
        throw precondition_error("find_ep: free parameters must be distinct");

    const double wref = opt.omega_ref;

    // unknowns: sigma = -i omega / wref and the two parameters relative to
    // their seeds (keeps the Newton system O(1) in every column)
    auto params_at = [&](double xi1, double xi2) {
        ParamSet p = base;
        p.set(free_params[0], param_guess[0] * xi1);
        p.set(free_params[1], param_guess[1] * xi2);
        p.validate();
        return p;
    };

    auto residual = [&](cplx sigma, const ParamSet& p, cplx& d, cplx& dp) {
        const PolyCoeffs poly = scaled_char_poly(p, wref);
        d = poly.eval(sigma);
        dp = poly.derivative().eval(sigma);  // derivative in sigma: O(1) scale
    };

    cplx sigma = cplx(0.0, -1.0) * omega_guess / wref;
    double xi1 = 1.0, xi2 = 1.0;
    cplx d, dp;
    double rd = std::numeric_limits<double>::infinity();
    double rdp = rd;

    std::vector<double> history;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        ParamSet p = params_at(xi1, xi2);
        residual(sigma, p, d, dp);
        rd = std::abs(d);
        rdp = std::abs(dp);
        history.push_back(std::hypot(rd, rdp));
        if (rd <= opt.tol && rdp <= opt.tol) break;

        // Jacobian: analytic in sigma, central differences in parameters
        const PolyCoeffs poly = scaled_char_poly(p, wref);
        const cplx dd_dsig = poly.derivative().eval(sigma);
        const cplx ddp_dsig = poly.derivative().derivative().eval(sigma);

        double jac[16];
        jac[0 * 4 + 0] = dd_dsig.real();
        jac[0 * 4 + 1] = -dd_dsig.imag();
        jac[1 * 4 + 0] = dd_dsig.imag();
        jac[1 * 4 + 1] = dd_dsig.real();
        jac[2 * 4 + 0] = ddp_dsig.real();
        jac[2 * 4 + 1] = -ddp_dsig.imag();
        jac[3 * 4 + 0] = ddp_dsig.imag();
        jac[3 * 4 + 1] = ddp_dsig.real();

        const double h = opt.fd_rel_step;
        for (int j = 0; j < 2; ++j) {
            const double x1p = xi1 + (j == 0 ? h : 0.0), x1m = xi1 - (j == 0 ? h : 0.0);
            const double x2p = xi2 + (j == 1 ? h : 0.0), x2m = xi2 - (j == 1 ? h : 0.0);
            cplx dpl, dppl, dmi, dpmi;
            residual(sigma, params_at(x1p, x2p), dpl, dppl);
            residual(sigma, params_at(x1m, x2m), dmi, dpmi);
            jac[0 * 4 + 2 + j] = (dpl.real() - dmi.real()) / (2.0 * h);
            jac[1 * 4 + 2 + j] = (dpl.imag() - dmi.imag()) / (2.0 * h);
            jac[2 * 4 + 2 + j] = (dppl.real() - dpmi.real()) / (2.0 * h);
            jac[3 * 4 + 2 + j] = (dppl.imag() - dpmi.imag()) / (2.0 * h);
        }

        Mat4 jm;
        for (int i = 0; i < 16; ++i) jm.a[i] = jac[i];
        const Vec4 rhs{-d.real(), -d.imag(), -dp.real(), -dp.imag()};
        Vec4 step;
        try {
            step = solve_real(jm, rhs);
        } catch (const near_singular_error&) {
            throw iteration_limit_error("find_ep: singular Newton system", rd, rdp);
        }

        // damped step: halve until the residual norm decreases
        const double r0 = std::hypot(rd, rdp);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half <= opt.max_halvings; ++half) {
            const cplx sig_t = sigma + t * cplx(step[0], step[1]);
            const double x1_t = xi1 + t * step[2];
            const double x2_t = xi2 + t * step[3];
            try {
                cplx dt_, dpt_;
                residual(sig_t, params_at(x1_t, x2_t), dt_, dpt_);
                if (std::hypot(std::abs(dt_), std::abs(dpt_)) < r0) {
                    sigma = sig_t;
                    xi1 = x1_t;
                    xi2 = x2_t;
                    accepted = true;
                    break;
                }
            } catch (const param_domain_error&) {
                // out of the validity domain: shrink further
            } catch (const invalid_coupling_error&) {
            }
            t /= 2.0;
        }
        if (!accepted)
            throw iteration_limit_error("find_ep: damped step failed to reduce residual",
                                        rd, rdp);
    }
    if (rd > opt.tol || rdp > opt.tol)
        throw iteration_limit_error("find_ep: iteration limit reached", rd, rdp);

    EPResult res;
    // reported omega from sigma: s = wref * sigma; omega = Im s - i|Re s|,
    // normalized to the Re > 0 representative of the mirror pair
    const cplx s = sigma * wref;
    cplx omega(std::abs(s.imag()), -std::abs(s.real()));
    res.omega_ep = omega;
    res.free_params = free_params;
    res.param_values = {param_guess[0] * xi1, param_guess[1] * xi2};
    res.residual_det = rd;
    res.residual_ddet = rdp;
    res.newton_iterations = it;
    res.residual_history = std::move(history);

    // Jordan rank test: a diabolic point has rank defect 2 and no adjugate
    const ParamSet p_final = params_at(xi1, xi2);
    const SystemMatrix sm = build_matrix(p_final);
    try {
        const CVec4 u = ep_eigenvector(sm, state_eig_from_reported(omega));
        res.eigvec_ratio = measured_ratio(sm, u).ratio;
    } catch (const degenerate_rank_error&) {
        throw diabolic_point_error("find_ep: converged to a diabolic point (rank test)");
    }
    return res;
}

EPResult locate_circuit_ep(const CircuitParams& base, ExecPolicy policy) {
    const ParamSet bp = ParamSet::from_circuit(base);
    const SeedResult seed = seed_from_sweep(fig2_sweep(bp), policy);
    return find_ep(seed.omega_guess, {seed.value1, seed.value2},
                   {ParamId::rp, ParamId::cp}, bp);
}

}  // namespace epcirc
