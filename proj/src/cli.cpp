#include "epcirc/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "epcirc/chirality.hpp"
#include "epcirc/dynamics.hpp"
#include "epcirc/eplocator.hpp"
#include "epcirc/model.hpp"
#include "epcirc/textio.hpp"
#include "epcirc/virtualab.hpp"

namespace epcirc {

const char* const kVersion = "0.1.0";

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> sets;
    double detune_cp = 1.0;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
    cmd->add_option("--config", c.config_path, "config file (flat key = value)");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--set", c.sets, "override a config key, key=value")->take_all();
    cmd->add_option("--detune-cp", c.detune_cp, "multiply Cp by this factor");
}

CircuitParams resolve_params(const CommonArgs& c) {
    CircuitParams p = c.config_path.empty() ? default_table1()
                                            : read_config_file(c.config_path);
    for (const auto& kv : c.sets) apply_override(p, kv);
    try {
        p.validate();
    } catch (const precondition_error& e) {
        throw config_error(std::string("invalid configuration: ") + e.what());
    }
    return p;
}

CircuitParams detuned(CircuitParams p, double factor) {
    p.cp *= factor;
    return p;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        out.push_back(ch);
    }
    return out;
}

// every subcommand writes <name>_manifest.json with the resolved inputs
void write_manifest(const CommonArgs& c, const std::string& subcommand,
                    const CircuitParams& p, const std::vector<std::string>& outputs,
                    double duration_s) {
    std::ostringstream o;
    o << "{\n";
    o << "  \"subcommand\": \"" << subcommand << "\",\n";
    o << "  \"version\": \"" << kVersion << "\",\n";
    o << "  \"config\": \"" << json_escape(c.config_path) << "\",\n";
    o << "  \"set\": [";
    for (std::size_t i = 0; i < c.sets.size(); ++i)
        o << (i ? ", " : "") << "\"" << json_escape(c.sets[i]) << "\"";
    o << "],\n";
    o << "  \"detune_cp\": " << fmt_double(c.detune_cp) << ",\n";
    o << "  \"params\": {\n";
    o << "    \"cp_f\": " << fmt_double(p.cp) << ",\n";
    o << "    \"cs_f\": " << fmt_double(p.cs) << ",\n";
    o << "    \"lp_h\": " << fmt_double(p.lp) << ",\n";
    o << "    \"ls_h\": " << fmt_double(p.ls) << ",\n";
    o << "    \"r1_ohm\": " << fmt_double(p.r1) << ",\n";
    o << "    \"r2_ohm\": " << fmt_double(p.r2) << ",\n";
    o << "    \"rp_ohm\": " << fmt_double(p.rp) << ",\n";
    o << "    \"rs_ohm\": " << fmt_double(p.rs) << ",\n";
    o << "    \"mmut_h\": " << fmt_double(p.mmut) << "\n";
    o << "  },\n";
    o << "  \"outputs\": [";
    for (std::size_t i = 0; i < outputs.size(); ++i)
        o << (i ? ", " : "") << "\"" << json_escape(outputs[i]) << "\"";
    o << "],\n";
    o << "  \"duration_seconds\": " << fmt_double(duration_s) << "\n";
    o << "}\n";
    write_text_file((fs::path(c.out_dir) / (subcommand + "_manifest.json")).string(), o.str());
}

std::string out_path(const CommonArgs& c, const std::string& name) {
    return (fs::path(c.out_dir) / name).string();
}

std::string resonance_csv(const ResonanceSet& r) {
    CsvWriter w("re_omega,im_omega,mirror_index");
    for (int k = 0; k < 4; ++k)
        w.row({fmt_double(r.omega[k].real()), fmt_double(r.omega[k].imag()),
               std::to_string(r.mirror_index[k])});
    return w.str();
}

// --- subcommand bodies -------------------------------------------------------

std::vector<std::string> cmd_eigen(const CommonArgs& c, const CircuitParams& p) {
    const ResonanceSet r = resonances(circuit_matrix(p));
    const std::string path = out_path(c, "eigen.csv");
    write_text_file(path, resonance_csv(r));
    return {path};
}

void append_locus_rows(CsvWriter& w, const std::vector<LocusPoint>& grid) {
    for (const LocusPoint& lp : grid) {
        for (const cplx& om : lp.res.right_half_plane())
            w.row({fmt_double(lp.value1), fmt_double(lp.value2 * 1e9),
                   fmt_double(om.real()), fmt_double(om.imag())});
    }
}

std::vector<std::string> cmd_sweep(const CommonArgs& c, const CircuitParams& p) {
    const SweepSpec spec = fig2_sweep(ParamSet::from_circuit(p));
    const auto grid = locus_grid(spec);
    CsvWriter w("rp_ohm,cp_nf,re_omega,im_omega");
    append_locus_rows(w, grid);
    const SeedResult seed = seed_from_sweep(spec);

    std::ostringstream sj;
    sj << "{\n  \"omega_guess_re\": " << fmt_double(seed.omega_guess.real())
       << ",\n  \"omega_guess_im\": " << fmt_double(seed.omega_guess.imag())
       << ",\n  \"rp_ohm\": " << fmt_double(seed.value1)
       << ",\n  \"cp_f\": " << fmt_double(seed.value2)
       << ",\n  \"flat_index\": " << seed.flat_index << "\n}\n";

    const std::string csv_path = out_path(c, "sweep.csv");
    const std::string seed_path = out_path(c, "seed.json");
    write_text_file(csv_path, w.str());
    write_text_file(seed_path, sj.str());
    return {csv_path, seed_path};
}

std::vector<std::string> cmd_find_ep(const CommonArgs& c, const CircuitParams& p) {
    const EPResult ep = locate_circuit_ep(p);
    const std::string path = out_path(c, "ep.json");
    write_text_file(path, ep.to_json());
    return {path};
}

std::vector<std::string> cmd_impulse(const CommonArgs& c, const CircuitParams& p,
                                     double tp, bool port_a_only) {
    const ImpulseResult r =
        impulse_experiment(circuit_matrix(p), tp, 1e-6, 8192, port_a_only);
    const std::string path = out_path(c, "impulse.csv");
    write_text_file(path, r.ts.to_csv());
    return {path};
}

std::vector<std::string> cmd_fit(const CommonArgs& c, const CircuitParams& p,
                                 double tp, bool port_a_only) {
    const SystemMatrix m = circuit_matrix(p);
    const ImpulseResult imp = impulse_experiment(m, tp, 1e-6, 8192, port_a_only);

    double max_re = 0.0;
    for (const cplx& w : resonances(m).omega) max_re = std::max(max_re, std::abs(w.real()));
    const SpectrumSamples ia = dft(imp.ts, "i_a").restricted(3.0 * max_re);
    const SpectrumSamples va = flat_pulse_spectrum(ia, imp.pulse_area);

    const RationalFit fit = fit_rational(ia, va);
    const ResonanceSet eig = fitted_eigenvalues(fit);

    SpectrumSamples response = ia;
    for (std::size_t k = 0; k < response.value.size(); ++k)
        response.value[k] /= imp.pulse_area;

    const std::string spec_path = out_path(c, "spectrum.csv");
    const std::string fit_path = out_path(c, "rational_fit.json");
    const std::string eig_path = out_path(c, "fitted_eigen.csv");
    write_text_file(spec_path, response.to_csv());
    write_text_file(fit_path, fit.to_json());
    write_text_file(eig_path, resonance_csv(eig));
    return {spec_path, fit_path, eig_path};
}

std::vector<std::string> cmd_phase(const CommonArgs& c, const CircuitParams& p,
                                   int n_phases, const std::string& csv_name) {
    // locate the EP on the base parameters, then operate (possibly detuned)
    const EPResult ep = locate_circuit_ep(p);
    CircuitParams op = p;
    op.rp = ep.param_values[0];
    op.cp = ep.param_values[1] * c.detune_cp;
    const PhaseExperimentResult r =
        phase_experiment(circuit_matrix(op), ep, n_phases);
    const std::string path = out_path(c, csv_name);
    write_text_file(path, r.to_csv());
    return {path};
}

std::vector<std::string> cmd_chirality(const CommonArgs& c, const CircuitParams& p) {
    const EPResult ep = locate_circuit_ep(p);
    CircuitParams op = p;
    op.rp = ep.param_values[0];
    op.cp = ep.param_values[1];
    const SystemMatrix m = circuit_matrix(op);
    const CVec4 u = ep_eigenvector(m, state_eig_from_reported(ep.omega_ep));
    const ChiralityReport rep = measured_ratio(m, u);

    std::ostringstream o;
    o << "{\n  \"ratio_re\": " << fmt_double(rep.ratio.real())
      << ",\n  \"ratio_im\": " << fmt_double(rep.ratio.imag())
      << ",\n  \"modulus\": " << fmt_double(rep.modulus)
      << ",\n  \"arg_rad\": " << fmt_double(rep.arg_rad) << "\n}\n";
    const std::string path = out_path(c, "chirality.json");
    write_text_file(path, o.str());
    return {path};
}

std::vector<std::string> cmd_reproduce_fig2(const CommonArgs& c, const CircuitParams& p) {
    const SweepSpec spec = fig2_sweep(ParamSet::from_circuit(p));
    const auto grid = locus_grid(spec);
    CsvWriter w("rp_ohm,cp_nf,re_omega,im_omega");
    append_locus_rows(w, grid);
    const EPResult ep = locate_circuit_ep(p);
    w.row({fmt_double(ep.param_values[0]), fmt_double(ep.param_values[1] * 1e9),
           fmt_double(ep.omega_ep.real()), fmt_double(ep.omega_ep.imag())});
    const std::string path = out_path(c, "fig2.csv");
    write_text_file(path, w.str());
    return {path};
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"numerical laboratory for exceptional points in coupled RLC circuits"};
    app.set_version_flag("--version", std::string("epcirc ") + kVersion);
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        CommonArgs common;
    };
    std::vector<std::string> names = {"eigen", "sweep", "find-ep", "impulse",
                                      "fit", "phase", "chirality",
                                      "reproduce-fig2", "reproduce-fig3"};
    std::map<std::string, Sub> subs;
    for (const auto& n : names) {
        Sub s;
        s.cmd = app.add_subcommand(n);
        subs[n] = s;
        add_common(subs[n].cmd, subs[n].common);
    }
    double tp = 1e-6;
    bool port_a_only = false;
    int n_phases = 16;
    subs["impulse"].cmd->add_option("--tp", tp, "pulse width, seconds");
    subs["impulse"].cmd->add_flag("--port-a-only", port_a_only, "excite port A only");
    subs["fit"].cmd->add_option("--tp", tp, "pulse width, seconds");
    subs["fit"].cmd->add_flag("--port-a-only", port_a_only, "excite port A only");
    subs["phase"].cmd->add_option("--phases", n_phases, "number of phase grid points");

    std::vector<std::string> argv_like(args.rbegin(), args.rend());
    try {
        app.parse(argv_like);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        for (const auto& n : names) {
            Sub& s = subs[n];
            if (!s.cmd->parsed()) continue;
            const auto t_start = std::chrono::steady_clock::now();
            fs::create_directories(s.common.out_dir.empty() ? "." : s.common.out_dir);
            CircuitParams p = resolve_params(s.common);

            std::vector<std::string> outputs;
            if (n == "eigen") {
                outputs = cmd_eigen(s.common, detuned(p, s.common.detune_cp));
            } else if (n == "sweep") {
                outputs = cmd_sweep(s.common, detuned(p, s.common.detune_cp));
            } else if (n == "find-ep") {
                outputs = cmd_find_ep(s.common, detuned(p, s.common.detune_cp));
            } else if (n == "impulse") {
                outputs = cmd_impulse(s.common, detuned(p, s.common.detune_cp), tp, port_a_only);
            } else if (n == "fit") {
                outputs = cmd_fit(s.common, detuned(p, s.common.detune_cp), tp, port_a_only);
            } else if (n == "phase") {
                outputs = cmd_phase(s.common, p, n_phases, "phase.csv");
            } else if (n == "chirality") {
                outputs = cmd_chirality(s.common, p);
            } else if (n == "reproduce-fig2") {
                outputs = cmd_reproduce_fig2(s.common, detuned(p, s.common.detune_cp));
            } else if (n == "reproduce-fig3") {
                outputs = cmd_phase(s.common, p, 16, "fig3.csv");
            }
            const double dur = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - t_start)
                                   .count();
            write_manifest(s.common, n, p, outputs, dur);
        }
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const precondition_error& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 4;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace epcirc
