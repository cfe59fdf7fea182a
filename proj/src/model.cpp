#include "epcirc/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "epcirc/textio.hpp"

namespace epcirc {

double CircuitParams::coupling_coefficient() const {
    return mmut / std::sqrt(lp * ls);
}

void CircuitParams::validate() const {
    const double vals[] = {cp, cs, lp, ls, r1, r2, rp, rs, mmut};
    for (double v : vals)
        if (!(v > 0.0) || !std::isfinite(v))
            throw param_domain_error("circuit parameters must be strictly positive and finite");
    const double k = coupling_coefficient();
    if (!(k > 0.0 && k < 1.0))
        throw invalid_coupling_error("coupling coefficient mmut/sqrt(lp*ls) outside (0,1)");
}

CircuitParams default_table1() {
    CircuitParams p;
    p.cp = 65e-9;
    p.r1 = 3.0;
    p.rp = 520.0;
    p.lp = 1.80e-3;
    p.ls = 2.55e-3;
    p.rs = 10.0e3;
    p.r2 = 3.0;
    p.cs = 47e-9;
    p.mmut = 0.3e-3;
    return p;
}

void OscillatorParams::validate() const {
    if (!(omega1 > 0.0) || !(omega2 > 0.0))
        throw param_domain_error("oscillator frequencies must be positive");
    if (k1 < 0.0 || k2 < 0.0 || g < 0.0)
        throw param_domain_error("damping rates must be non-negative");
    const double vals[] = {omega1, omega2, k1, k2, f, g};
    for (double v : vals)
        if (!std::isfinite(v)) throw param_domain_error("oscillator parameter not finite");
}

OscillatorParams circuit_to_oscillator(const CircuitParams& c) {
    c.validate();
    OscillatorParams o;
    o.omega1 = 1.0 / std::sqrt(c.lp * c.cp);
    o.omega2 = 1.0 / std::sqrt(c.ls * c.cs);
    o.k1 = c.r1 / (2.0 * c.lp) + 1.0 / (2.0 * c.rp * c.cp);
    o.k2 = c.r2 / (2.0 * c.ls) + 1.0 / (2.0 * c.rs * c.cs);
    const double kappa = c.coupling_coefficient();
    o.f = kappa * o.omega1 * o.omega2;
    o.g = kappa * (o.k1 + o.k2) / 2.0;
    o.validate();
    return o;
}

std::string param_name(ParamId id) {
    switch (id) {
        case ParamId::cp: return "cp_f";
        case ParamId::cs: return "cs_f";
        case ParamId::lp: return "lp_h";
        case ParamId::ls: return "ls_h";
        case ParamId::r1: return "r1_ohm";
        case ParamId::r2: return "r2_ohm";
        case ParamId::rp: return "rp_ohm";
        case ParamId::rs: return "rs_ohm";
        case ParamId::mmut: return "mmut_h";
        case ParamId::omega1: return "omega1";
        case ParamId::omega2: return "omega2";
        case ParamId::k1: return "k1";
        case ParamId::k2: return "k2";
        case ParamId::f: return "f";
        case ParamId::g: return "g";
    }
    throw std::logic_error("unreachable param id");
}

ParamId param_from_name(const std::string& name) {
    static const std::map<std::string, ParamId> table = {
        {"cp_f", ParamId::cp},     {"cs_f", ParamId::cs},   {"lp_h", ParamId::lp},
        {"ls_h", ParamId::ls},     {"r1_ohm", ParamId::r1}, {"r2_ohm", ParamId::r2},
        {"rp_ohm", ParamId::rp},   {"rs_ohm", ParamId::rs}, {"mmut_h", ParamId::mmut},
        {"omega1", ParamId::omega1}, {"omega2", ParamId::omega2},
        {"k1", ParamId::k1},       {"k2", ParamId::k2},     {"f", ParamId::f},
        {"g", ParamId::g},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw config_error("unknown parameter name: " + name);
    return it->second;
}

double ParamSet::get(ParamId id) const {
    switch (id) {
        case ParamId::cp: return circuit.cp;
        case ParamId::cs: return circuit.cs;
        case ParamId::lp: return circuit.lp;
        case ParamId::ls: return circuit.ls;
        case ParamId::r1: return circuit.r1;
        case ParamId::r2: return circuit.r2;
        case ParamId::rp: return circuit.rp;
        case ParamId::rs: return circuit.rs;
        case ParamId::mmut: return circuit.mmut;
        case ParamId::omega1: return mech.omega1;
        case ParamId::omega2: return mech.omega2;
        case ParamId::k1: return mech.k1;
        case ParamId::k2: return mech.k2;
        case ParamId::f: return mech.f;
        case ParamId::g: return mech.g;
    }
    throw std::logic_error("unreachable param id");
}

void ParamSet::set(ParamId id, double value) {
    switch (id) {
        case ParamId::cp: circuit.cp = value; return;
        case ParamId::cs: circuit.cs = value; return;
        case ParamId::lp: circuit.lp = value; return;
        case ParamId::ls: circuit.ls = value; return;
        case ParamId::r1: circuit.r1 = value; return;
        case ParamId::r2: circuit.r2 = value; return;
        case ParamId::rp: circuit.rp = value; return;
        case ParamId::rs: circuit.rs = value; return;
        case ParamId::mmut: circuit.mmut = value; return;
        case ParamId::omega1: mech.omega1 = value; return;
        case ParamId::omega2: mech.omega2 = value; return;
        case ParamId::k1: mech.k1 = value; return;
        case ParamId::k2: mech.k2 = value; return;
        case ParamId::f: mech.f = value; return;
        case ParamId::g: mech.g = value; return;
    }
    throw std::logic_error("unreachable param id");
}

void ParamSet::validate() const {
    if (kind == Kind::circuit)
        circuit.validate();
    else
        mech.validate();
}

ParamSet ParamSet::from_circuit(const CircuitParams& c) {
    ParamSet p;
    p.kind = Kind::circuit;
    p.circuit = c;
    return p;
}

ParamSet ParamSet::from_mechanical(const OscillatorParams& o) {
    ParamSet p;
    p.kind = Kind::mechanical;
    p.mech = o;
    return p;
}

void SweepSpec::validate() const {
    if (var1 == var2) throw precondition_error("sweep: varied parameters must be distinct");
    if (!(step1 > 0.0) || !(step2 > 0.0)) throw precondition_error("sweep: steps must be positive");
    if (stop1 < start1 || stop2 < start2) throw precondition_error("sweep: empty range");
    base.validate();
}

namespace {
std::size_t grid_count(double start, double stop, double step) {
    // inclusive of start; includes every start + k*step <= stop + step/2
    return std::size_t(std::floor((stop - start) / step + 0.5)) + 1;
}
}  // namespace

std::size_t SweepSpec::n1() const { return grid_count(start1, stop1, step1); }
std::size_t SweepSpec::n2() const { return grid_count(start2, stop2, step2); }
double SweepSpec::value1(std::size_t i) const { return start1 + double(i) * step1; }
double SweepSpec::value2(std::size_t j) const { return start2 + double(j) * step2; }

ParamSet SweepSpec::at(std::size_t i, std::size_t j) const {
    ParamSet p = base;
    p.set(var1, value1(i));
    p.set(var2, value2(j));
    return p;
}

SweepSpec fig2_sweep(const ParamSet& base) {
    SweepSpec s;
    s.var1 = ParamId::rp;
    s.start1 = 430.0;
    s.stop1 = 510.0;
    s.step1 = 40.0;
    s.var2 = ParamId::cp;
    s.start2 = 57.0e-9;
    s.stop2 = 72.0e-9;
    s.step2 = 0.22e-9;
    s.base = base;
    return s;
}

// --- config ------------------------------------------------------------------

namespace {

const char* const kConfigKeys[] = {"cp_f", "cs_f", "lp_h",   "ls_h", "r1_ohm",
                                   "r2_ohm", "rp_ohm", "rs_ohm", "mmut_h"};

double* field_by_key(CircuitParams& p, const std::string& key) {
    if (key == "cp_f") return &p.cp;
    if (key == "cs_f") return &p.cs;
    if (key == "lp_h") return &p.lp;
    if (key == "ls_h") return &p.ls;
    if (key == "r1_ohm") return &p.r1;
    if (key == "r2_ohm") return &p.r2;
    if (key == "rp_ohm") return &p.rp;
    if (key == "rs_ohm") return &p.rs;
    if (key == "mmut_h") return &p.mmut;
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

CircuitParams parse_config(std::istream& in, const std::string& filename) {
    CircuitParams p = default_table1();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(filename + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        double* field = field_by_key(p, key);
        if (!field)
            throw config_error(filename + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
        try {
            std::size_t used = 0;
            const double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument("trailing");
            *field = v;
        } catch (const std::exception&) {
            throw config_error(filename + ":" + std::to_string(lineno) +
                               ": bad numeric value '" + val + "'");
        }
    }
    return p;
}

CircuitParams read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    return parse_config(in, path);
}

void write_config_file(const std::string& path, const CircuitParams& p) {
    std::ostringstream out;
    CircuitParams copy = p;
    for (const char* key : kConfigKeys)
        out << key << " = " << fmt_double(*field_by_key(copy, key)) << "\n";
    write_text_file(path, out.str());
}

void apply_override(CircuitParams& p, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw config_error("--set expects key=value, got: " + kv);
    const std::string key = trim(kv.substr(0, eq));
    const std::string val = trim(kv.substr(eq + 1));
    double* field = field_by_key(p, key);
    if (!field) throw config_error("--set: unknown key '" + key + "'");
    try {
        std::size_t used = 0;
        const double v = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument("trailing");
        *field = v;
    } catch (const std::exception&) {
        throw config_error("--set: bad numeric value '" + val + "'");
    }
}

}  // namespace epcirc
