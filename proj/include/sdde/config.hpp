#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdde/common.hpp"

namespace sdde {

/// Everything a run needs, parsed from a sectioned key = value file.
/// Physical parameters (r, d, dt, t_end, the birth parameter) have no
/// defaults: a config that does not state them does not validate.
struct RunConfig {
    // [domain]
    double length = kPi;
    int n_modes = 16;
    int n_grid = 64;

    // [delay]
    std::optional<double> r;

    // [measure]
    int n_atoms = 16;
    double eta_ign = 0.2;
    double state_coupling = 1.0;  ///< kappa; 0 freezes all state dependence
    double ac_mass = 0.5;
    double beta = 0.5;
    int n_rho = 20001;
    double gamma_base = 0.2;
    double gamma_scale = 0.2;
    int cantor_depth = 12;

    // [birth]
    std::string birth_preset;  ///< nicholson | linear_sat | constant | linear | zero
    std::optional<double> birth_param;

    // [kernel]
    std::string kernel_preset = "gaussian_bump";  ///< constant | gaussian_bump
    double kernel_value = 0.25;                   ///< constant preset level
    double kernel_amp = 0.25;
    double kernel_width = 0.5;

    // [solver]
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<double> damping;  ///< d
    double fp_tol = 1e-12;
    int fp_max_iter = 60;
    std::string damping_mode = "absorbed";  ///< absorbed | integrand

    // [initial]
    std::string initial_preset = "smooth_random";  ///< smooth_random | zero
    double initial_amplitude = 1.0;
    int initial_modes = 6;

    // [probes]
    std::string probes_run = "all";  ///< comma list of probe names, or "all"
    double slack = 0.1;
    int n_probes = 24;
    double perturb_scale = 0.01;
    double pair_distance = 1e-3;
    double gronwall_T = 2.0;
    double dissip_T = 10.0;
    double conv_T = 2.0;
    std::vector<double> dt_list = {0.04, 0.02, 0.01};

    // [output]
    std::string out_dir = "out";

    // [run]
    std::uint64_t seed = 1;
    std::vector<double> deltas = {0.25};
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_int(const std::string& s, int& out) {
    try {
        std::size_t pos = 0;
        out = std::stoi(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
    try {
        std::size_t pos = 0;
        out = std::stoull(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_double_list(const std::string& s, std::vector<double>& out) {
    out.clear();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_double(trim(item), v)) return false;
        out.push_back(v);
    }
    return !out.empty();
}

}  // namespace detail

/// Parses the sectioned text; syntax and unknown-key problems land in
/// `errors` (parsing continues so every problem is reported at once).
inline RunConfig parse_config(const std::string& text, std::vector<std::string>& errors) {
    using namespace detail;
    RunConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string where = section + "." + key;
        auto bad = [&]() { errors.push_back(where + ": cannot parse value '" + val + "'"); };

        bool known = true;
        double d;
        int i;
        std::uint64_t u;
        if (section == "domain") {
            if (key == "length") { if (parse_double(val, d)) cfg.length = d; else bad(); }
            else if (key == "n_modes") { if (parse_int(val, i)) cfg.n_modes = i; else bad(); }
            else if (key == "n_grid") { if (parse_int(val, i)) cfg.n_grid = i; else bad(); }
            else known = false;
        } else if (section == "delay") {
            if (key == "r") { if (parse_double(val, d)) cfg.r = d; else bad(); }
            else known = false;
        } else if (section == "measure") {
            if (key == "n_atoms") { if (parse_int(val, i)) cfg.n_atoms = i; else bad(); }
            else if (key == "eta_ign") { if (parse_double(val, d)) cfg.eta_ign = d; else bad(); }
            else if (key == "state_coupling") { if (parse_double(val, d)) cfg.state_coupling = d; else bad(); }
            else if (key == "ac_mass") { if (parse_double(val, d)) cfg.ac_mass = d; else bad(); }
            else if (key == "beta") { if (parse_double(val, d)) cfg.beta = d; else bad(); }
            else if (key == "n_rho") { if (parse_int(val, i)) cfg.n_rho = i; else bad(); }
            else if (key == "gamma_base") { if (parse_double(val, d)) cfg.gamma_base = d; else bad(); }
            else if (key == "gamma_scale") { if (parse_double(val, d)) cfg.gamma_scale = d; else bad(); }
            else if (key == "cantor_depth") { if (parse_int(val, i)) cfg.cantor_depth = i; else bad(); }
            else known = false;
        } else if (section == "birth") {
            if (key == "preset") cfg.birth_preset = val;
            else if (key == "param") { if (parse_double(val, d)) cfg.birth_param = d; else bad(); }
            else known = false;
        } else if (section == "kernel") {
            if (key == "preset") cfg.kernel_preset = val;
            else if (key == "value") { if (parse_double(val, d)) cfg.kernel_value = d; else bad(); }
            else if (key == "amp") { if (parse_double(val, d)) cfg.kernel_amp = d; else bad(); }
            else if (key == "width") { if (parse_double(val, d)) cfg.kernel_width = d; else bad(); }
            else known = false;
        } else if (section == "solver") {
            if (key == "dt") { if (parse_double(val, d)) cfg.dt = d; else bad(); }
            else if (key == "t_end") { if (parse_double(val, d)) cfg.t_end = d; else bad(); }
            else if (key == "d") { if (parse_double(val, d)) cfg.damping = d; else bad(); }
            else if (key == "fp_tol") { if (parse_double(val, d)) cfg.fp_tol = d; else bad(); }
            else if (key == "fp_max_iter") { if (parse_int(val, i)) cfg.fp_max_iter = i; else bad(); }
            else if (key == "damping_mode") cfg.damping_mode = val;
            else known = false;
        } else if (section == "initial") {
            if (key == "preset") cfg.initial_preset = val;
            else if (key == "amplitude") { if (parse_double(val, d)) cfg.initial_amplitude = d; else bad(); }
            else if (key == "modes") { if (parse_int(val, i)) cfg.initial_modes = i; else bad(); }
            else known = false;
        } else if (section == "probes") {
            if (key == "run") cfg.probes_run = val;
            else if (key == "slack") { if (parse_double(val, d)) cfg.slack = d; else bad(); }
            else if (key == "n_probes") { if (parse_int(val, i)) cfg.n_probes = i; else bad(); }
            else if (key == "perturb_scale") { if (parse_double(val, d)) cfg.perturb_scale = d; else bad(); }
            else if (key == "pair_distance") { if (parse_double(val, d)) cfg.pair_distance = d; else bad(); }
            else if (key == "gronwall_T") { if (parse_double(val, d)) cfg.gronwall_T = d; else bad(); }
            else if (key == "dissip_T") { if (parse_double(val, d)) cfg.dissip_T = d; else bad(); }
            else if (key == "conv_T") { if (parse_double(val, d)) cfg.conv_T = d; else bad(); }
            else if (key == "dt_list") { if (!parse_double_list(val, cfg.dt_list)) bad(); }
            else known = false;
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = val;
            else known = false;
        } else if (section == "run") {
            if (key == "seed") { if (parse_u64(val, u)) cfg.seed = u; else bad(); }
            else if (key == "deltas") { if (!parse_double_list(val, cfg.deltas)) bad(); }
            else known = false;
        } else {
            errors.push_back("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            continue;
        }
        if (!known) errors.push_back(where + ": unknown key");
    }
    return cfg;
}

/// Collects every validation problem; an empty result means the config can
/// build a problem. Stability of the per-step fixed point (dt * L_Fc < 1)
/// is checked here from the closed-form constants.
inline std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> e;
    auto req = [&](bool ok, const std::string& msg) { if (!ok) e.push_back(msg); };

    req(c.length > 0.0, "domain.length: must be positive");
    req(c.n_modes >= 1, "domain.n_modes: must be >= 1");
    req(c.n_grid >= std::max(2 * c.n_modes, c.n_modes + 2),
        "domain.n_grid: must be >= max(2*n_modes, n_modes+2)");

    req(c.r.has_value(), "delay.r: required, no default");
    const double r = c.r.value_or(1.0);
    if (c.r) req(r > 0.0, "delay.r: must be positive");

    req(c.n_atoms >= 0, "measure.n_atoms: must be >= 0");
    if (c.n_atoms > 0 && c.r)
        req(c.eta_ign > 0.0 && c.eta_ign < r, "measure.eta_ign: must lie in (0, r)");
    req(c.state_coupling >= 0.0, "measure.state_coupling: must be >= 0");
    req(c.ac_mass >= 0.0, "measure.ac_mass: must be >= 0");
    req(c.beta >= 0.0, "measure.beta: must be >= 0");
    if (c.ac_mass > 0.0) req(c.n_rho >= 2, "measure.n_rho: must be >= 2");
    req(c.gamma_base >= 0.0 && c.gamma_scale >= 0.0,
        "measure.gamma_base/gamma_scale: must be >= 0");
    if (c.gamma_base > 0.0 || c.gamma_scale > 0.0)
        req(c.cantor_depth >= 1 && c.cantor_depth <= 20, "measure.cantor_depth: must be in [1, 20]");

    const bool preset_known = c.birth_preset == "nicholson" || c.birth_preset == "linear_sat" ||
                              c.birth_preset == "constant" || c.birth_preset == "linear" ||
                              c.birth_preset == "zero";
    req(!c.birth_preset.empty(), "birth.preset: required, no default");
    if (!c.birth_preset.empty()) req(preset_known, "birth.preset: unknown preset '" + c.birth_preset + "'");
    if (c.birth_preset != "zero" && !c.birth_preset.empty() && preset_known)
        req(c.birth_param.has_value(), "birth.param: required for preset '" + c.birth_preset + "'");
    if (c.birth_preset == "nicholson" && c.birth_param) req(*c.birth_param > 0.0, "birth.param: nicholson p must be positive");

    req(c.kernel_preset == "constant" || c.kernel_preset == "gaussian_bump",
        "kernel.preset: unknown preset '" + c.kernel_preset + "'");
    if (c.kernel_preset == "gaussian_bump") req(c.kernel_width > 0.0, "kernel.width: must be positive");

    req(c.dt.has_value(), "solver.dt: required, no default");
    req(c.t_end.has_value(), "solver.t_end: required, no default");
    req(c.damping.has_value(), "solver.d: required, no default");
    if (c.dt) req(*c.dt > 0.0, "solver.dt: must be positive");
    if (c.damping) req(*c.damping >= 0.0, "solver.d: must be >= 0");
    req(c.fp_tol > 0.0, "solver.fp_tol: must be positive");
    req(c.fp_max_iter >= 1, "solver.fp_max_iter: must be >= 1");
    req(c.damping_mode == "absorbed" || c.damping_mode == "integrand",
        "solver.damping_mode: must be 'absorbed' or 'integrand'");

    if (c.r && c.dt && *c.dt > 0.0) {
        const double q = r / *c.dt;
        const int n = static_cast<int>(std::round(q));
        req(n >= 1 && std::abs(q - n) <= 1e-9 * (1.0 + q), "solver.dt: must divide delay.r exactly");
    }
    if (c.dt && c.t_end && *c.dt > 0.0) {
        const double q = *c.t_end / *c.dt;
        const int n = static_cast<int>(std::round(q));
        req(*c.t_end >= 0.0 && std::abs(q - n) <= 1e-9 * (1.0 + q),
            "solver.t_end: must be a nonnegative multiple of dt");
    }

    req(c.initial_preset == "smooth_random" || c.initial_preset == "zero",
        "initial.preset: unknown preset '" + c.initial_preset + "'");
    req(c.slack >= 0.0, "probes.slack: must be >= 0");
    req(c.n_probes >= 1, "probes.n_probes: must be >= 1");
    for (std::size_t i = 0; i + 1 < c.dt_list.size(); ++i)
        req(c.dt_list[i] > c.dt_list[i + 1] && c.dt_list[i + 1] > 0.0,
            "probes.dt_list: must be strictly decreasing and positive");
    for (double d : c.deltas)
        req(d >= 0.0 && d < 0.5, "run.deltas: every delta must lie in [0, 1/2)");

    // Fixed-point contraction: dt * L_Fc < 1 for bounded presets, using the
    // closed-form constants of the built-in family (analytic R0 = ac_mass).
    if (e.empty() && c.birth_preset != "linear") {
        double L_b = 0.0, M_b = 0.0;
        const double p = c.birth_param.value_or(0.0);
        if (c.birth_preset == "nicholson") { L_b = p; M_b = p * std::exp(-1.0); }
        else if (c.birth_preset == "linear_sat") { L_b = p; M_b = p; }
        else if (c.birth_preset == "constant") { L_b = 0.0; M_b = std::abs(p); }
        const double M_f = c.kernel_preset == "constant" ? std::abs(c.kernel_value) : std::abs(c.kernel_amp);
        const double s_max = c.state_coupling > 0.0 ? 1.0 : 0.0;
        const double gamma_max = c.gamma_base + c.gamma_scale * s_max;
        const double M_Vgc = c.ac_mass * (1.0 + c.beta * s_max) + gamma_max;
        const double L_Vgc = c.ac_mass * c.beta * c.state_coupling * r + c.gamma_scale * c.state_coupling * r;
        const double L_Fc = M_f * c.length * (L_b * M_Vgc + M_b * std::sqrt(c.length) * L_Vgc);
        if (*c.dt * L_Fc >= 1.0)
            e.push_back("solver.dt: dt * L_Fc = " + std::to_string(*c.dt * L_Fc) +
                        " >= 1; the per-step fixed point is not a contraction");
    }
    return e;
}

namespace detail {
inline std::string join17(const std::vector<double>& v);
}

/// Canonical echo: every key, fixed order, 17-digit floats. Parsing the
/// echo and echoing again reproduces the same bytes.
inline std::string serialize_config(const RunConfig& c) {
    char buf[40];
    auto f = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    auto fl = [&](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += f(v[i]);
        }
        return s;
    };
    std::ostringstream os;
    os << "[domain]\n";
    os << "length = " << f(c.length) << "\n";
    os << "n_modes = " << c.n_modes << "\n";
    os << "n_grid = " << c.n_grid << "\n\n";
    os << "[delay]\n";
    if (c.r) os << "r = " << f(*c.r) << "\n";
    os << "\n[measure]\n";
    os << "n_atoms = " << c.n_atoms << "\n";
    os << "eta_ign = " << f(c.eta_ign) << "\n";
    os << "state_coupling = " << f(c.state_coupling) << "\n";
    os << "ac_mass = " << f(c.ac_mass) << "\n";
    os << "beta = " << f(c.beta) << "\n";
    os << "n_rho = " << c.n_rho << "\n";
    os << "gamma_base = " << f(c.gamma_base) << "\n";
    os << "gamma_scale = " << f(c.gamma_scale) << "\n";
    os << "cantor_depth = " << c.cantor_depth << "\n\n";
    os << "[birth]\n";
    if (!c.birth_preset.empty()) os << "preset = " << c.birth_preset << "\n";
    if (c.birth_param) os << "param = " << f(*c.birth_param) << "\n";
    os << "\n[kernel]\n";
    os << "preset = " << c.kernel_preset << "\n";
    os << "value = " << f(c.kernel_value) << "\n";
    os << "amp = " << f(c.kernel_amp) << "\n";
    os << "width = " << f(c.kernel_width) << "\n\n";
    os << "[solver]\n";
    if (c.dt) os << "dt = " << f(*c.dt) << "\n";
    if (c.t_end) os << "t_end = " << f(*c.t_end) << "\n";
    if (c.damping) os << "d = " << f(*c.damping) << "\n";
    os << "fp_tol = " << f(c.fp_tol) << "\n";
    os << "fp_max_iter = " << c.fp_max_iter << "\n";
    os << "damping_mode = " << c.damping_mode << "\n\n";
    os << "[initial]\n";
    os << "preset = " << c.initial_preset << "\n";
    os << "amplitude = " << f(c.initial_amplitude) << "\n";
    os << "modes = " << c.initial_modes << "\n\n";
    os << "[probes]\n";
    os << "run = " << c.probes_run << "\n";
    os << "slack = " << f(c.slack) << "\n";
    os << "n_probes = " << c.n_probes << "\n";
    os << "perturb_scale = " << f(c.perturb_scale) << "\n";
    os << "pair_distance = " << f(c.pair_distance) << "\n";
    os << "gronwall_T = " << f(c.gronwall_T) << "\n";
    os << "dissip_T = " << f(c.dissip_T) << "\n";
    os << "conv_T = " << f(c.conv_T) << "\n";
    os << "dt_list = " << fl(c.dt_list) << "\n\n";
    os << "[output]\n";
    os << "dir = " << c.out_dir << "\n\n";
    os << "[run]\n";
    os << "seed = " << c.seed << "\n";
    os << "deltas = " << fl(c.deltas) << "\n";
    return os.str();
}

}  // namespace sdde
