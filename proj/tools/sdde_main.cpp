#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdde/output.hpp"
#include "sdde/problem.hpp"

namespace fs = std::filesystem;
using namespace sdde;

namespace {

constexpr int kExitConfig = 1;  // unreadable/invalid config, unknown probe
constexpr int kExitStep = 2;    // integration aborted mid-run
constexpr int kExitProbe = 3;   // a selected probe failed

const std::vector<std::string> kProbeNames = {"fc_continuity", "fd_continuity", "remark1",
                                              "gronwall", "dissipativity"};

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

/// Loads, parses, validates; prints every problem found. Returns false on
/// any error so callers can exit with kExitConfig.
bool load_config(const std::string& path, std::optional<std::uint64_t> seed_override,
                 RunConfig& cfg) {
    std::string text;
    if (!read_file(path, text)) {
        std::cerr << "error: cannot read config file '" << path << "'\n";
        return false;
    }
    std::vector<std::string> errors;
    cfg = parse_config(text, errors);
    if (seed_override) cfg.seed = *seed_override;
    for (const auto& e : validate_config(cfg)) errors.push_back(e);
    if (!errors.empty()) {
        std::cerr << "error: config '" << path << "' is invalid:\n";
        for (const auto& e : errors) std::cerr << "  " << e << "\n";
        return false;
    }
    return true;
}

nlohmann::ordered_json constants_json(const Problem& prob) {
    nlohmann::ordered_json c;
    DomainConfig dc;
    dc.length = prob.cfg.length;
    dc.n_modes = prob.cfg.n_modes;
    dc.n_grid = prob.cfg.n_grid;
    c["lambda1"] = prob.op.lambda1();
    c["damping"] = *prob.cfg.damping;
    c["M_f"] = prob.kernel.bound();
    c["M_Vg"] = prob.gm.M_Vg;
    c["M_Vgc"] = prob.gm.M_Vgc;
    c["L_Vgc"] = prob.gm.L_Vgc;
    if (prob.birth.bounded) {
        c["L_Fc"] = lipschitz_constant_Fc(prob.gm, prob.birth, prob.kernel, dc);
        c["F_norm_bound"] = norm_bound_F(prob.gm, prob.birth, prob.kernel, dc);
        c["absorbing_radius"] =
            norm_bound_F(prob.gm, prob.birth, prob.kernel, dc) / (prob.op.lambda1() + *prob.cfg.damping);
    } else {
        c["L_Fc"] = nullptr;
        c["F_norm_bound"] = nullptr;
        c["absorbing_radius"] = nullptr;
    }
    return c;
}

nlohmann::ordered_json summary_base(const std::string& command, const Problem& prob) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["seed"] = prob.cfg.seed;
    j["constants"] = constants_json(prob);
    j["config"] = serialize_config(prob.cfg);
    return j;
}

void write_summary(const fs::path& out_dir, const nlohmann::ordered_json& j) {
    atomic_write_text(out_dir / "summary.json", j.dump(2) + "\n");
}

int cmd_run(const RunConfig& cfg, const fs::path& out_dir) {
    Problem prob = build_problem(cfg);
    const Rng rng(cfg.seed);
    const HistorySegment phi0 = prob.initial_segment(rng);
    TrajectoryRecord rec;
    try {
        rec = integrate(phi0, prob.dom, prob.op, prob.gm, prob.birth, prob.kernel,
                        prob.solver_config());
    } catch (const StepFailure& sf) {
        std::cerr << "error: " << sf.what() << " (t = " << sf.time << ")\n";
        return kExitStep;
    }
    atomic_write_text(out_dir / "trajectory.csv", trajectory_csv(rec));
    auto j = summary_base("run", prob);
    j["n_steps"] = rec.times.size() - 1;
    j["max_fp_iters"] = rec.max_fp_iters();
    nlohmann::ordered_json fin;
    fin["t"] = rec.times.back();
    fin["l2_norm"] = rec.l2_norms.back();
    fin["c_norm"] = rec.c_norms.back();
    j["final"] = std::move(fin);
    write_summary(out_dir, j);
    return 0;
}

int cmd_verify(const RunConfig& cfg, const fs::path& out_dir, const std::string& selector) {
    std::vector<std::string> selected;
    if (selector == "all") {
        selected = kProbeNames;
    } else {
        std::stringstream ss(selector);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            if (std::find(kProbeNames.begin(), kProbeNames.end(), item) == kProbeNames.end()) {
                std::cerr << "error: unknown probe '" << item << "'; valid probes:";
                for (const auto& n : kProbeNames) std::cerr << " " << n;
                std::cerr << "\n";
                return kExitConfig;
            }
            selected.push_back(item);
        }
        if (selected.empty()) {
            std::cerr << "error: empty probe selection\n";
            return kExitConfig;
        }
    }

    Problem prob = build_problem(cfg);
    const ProblemSetup s = prob.setup();
    const Rng rng(cfg.seed);
    const HistorySegment base = prob.initial_segment(rng);

    bool all_pass = true;
    nlohmann::ordered_json probe_flags;
    for (const auto& name : selected) {
        ProbeReport rep("", 0.0);
        try {
            if (name == "fc_continuity") {
                rep = probe_Fc_continuity(s, base, cfg.n_probes, cfg.perturb_scale, cfg.slack,
                                          rng.fork(name));
            } else if (name == "fd_continuity") {
                rep = probe_Fd_continuity(s, base, cfg.n_probes, cfg.perturb_scale, cfg.slack,
                                          rng.fork(name));
            } else if (name == "remark1") {
                rep = demo_remark1(prob.dom, prob.birth, prob.kernel,
                                   remark1_lag(cfg.eta_ign, prob.r()), cfg.eta_ign, base,
                                   cfg.n_probes, cfg.perturb_scale);
            } else if (name == "gronwall") {
                Rng pair_rng = rng.fork("gronwall_pair");
                const HistorySegment pert =
                    random_smooth_segment(prob.dom, prob.r(), prob.history_intervals() + 1,
                                          pair_rng, cfg.pair_distance, cfg.initial_modes);
                rep = probe_gronwall(s, base, base + pert, cfg.gronwall_T, prob.solver_config(),
                                     cfg.slack);
            } else {
                rep = probe_dissipativity(s, base, cfg.dissip_T, cfg.deltas, prob.solver_config(),
                                          cfg.slack);
            }
        } catch (const StepFailure& sf) {
            std::cerr << "error: probe '" << name << "': " << sf.what() << " (t = " << sf.time
                      << ")\n";
            return kExitStep;
        }
        atomic_write_text(out_dir / ("probe_" + name + ".json"), probe_json(rep).dump(2) + "\n");
        atomic_write_text(out_dir / ("probe_" + name + ".csv"), probe_csv(rep));
        probe_flags[name] = rep.pass();
        std::cout << (rep.pass() ? "pass" : "FAIL") << "  " << name << "\n";
        if (!rep.pass()) all_pass = false;
    }
    auto j = summary_base("verify", prob);
    j["probes"] = std::move(probe_flags);
    j["all_pass"] = all_pass;
    write_summary(out_dir, j);
    return all_pass ? 0 : kExitProbe;
}

int cmd_converge(const RunConfig& cfg, const fs::path& out_dir) {
    Problem prob = build_problem(cfg);
    const Rng rng(cfg.seed);
    const SmoothProfile profile = prob.initial_profile(rng);
    ProbeReport rep("", 0.0);
    try {
        rep = convergence_study(prob.setup(), profile, cfg.dt_list, cfg.conv_T,
                                prob.solver_config());
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StepFailure& sf) {
        std::cerr << "error: " << sf.what() << " (t = " << sf.time << ")\n";
        return kExitStep;
    }
    std::vector<double> diffs, orders;
    for (const ProbeRow& row : rep.rows()) {
        if (row.key == "diff") diffs.push_back(row.observed);
        if (row.key == "order") orders.push_back(row.observed);
    }
    atomic_write_text(out_dir / "order_table.csv", order_table_csv(cfg.dt_list, diffs, orders));
    atomic_write_text(out_dir / "probe_convergence.json", probe_json(rep).dump(2) + "\n");
    atomic_write_text(out_dir / "probe_convergence.csv", probe_csv(rep));
    auto j = summary_base("converge", prob);
    j["pass"] = rep.pass();
    write_summary(out_dir, j);
    std::cout << (rep.pass() ? "pass" : "FAIL") << "  convergence\n";
    return rep.pass() ? 0 : kExitProbe;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reaction-diffusion solver with a state-dependent delay measure"};
    app.require_subcommand(1);

    std::string config_path, out_flag, probes = "all";
    std::uint64_t seed_val = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "problem configuration file")->required();
        sub->add_option("--out", out_flag, "output directory (overrides [output] dir)");
        return sub->add_option("--seed", seed_val, "RNG seed (overrides [run] seed)");
    };

    auto* run = app.add_subcommand("run", "integrate one trajectory, write trajectory.csv");
    auto* run_seed = add_common(run);
    auto* verify = app.add_subcommand("verify", "run estimate probes, write per-probe reports");
    auto* verify_seed = add_common(verify);
    auto* probes_opt =
        verify->add_option("--probes", probes, "comma list of probes, or 'all' (overrides [probes] run)");
    auto* converge = app.add_subcommand("converge", "dt-refinement study, write order_table.csv");
    auto* converge_seed = add_common(converge);

    CLI11_PARSE(app, argc, argv);

    const CLI::App* sub = app.get_subcommands().front();
    const CLI::Option* seed_opt = sub == run ? run_seed : (sub == verify ? verify_seed : converge_seed);
    std::optional<std::uint64_t> seed_override;
    if (seed_opt->count() > 0) seed_override = seed_val;

    RunConfig cfg;
    if (!load_config(config_path, seed_override, cfg)) return kExitConfig;
    const fs::path out_dir = out_flag.empty() ? fs::path(cfg.out_dir) : fs::path(out_flag);

    try {
        if (sub == run) return cmd_run(cfg, out_dir);
        if (sub == verify)
            return cmd_verify(cfg, out_dir, probes_opt->count() > 0 ? probes : cfg.probes_run);
        return cmd_converge(cfg, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
