#pragma once

#include <stdexcept>

#include "sdde/config.hpp"
#include "sdde/delay_term.hpp"
#include "sdde/measure.hpp"
#include "sdde/solver.hpp"
#include "sdde/spatial.hpp"
#include "sdde/verify.hpp"

namespace sdde {

/// Owns every object a run or probe needs. setup() hands out const
/// references, so a Problem must outlive the ProblemSetup views on it.
struct Problem {
    RunConfig cfg;
    Domain dom;
    SpatialOperator op;
    Kernel kernel;
    BirthFunction birth;
    GeneratingMeasure gm;

    ProblemSetup setup() const { return ProblemSetup{dom, op, gm, birth, kernel}; }

    double r() const { return *cfg.r; }

    int history_intervals() const {
        return static_cast<int>(std::round(r() / *cfg.dt));
    }

    SolverConfig solver_config() const {
        SolverConfig sc;
        sc.dt = *cfg.dt;
        sc.t_end = *cfg.t_end;
        sc.fp_tol = cfg.fp_tol;
        sc.fp_max_iter = cfg.fp_max_iter;
        sc.damping_mode = cfg.damping_mode == "integrand" ? DampingMode::integrand
                                                          : DampingMode::absorbed;
        sc.record_deltas = cfg.deltas;
        return sc;
    }

    /// Initial history on the solver grid. The RNG stream is forked off the
    /// run seed, so the same seed always produces the same segment.
    HistorySegment initial_segment(const Rng& run_rng) const {
        const int n_steps = history_intervals() + 1;
        if (cfg.initial_preset == "zero")
            return HistorySegment(r(), n_steps, SpectralField(dom.n_modes()));
        Rng rng = run_rng.fork("initial");
        return random_smooth_segment(dom, r(), n_steps, rng, cfg.initial_amplitude,
                                     cfg.initial_modes);
    }

    /// Same underlying function as initial_segment, but resampleable on any
    /// grid; convergence studies need grid-independent initial data.
    SmoothProfile initial_profile(const Rng& run_rng) const {
        if (cfg.initial_preset == "zero") {
            SmoothProfile p;
            p.n_modes = dom.n_modes();
            p.amp.assign(dom.n_modes(), 0.0);
            p.omega.assign(dom.n_modes(), 1.0);
            p.phase.assign(dom.n_modes(), 0.0);
            return p;
        }
        Rng rng = run_rng.fork("initial");
        return random_smooth_profile(dom, rng, cfg.initial_amplitude, cfg.initial_modes);
    }
};

inline BirthFunction make_birth(const RunConfig& c) {
    const double p = c.birth_param.value_or(0.0);
    if (c.birth_preset == "nicholson") return BirthFunction::nicholson(p);
    if (c.birth_preset == "linear_sat") return BirthFunction::linear_sat(p);
    if (c.birth_preset == "constant") return BirthFunction::constant(p);
    if (c.birth_preset == "linear") return BirthFunction::linear(p);
    if (c.birth_preset == "zero") return BirthFunction::zero();
    throw std::invalid_argument("unknown birth preset: " + c.birth_preset);
}

inline Problem build_problem(const RunConfig& cfg) {
    const auto errors = validate_config(cfg);
    if (!errors.empty()) {
        std::string msg = "config does not validate:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    DomainConfig dc;
    dc.length = cfg.length;
    dc.n_modes = cfg.n_modes;
    dc.n_grid = cfg.n_grid;
    Domain dom(dc);
    SpatialOperator op = SpatialOperator::dirichlet_laplacian(dc, *cfg.damping);

    Kernel kernel = cfg.kernel_preset == "constant"
                        ? Kernel::constant(cfg.kernel_value, dom)
                        : Kernel::gaussian_bump(cfg.kernel_amp, cfg.kernel_width, dom);

    BirthFunction birth = make_birth(cfg);

    MeasureFamilyParams mp;
    mp.n_atoms = cfg.n_atoms;
    mp.eta_ign = cfg.eta_ign;
    mp.kappa = cfg.state_coupling;
    mp.ac_mass = cfg.ac_mass;
    mp.beta = cfg.beta;
    mp.n_rho = cfg.n_rho;
    mp.gamma_base = cfg.gamma_base;
    mp.gamma_scale = cfg.gamma_scale;
    mp.cantor_depth = cfg.cantor_depth;
    GeneratingMeasure gm = make_default_measure(mp, *cfg.r);

    return Problem{cfg, std::move(dom), std::move(op), std::move(kernel), std::move(birth),
                   std::move(gm)};
}

}  // namespace sdde
