#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdde/history.hpp"
#include "sdde/measure.hpp"
#include "sdde/spatial.hpp"

namespace sdde {

/// The scalar nonlinearity applied under the space integral, with the
/// constants the estimates need: Lipschitz L_b everywhere, growth
/// |b(s)| <= C1|s| + C2, and the uniform bound M_b when it exists.
/// Bounded mode is required by the Lipschitz/dissipativity constants;
/// growth mode only supports the continuity estimates.
struct BirthFunction {
    std::function<double(double)> map;
    double L_b = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double M_b = std::numeric_limits<double>::infinity();
    bool bounded = false;
    std::string name = "zero";

    static BirthFunction zero() {
        BirthFunction b;
        b.map = [](double) { return 0.0; };
        b.M_b = 0.0;
        b.bounded = true;
        return b;
    }

    /// b(w) = p*w*e^{-w} on w >= 0, zero on w < 0 (population densities are
    /// nonnegative; clamping keeps b globally Lipschitz with constant p and
    /// bounded by p/e).
    static BirthFunction nicholson(double p) {
        if (p <= 0.0) throw std::invalid_argument("BirthFunction: nicholson p must be positive");
        BirthFunction b;
        b.map = [p](double w) { return w >= 0.0 ? p * w * std::exp(-w) : 0.0; };
        b.L_b = p;
        b.C1 = p;
        b.C2 = 0.0;
        b.M_b = p * std::exp(-1.0);
        b.bounded = true;
        b.name = "nicholson";
        return b;
    }

    /// b(w) = amp * tanh(w): globally Lipschitz and bounded, sign-carrying.
    static BirthFunction linear_sat(double amp) {
        if (amp < 0.0) throw std::invalid_argument("BirthFunction: linear_sat amplitude must be >= 0");
        BirthFunction b;
        b.map = [amp](double w) { return amp * std::tanh(w); };
        b.L_b = amp;
        b.C1 = amp;
        b.C2 = 0.0;
        b.M_b = amp;
        b.bounded = true;
        b.name = "linear_sat";
        return b;
    }

    /// History-independent load (paired with a state-independent measure it
    /// makes F constant, for which the exponential integrator is exact).
    static BirthFunction constant(double c) {
        BirthFunction b;
        b.map = [c](double) { return c; };
        b.L_b = 0.0;
        b.C1 = 0.0;
        b.C2 = std::abs(c);
        b.M_b = std::abs(c);
        b.bounded = true;
        b.name = "constant";
        return b;
    }

    /// Unbounded growth-mode preset b(w) = slope*w.
    static BirthFunction linear(double slope) {
        BirthFunction b;
        b.map = [slope](double w) { return slope * w; };
        b.L_b = std::abs(slope);
        b.C1 = std::abs(slope);
        b.C2 = 0.0;
        b.bounded = false;
        b.name = "linear";
        return b;
    }
};

/// One entry of the theta-wise integrand: x -> int_Omega b(v(y)) f(x-y) dy.
inline SpectralField conv_field(const SpectralField& v, const BirthFunction& b, const Kernel& f,
                                const Domain& dom) {
    std::vector<double> w = dom.to_grid(v);
    for (double& x : w) x = b.map(x);
    return kernel_convolve(w, f, dom);
}

/// Integrand fields at every history grid node; the continuous-part
/// quadratures read this table, so one convolution per node is the whole
/// per-evaluation cost.
inline std::vector<SpectralField> build_conv_table(const HistorySegment& seg, const BirthFunction& b,
                                                   const Kernel& f, const Domain& dom) {
    std::vector<SpectralField> table;
    table.reserve(seg.n_steps());
    for (int i = 0; i < seg.n_steps(); ++i) table.push_back(conv_field(seg.frame(i), b, f, dom));
    return table;
}

/// Continuous-part integral from a prebuilt integrand table, with the
/// measure state taken from `state`: the AC part is a trapezoid over the
/// history grid against the density table, the singular part distributes
/// each Cantor midpoint atom onto its two bracketing nodes.
inline SpectralField eval_F_c_tabled(const std::vector<SpectralField>& table, const HistorySegment& state,
                                     const GeneratingMeasure& gm, const Domain& dom) {
    const int n = static_cast<int>(table.size());
    const double h = gm.r / (n - 1);
    std::vector<double> node_w(n, 0.0);
    if (!gm.ac.empty()) {
        const double factor = 1.0 + gm.ac.beta * (gm.ac.s_ac ? gm.ac.s_ac(state) : 0.0);
        if (factor < 0.0) throw InvariantViolation("AC state factor went negative");
        for (int i = 0; i < n; ++i) {
            const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
            node_w[i] += factor * w * gm.ac.density_at(-gm.r + i * h);
        }
    }
    if (!gm.singular.empty()) {
        const double g = gm.singular.gamma(state);
        if (g < 0.0) throw InvariantViolation("singular amplitude went negative");
        const double mass = g / static_cast<double>(gm.singular.atoms.size());
        for (double x : gm.singular.atoms) {
            const double pos = x * (n - 1);
            const int lo = std::min(static_cast<int>(pos), n - 2);
            const double w = pos - lo;
            node_w[lo] += (1.0 - w) * mass;
            node_w[lo + 1] += w * mass;
        }
    }
    SpectralField out(dom.n_modes());
    for (int i = 0; i < n; ++i)
        if (node_w[i] != 0.0) axpy(node_w[i], table[i], out);
    return out;
}

/// F_c with the integrand read from one segment and the measure state from
/// another. The proof-style differences I1 and I2 are exact differences of
/// these mixed evaluations.
inline SpectralField eval_F_c_mixed(const HistorySegment& integrand, const HistorySegment& state,
                                    const GeneratingMeasure& gm, const BirthFunction& b, const Kernel& f,
                                    const Domain& dom) {
    return eval_F_c_tabled(build_conv_table(integrand, b, f, dom), state, gm, dom);
}

inline SpectralField eval_F_c(const HistorySegment& phi, const GeneratingMeasure& gm,
                              const BirthFunction& b, const Kernel& f, const Domain& dom) {
    return eval_F_c_mixed(phi, phi, gm, b, f, dom);
}

/// Discrete part with per-role states: lags from lag_state, jump sizes from
/// jump_state, integrand values from integrand. Atom integrands are
/// convolved lazily, one per atom. The three-way split K1 + K2 + K3 of a
/// discrete difference telescopes exactly through these evaluations.
inline SpectralField eval_F_d_mixed(const HistorySegment& integrand, const HistorySegment& lag_state,
                                    const HistorySegment& jump_state, const GeneratingMeasure& gm,
                                    const BirthFunction& b, const Kernel& f, const Domain& dom) {
    SpectralField out(dom.n_modes());
    for (int k = 0; k < gm.discrete.size(); ++k) {
        const double eta = detail::checked_lag(gm, k, lag_state);
        const double hk = gm.discrete.jumps[k](jump_state);
        if (hk == 0.0) continue;
        axpy(hk, conv_field(integrand.eval_at(-eta), b, f, dom), out);
    }
    return out;
}

inline SpectralField eval_F_d(const HistorySegment& phi, const GeneratingMeasure& gm,
                              const BirthFunction& b, const Kernel& f, const Domain& dom) {
    return eval_F_d_mixed(phi, phi, phi, gm, b, f, dom);
}

/// Full nonlinearity from a prebuilt table (solver fast path).
inline SpectralField eval_F_tabled(const std::vector<SpectralField>& table, const HistorySegment& phi,
                                   const GeneratingMeasure& gm, const BirthFunction& b, const Kernel& f,
                                   const Domain& dom) {
    SpectralField out = eval_F_c_tabled(table, phi, gm, dom);
    const SpectralField d = eval_F_d(phi, gm, b, f, dom);
    for (int j = 0; j < out.size(); ++j) out.coeffs[j] += d.coeffs[j];
    return out;
}

/// F(phi) = F_c(phi) + F_d(phi).
inline SpectralField eval_F(const HistorySegment& phi, const GeneratingMeasure& gm, const BirthFunction& b,
                            const Kernel& f, const Domain& dom) {
    return eval_F_tabled(build_conv_table(phi, b, f, dom), phi, gm, b, f, dom);
}

/// Closed-form Lipschitz constant of F_c:
/// L_Fc = M_f * |Omega| * (L_b * M_Vgc + M_b * |Omega|^{1/2} * L_Vgc).
/// Requires bounded b; the second term pays for moving the measure.
inline double lipschitz_constant_Fc(const GeneratingMeasure& gm, const BirthFunction& b, const Kernel& f,
                                    const DomainConfig& dom) {
    if (!b.bounded)
        throw std::logic_error("lipschitz_constant_Fc: requires a bounded birth function");
    const double area = dom.length;
    return f.bound() * area * (b.L_b * gm.M_Vgc + b.M_b * std::sqrt(area) * gm.L_Vgc);
}

/// Uniform bound on ||F(phi)||: M_b * M_f * |Omega|^{3/2} * M_Vg.
inline double norm_bound_F(const GeneratingMeasure& gm, const BirthFunction& b, const Kernel& f,
                           const DomainConfig& dom) {
    if (!b.bounded) throw std::logic_error("norm_bound_F: requires a bounded birth function");
    return b.M_b * f.bound() * std::pow(dom.length, 1.5) * gm.M_Vg;
}

/// Sum of |h_k(phi)| over the atoms (the discrete mass in the K bounds).
inline double jump_abs_sum(const GeneratingMeasure& gm, const HistorySegment& phi) {
    double s = 0.0;
    for (int k = 0; k < gm.discrete.size(); ++k) s += std::abs(gm.discrete.jumps[k](phi));
    return s;
}

}  // namespace sdde
