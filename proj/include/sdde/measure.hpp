#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdde/common.hpp"
#include "sdde/history.hpp"

namespace sdde {

/// Energy of the segment over the far window [-r, -eta_ign]: trapezoid of
/// the squared frame norms over grid nodes with theta_i <= -eta_ign. Reads
/// no frame newer than -eta_ign, so functionals built from it satisfy the
/// ignoring condition bit-exactly.
inline double far_window_energy(const HistorySegment& seg, double eta_ign) {
    const double h = seg.spacing();
    const double cut = -eta_ign + 1e-12 * (1.0 + seg.r());
    int last = -1;
    for (int i = 0; i < seg.n_steps(); ++i)
        if (seg.theta(i) <= cut) last = i;
    if (last < 1) return 0.0;
    double s = 0.0;
    for (int i = 0; i <= last; ++i) {
        const double w = (i == 0 || i == last) ? 0.5 * h : h;
        const double nrm = seg.frame(i).norm();
        s += w * nrm * nrm;
    }
    return s;
}

/// Trapezoid of the frame norms over the full window [-r, 0]. Continuous
/// and Lipschitz in the segment (constant r) but NOT ignoring: functionals
/// built from it exercise the fact that only the discrete part needs the
/// ignoring condition.
inline double full_window_mass(const HistorySegment& seg) {
    const double h = seg.spacing();
    double s = 0.0;
    for (int i = 0; i < seg.n_steps(); ++i) {
        const double w = (i == 0 || i == seg.n_steps() - 1) ? 0.5 * h : h;
        s += w * seg.frame(i).norm();
    }
    return s;
}

using SegmentFunctional = std::function<double(const HistorySegment&)>;

/// Finite list of state-dependent atoms: atom k sits at theta = -eta_k(phi)
/// with signed mass h_k(phi). Every lag must stay inside [eta_ign, r].
struct DiscretePart {
    std::vector<SegmentFunctional> lags;
    std::vector<SegmentFunctional> jumps;
    double eta_ign = 0.0;

    int size() const { return static_cast<int>(lags.size()); }
    bool empty() const { return lags.empty(); }

    /// Built-in family: eta_k(phi) = eta_ign + (r - eta_ign) *
    /// logistic(a_k + 0.5*kappa*J(phi)) and h_k(phi) = 2^{-k} *
    /// tanh(1 + kappa*J(phi)) with J the far-window energy. The offsets
    /// a_k spread the atoms over the window; kappa = 0 freezes the state
    /// dependence entirely.
    static DiscretePart logistic_family(int K, double eta_ign, double r, double kappa) {
        if (K < 0) throw std::invalid_argument("DiscretePart: K must be >= 0");
        if (K > 0 && (eta_ign <= 0.0 || eta_ign >= r))
            throw std::invalid_argument("DiscretePart: eta_ign must lie in (0, r)");
        DiscretePart d;
        d.eta_ign = eta_ign;
        double ck = 1.0;
        for (int k = 1; k <= K; ++k) {
            ck *= 0.5;
            const double ak = (K == 1) ? 0.0 : -1.0 + 2.0 * (k - 1) / (K - 1.0);
            d.lags.push_back([eta_ign, r, kappa, ak](const HistorySegment& phi) {
                return eta_ign + (r - eta_ign) * logistic(ak + 0.5 * kappa * far_window_energy(phi, eta_ign));
            });
            d.jumps.push_back([eta_ign, kappa, ck](const HistorySegment& phi) {
                return ck * std::tanh(1.0 + kappa * far_window_energy(phi, eta_ign));
            });
        }
        return d;
    }
};

/// Absolutely continuous part g_ac(theta, phi) = (1 + beta*s_ac(phi)) *
/// int_{-r}^{theta} rho0. The base density is tabulated on its own uniform
/// grid over [-r, 0], finer than the segment grid, so scalar quadratures
/// against it resolve rho0 rather than the history resolution.
struct AbsContPart {
    std::vector<double> rho;  ///< rho0 at n_rho uniform nodes on [-r, 0]
    double r = 1.0;
    double beta = 0.0;
    SegmentFunctional s_ac;
    double s_max = 0.0;  ///< bound on |s_ac|
    double lip_s = 0.0;  ///< Lipschitz constant of s_ac in the C norm

    bool empty() const { return rho.empty(); }
    double spacing() const { return r / (static_cast<int>(rho.size()) - 1); }

    /// Trapezoid mass of the base density (the R0 in every derived constant).
    double mass() const {
        if (empty()) return 0.0;
        const double h = spacing();
        double s = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const double w = (i == 0 || i + 1 == rho.size()) ? 0.5 * h : h;
            s += w * rho[i];
        }
        return s;
    }

    /// Linear interpolation of the density table (coarse-grid reads in the
    /// field-valued integrand).
    double density_at(double theta) const {
        if (empty()) return 0.0;
        const double pos = (theta + r) / spacing();
        const int n = static_cast<int>(rho.size());
        if (pos <= 0.0) return rho.front();
        if (pos >= n - 1) return rho.back();
        const int lo = static_cast<int>(pos);
        const double w = pos - lo;
        return (1.0 - w) * rho[lo] + w * rho[lo + 1];
    }
};

/// Singular part g_s(theta, phi) = gamma(phi) * c((theta + r)/r) with c the
/// ternary Cantor function. Integration approximates the Cantor measure by
/// the 2^depth midpoint atoms of the depth-level covering intervals, mass
/// 2^{-depth} each; the error for an integrand chi is bounded by chi's
/// modulus of continuity at r*3^{-depth}.
struct SingularPart {
    SegmentFunctional gamma;
    double gamma_max = 0.0;
    double lip_gamma = 0.0;
    int depth = 12;
    double r = 1.0;
    std::vector<double> atoms;  ///< covering-interval midpoints in [0, 1], increasing

    bool empty() const { return atoms.empty(); }

    static std::vector<double> cantor_midpoints(int depth) {
        if (depth < 1 || depth > 20) throw std::invalid_argument("SingularPart: depth must be in [1, 20]");
        const std::size_t count = std::size_t{1} << depth;
        double width = 1.0;
        for (int i = 0; i < depth; ++i) width /= 3.0;
        std::vector<double> mids(count);
        for (std::size_t b = 0; b < count; ++b) {
            double left = 0.0, w = 1.0;
            for (int i = 1; i <= depth; ++i) {
                w /= 3.0;
                if ((b >> (depth - i)) & 1u) left += 2.0 * w;
            }
            mids[b] = left + 0.5 * width;
        }
        return mids;
    }
};

/// The generating function g(theta, phi) of the delay measure, split into
/// discrete + absolutely continuous + singular parts, together with the
/// variation constants the estimates quote: M_Vg bounds the total variation
/// uniformly, M_Vgc bounds the variation of the continuous part g_c, and
/// L_Vgc is the Lipschitz constant of phi -> g_c(., phi) in variation norm.
struct GeneratingMeasure {
    DiscretePart discrete;
    AbsContPart ac;
    SingularPart singular;
    double r = 1.0;

    double M_Vg = 0.0;
    double M_Vgc = 0.0;
    double L_Vgc = 0.0;
    double discrete_sum_bound = 0.0;  ///< sup over phi of sum_k |h_k(phi)|
    double series_tail_bound = 0.0;   ///< mass dropped by truncating at K atoms

    double eta_ign() const { return discrete.eta_ign; }
};

/// Parameters of the built-in three-part family. kappa scales every state
/// dependence: kappa = 0 gives a fully state-independent measure (useful
/// for constant-load and exactness tests).
struct MeasureFamilyParams {
    int n_atoms = 16;
    double eta_ign = 0.2;
    double kappa = 1.0;
    double ac_mass = 0.5;
    double beta = 0.5;
    int n_rho = 20001;
    double gamma_base = 0.2;
    double gamma_scale = 0.2;
    int cantor_depth = 12;
};

/// Base density shape: rho0(theta) = (ac_mass/r)*(1 - cos(2*pi*theta/r)),
/// vanishing at both window ends, mass exactly ac_mass. The closed-form
/// antiderivative backs the quadrature oracles.
inline double default_density(double theta, double r, double ac_mass) {
    return (ac_mass / r) * (1.0 - std::cos(2.0 * kPi * theta / r));
}

inline double default_density_cumulative(double theta, double r, double ac_mass) {
    return (ac_mass / r) * ((theta + r) - (r / (2.0 * kPi)) * std::sin(2.0 * kPi * theta / r));
}

inline GeneratingMeasure make_default_measure(const MeasureFamilyParams& p, double delay_r) {
    if (delay_r <= 0.0) throw std::invalid_argument("make_default_measure: r must be positive");
    if (p.kappa < 0.0) throw std::invalid_argument("make_default_measure: kappa must be >= 0");
    if (p.ac_mass < 0.0 || p.beta < 0.0 || p.gamma_base < 0.0 || p.gamma_scale < 0.0)
        throw std::invalid_argument("make_default_measure: masses and scales must be >= 0");

    GeneratingMeasure gm;
    gm.r = delay_r;
    gm.discrete = DiscretePart::logistic_family(p.n_atoms, p.eta_ign, delay_r, p.kappa);

    const double kappa = p.kappa;
    const double r = delay_r;
    if (p.ac_mass > 0.0) {
        if (p.n_rho < 2) throw std::invalid_argument("make_default_measure: n_rho must be >= 2");
        gm.ac.r = r;
        gm.ac.beta = p.beta;
        gm.ac.rho.resize(p.n_rho);
        for (int i = 0; i < p.n_rho; ++i) {
            const double theta = -r + i * (r / (p.n_rho - 1));
            gm.ac.rho[i] = default_density(theta, r, p.ac_mass);
        }
        gm.ac.s_ac = [kappa](const HistorySegment& phi) { return std::tanh(kappa * full_window_mass(phi)); };
        gm.ac.s_max = kappa > 0.0 ? 1.0 : 0.0;
        gm.ac.lip_s = kappa * r;
    }

    if (p.gamma_base > 0.0 || p.gamma_scale > 0.0) {
        gm.singular.r = r;
        gm.singular.depth = p.cantor_depth;
        gm.singular.atoms = SingularPart::cantor_midpoints(p.cantor_depth);
        const double gb = p.gamma_base, gs = p.gamma_scale;
        gm.singular.gamma = [gb, gs, kappa](const HistorySegment& phi) {
            return gb + gs * std::tanh(kappa * full_window_mass(phi));
        };
        gm.singular.gamma_max = gb + gs * (kappa > 0.0 ? 1.0 : 0.0);
        gm.singular.lip_gamma = gs * kappa * r;
    }

    const double r0 = gm.ac.mass();
    const double h_sup = kappa > 0.0 ? 1.0 : std::tanh(1.0);
    const double sum_ck = 1.0 - std::pow(0.5, p.n_atoms);
    gm.discrete_sum_bound = sum_ck * h_sup;
    gm.series_tail_bound = std::pow(0.5, p.n_atoms) * h_sup;
    gm.M_Vgc = r0 * (1.0 + gm.ac.beta * gm.ac.s_max) + gm.singular.gamma_max;
    gm.L_Vgc = r0 * gm.ac.beta * gm.ac.lip_s + gm.singular.lip_gamma;
    gm.M_Vg = gm.discrete_sum_bound + gm.M_Vgc;
    return gm;
}

/// Purely discrete measure from explicit atom functionals; the caller
/// supplies the uniform bound on the jump sum.
inline GeneratingMeasure make_discrete_measure(DiscretePart d, double delay_r, double sum_bound) {
    GeneratingMeasure gm;
    gm.r = delay_r;
    gm.discrete = std::move(d);
    gm.discrete_sum_bound = sum_bound;
    gm.M_Vg = sum_bound;
    return gm;
}

/// Copy with the discrete atoms removed (the g_c-only configuration used
/// by the continuous-dependence bound).
inline GeneratingMeasure strip_discrete(const GeneratingMeasure& gm) {
    GeneratingMeasure out = gm;
    out.discrete = DiscretePart{};
    out.discrete.eta_ign = gm.discrete.eta_ign;
    out.discrete_sum_bound = 0.0;
    out.series_tail_bound = 0.0;
    out.M_Vg = gm.M_Vgc;
    return out;
}

namespace detail {
inline double checked_lag(const GeneratingMeasure& gm, int k, const HistorySegment& phi) {
    const double eta = gm.discrete.lags[k](phi);
    const double tol = 1e-12 * (1.0 + gm.r);
    if (eta < gm.discrete.eta_ign - tol || eta > gm.r + tol)
        throw InvariantViolation("discrete lag left [eta_ign, r]");
    return eta;
}
}  // namespace detail

/// Sum over atoms chi(-eta_k(phi)) * h_k(phi).
template <class Chi>
double discrete_integrate(Chi&& chi, const GeneratingMeasure& gm, const HistorySegment& phi) {
    double s = 0.0;
    for (int k = 0; k < gm.discrete.size(); ++k)
        s += chi(-detail::checked_lag(gm, k, phi)) * gm.discrete.jumps[k](phi);
    return s;
}

/// Trapezoid of chi * rho0 on the density tabulation grid, scaled by the
/// state factor 1 + beta*s_ac(phi).
template <class Chi>
double ac_integrate(Chi&& chi, const GeneratingMeasure& gm, const HistorySegment& phi) {
    if (gm.ac.empty()) return 0.0;
    const double factor = 1.0 + gm.ac.beta * (gm.ac.s_ac ? gm.ac.s_ac(phi) : 0.0);
    if (factor < 0.0) throw InvariantViolation("AC state factor went negative");
    const int n = static_cast<int>(gm.ac.rho.size());
    const double h = gm.ac.spacing();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        s += w * chi(-gm.r + i * h) * gm.ac.rho[i];
    }
    return factor * s;
}

/// gamma(phi) times the mean of chi over the depth-level Cantor midpoints
/// mapped onto [-r, 0].
template <class Chi>
double singular_integrate(Chi&& chi, const GeneratingMeasure& gm, const HistorySegment& phi) {
    if (gm.singular.empty()) return 0.0;
    const double g = gm.singular.gamma(phi);
    if (g < 0.0) throw InvariantViolation("singular amplitude went negative");
    double s = 0.0;
    for (double x : gm.singular.atoms) s += chi(-gm.r + gm.r * x);
    return g * s / static_cast<double>(gm.singular.atoms.size());
}

/// int_{-r}^{0} chi(theta) dg(theta, phi), all three parts.
template <class Chi>
double stieltjes_integrate(Chi&& chi, const GeneratingMeasure& gm, const HistorySegment& phi) {
    return discrete_integrate(chi, gm, phi) + ac_integrate(chi, gm, phi) + singular_integrate(chi, gm, phi);
}

/// V_{-r}^{0} g(., phi); must respect the uniform bound M_Vg.
inline double total_variation(const GeneratingMeasure& gm, const HistorySegment& phi) {
    double v = 0.0;
    for (int k = 0; k < gm.discrete.size(); ++k) v += std::abs(gm.discrete.jumps[k](phi));
    if (!gm.ac.empty()) {
        const double factor = 1.0 + gm.ac.beta * (gm.ac.s_ac ? gm.ac.s_ac(phi) : 0.0);
        if (factor < 0.0) throw InvariantViolation("AC state factor went negative");
        v += gm.ac.mass() * factor;
    }
    if (!gm.singular.empty()) v += gm.singular.gamma(phi);
    if (v > gm.M_Vg * (1.0 + 1e-9) + 1e-12)
        throw InvariantViolation("total variation exceeded the uniform bound M_Vg");
    return v;
}

/// V_{-r}^{0} [g_c(., phi) - g_c(., psi)] for the built-in family shape;
/// must respect the Lipschitz bound L_Vgc * ||phi - psi||_C.
inline double variation_distance_c(const GeneratingMeasure& gm, const HistorySegment& phi,
                                   const HistorySegment& psi) {
    double v = 0.0;
    if (!gm.ac.empty() && gm.ac.s_ac)
        v += gm.ac.mass() * gm.ac.beta * std::abs(gm.ac.s_ac(phi) - gm.ac.s_ac(psi));
    if (!gm.singular.empty()) v += std::abs(gm.singular.gamma(phi) - gm.singular.gamma(psi));
    const double bound = gm.L_Vgc * segment_distance(phi, psi);
    if (v > bound * (1.0 + 1e-9) + 1e-12)
        throw InvariantViolation("variation distance of g_c exceeded the Lipschitz bound");
    return v;
}

/// Pointwise value of the discrete generating function, left value at
/// jumps: g_d(theta, phi) = sum_k h_k(phi) over atoms with -eta_k < theta.
/// Only the pointwise diagnostics use this; integrals never touch the
/// convention.
inline double discrete_g_value(double theta, const GeneratingMeasure& gm, const HistorySegment& phi) {
    double s = 0.0;
    for (int k = 0; k < gm.discrete.size(); ++k)
        if (theta > -detail::checked_lag(gm, k, phi)) s += gm.discrete.jumps[k](phi);
    return s;
}

/// Pointwise g_ac(theta, phi) via the closed-form cumulative of the table
/// (piecewise-linear density integrated exactly).
inline double ac_g_value(double theta, const GeneratingMeasure& gm, const HistorySegment& phi) {
    if (gm.ac.empty()) return 0.0;
    const double factor = 1.0 + gm.ac.beta * (gm.ac.s_ac ? gm.ac.s_ac(phi) : 0.0);
    const double h = gm.ac.spacing();
    const int n = static_cast<int>(gm.ac.rho.size());
    const double pos = std::min(std::max((theta + gm.r) / h, 0.0), static_cast<double>(n - 1));
    const int full = static_cast<int>(pos);
    double cum = 0.0;
    for (int i = 0; i < full; ++i) cum += 0.5 * h * (gm.ac.rho[i] + gm.ac.rho[i + 1]);
    if (full < n - 1) {
        const double w = pos - full;
        const double mid = (1.0 - w) * gm.ac.rho[full] + w * gm.ac.rho[full + 1];
        cum += 0.5 * (w * h) * (gm.ac.rho[full] + mid);
    }
    return factor * cum;
}

/// Pointwise g_s(theta, phi) = gamma(phi) * cantor((theta + r)/r).
inline double singular_g_value(double theta, const GeneratingMeasure& gm, const HistorySegment& phi) {
    if (gm.singular.empty()) return 0.0;
    return gm.singular.gamma(phi) * cantor_function((theta + gm.r) / gm.r);
}

}  // namespace sdde
