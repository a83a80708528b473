#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "sdde/problem.hpp"

// Shared fixtures and independent reference computations for the test
// suites. Everything here recomputes results from first principles so a
// library bug cannot hide behind its own quadratures.
namespace testsupport {

using namespace sdde;

// Complete config with every required field present; tests tweak copies.
inline RunConfig base_config() {
    RunConfig c;
    c.r = 1.0;
    c.dt = 0.05;
    c.t_end = 1.0;
    c.damping = 0.5;
    c.birth_preset = "nicholson";
    c.birth_param = 1.0;
    return c;
}

inline RunConfig zero_birth_config() {
    RunConfig c = base_config();
    c.birth_preset = "zero";
    c.birth_param.reset();
    return c;
}

// Segment with independent per-frame coefficients, decaying in mode index.
// Rougher than the smooth generator in the library, which matters for the
// state-functional stress tests.
inline HistorySegment rough_segment(const Domain& dom, double r, int n_steps, Rng& rng,
                                    double amplitude) {
    std::vector<SpectralField> frames;
    frames.reserve(static_cast<std::size_t>(n_steps));
    for (int i = 0; i < n_steps; ++i) {
        SpectralField v(dom.n_modes());
        for (int j = 0; j < dom.n_modes(); ++j)
            v.coeffs[static_cast<std::size_t>(j)] = amplitude * rng.normal() / (1.0 + j);
        frames.push_back(std::move(v));
    }
    return HistorySegment(r, n_steps, std::move(frames));
}

// Copy of `base` whose frames strictly inside (-eta_ign, 0] are replaced by
// fresh noise; the far window [-r, -eta_ign] stays bit-identical to `base`.
inline HistorySegment near_window_variant(const HistorySegment& base, double eta_ign, Rng& rng,
                                          double amplitude) {
    const double cut = -eta_ign + 1e-12 * (1.0 + base.r());
    std::vector<SpectralField> frames;
    frames.reserve(static_cast<std::size_t>(base.n_steps()));
    for (int i = 0; i < base.n_steps(); ++i) {
        if (base.theta(i) <= cut) {
            frames.push_back(base.frame(i));
        } else {
            SpectralField v(base.frame(i).size());
            for (std::size_t j = 0; j < v.size(); ++j)
                v.coeffs[j] = amplitude * rng.normal() / (1.0 + static_cast<double>(j));
            frames.push_back(std::move(v));
        }
    }
    return HistorySegment(base.r(), base.n_steps(), std::move(frames));
}

// Riemann-Stieltjes reference for scalar integrands against the built-in
// measure family. Atoms are summed exactly through the stored functionals;
// the absolutely continuous part uses the closed-form cumulative of the
// default density; the singular part uses the Cantor function directly.
// Both state-independent node tables are precomputed once, so a sweep over
// many (chi, phi) pairs only pays for the chi evaluations.
class StieltjesReference {
public:
    StieltjesReference(int n_cells, double r, double ac_mass)
        : n_(n_cells), r_(r), ac_cum_(static_cast<std::size_t>(n_cells) + 1),
          cantor_(static_cast<std::size_t>(n_cells) + 1) {
        for (int i = 0; i <= n_cells; ++i) {
            const double x = static_cast<double>(i) / n_cells;
            ac_cum_[static_cast<std::size_t>(i)] = default_density_cumulative(-r + r * x, r, ac_mass);
            cantor_[static_cast<std::size_t>(i)] = cantor_function(x);
        }
    }

    int cells() const { return n_; }
    double cell_mid(int i) const { return -r_ + (i + 0.5) * r_ / n_; }

    // continuous-part increment over cell i, given the two state factors
    double increment(int i, double ac_factor, double gamma) const {
        const std::size_t a = static_cast<std::size_t>(i);
        return ac_factor * (ac_cum_[a + 1] - ac_cum_[a]) + gamma * (cantor_[a + 1] - cantor_[a]);
    }

    double integrate(const std::function<double(double)>& chi, const GeneratingMeasure& gm,
                     const HistorySegment& phi) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < gm.discrete.lags.size(); ++k) {
            const double hk = gm.discrete.jumps[k](phi);
            if (hk == 0.0) continue;
            acc += hk * chi(-gm.discrete.lags[k](phi));
        }
        const double factor = gm.ac.empty() ? 0.0 : (1.0 + gm.ac.beta * gm.ac.s_ac(phi));
        const double gamma = gm.singular.empty() ? 0.0 : gm.singular.gamma(phi);
        for (int i = 0; i < n_; ++i) {
            const double dg = increment(i, factor, gamma);
            if (dg != 0.0) acc += chi(cell_mid(i)) * dg;
        }
        return acc;
    }

private:
    int n_;
    double r_;
    std::vector<double> ac_cum_;
    std::vector<double> cantor_;
};

// Dense-grid reference for the full delay term. The inner convolution and
// the projection onto each mode are fused by exchanging the integration
// order: F_j = int_Omega b(u(theta, y)) q_j(y) dy with
// q_j(y) = int_Omega f(x - y) e_j(x) dx, everything on a grid refined by
// `refine` relative to the library grid. The theta integral is the same
// Riemann-Stieltjes sum as StieltjesReference, with atoms exact.
class DenseFieldReference {
public:
    DenseFieldReference(const Domain& dom, const std::function<double(double)>& kernel, int refine,
                        int n_cells, double r, double ac_mass)
        : nodes_(n_cells, r, ac_mass) {
        const int n_modes = dom.n_modes();
        const double length = dom.length();
        n_dense_ = refine * (dom.n_grid() - 1) + 1;
        hx_ = length / (n_dense_ - 1);
        basis_.resize(static_cast<std::size_t>(n_modes) * n_dense_);
        q_.resize(static_cast<std::size_t>(n_modes) * n_dense_);
        const double scale = std::sqrt(2.0 / length);
        for (int j = 0; j < n_modes; ++j)
            for (int i = 0; i < n_dense_; ++i)
                basis_[static_cast<std::size_t>(j) * n_dense_ + i] =
                    scale * std::sin((j + 1) * kPi * (i * hx_) / length);
        for (int j = 0; j < n_modes; ++j) {
            for (int k = 0; k < n_dense_; ++k) {
                double s = 0.0;
                for (int i = 0; i < n_dense_; ++i) {
                    const double w = (i == 0 || i == n_dense_ - 1) ? 0.5 * hx_ : hx_;
                    s += w * kernel(i * hx_ - k * hx_) * basis_[static_cast<std::size_t>(j) * n_dense_ + i];
                }
                q_[static_cast<std::size_t>(j) * n_dense_ + k] = s;
            }
        }
    }

    // chi_j(theta) for all modes at once: project b(u(theta, .)) onto q_j.
    std::vector<double> field_at(const HistorySegment& phi, const BirthFunction& b,
                                 double theta) const {
        const SpectralField u = phi.eval_at(theta);
        const int n_modes = static_cast<int>(u.size());
        std::vector<double> out(static_cast<std::size_t>(n_modes), 0.0);
        for (int k = 0; k < n_dense_; ++k) {
            double uy = 0.0;
            for (int j = 0; j < n_modes; ++j)
                uy += u.coeffs[static_cast<std::size_t>(j)] * basis_[static_cast<std::size_t>(j) * n_dense_ + k];
            const double w = (k == 0 || k == n_dense_ - 1) ? 0.5 * hx_ : hx_;
            const double bw = w * b.map(uy);
            if (bw == 0.0) continue;
            for (int j = 0; j < n_modes; ++j)
                out[static_cast<std::size_t>(j)] += bw * q_[static_cast<std::size_t>(j) * n_dense_ + k];
        }
        return out;
    }

    SpectralField eval_F(const HistorySegment& phi, const GeneratingMeasure& gm,
                         const BirthFunction& b) const {
        const int n_modes = static_cast<int>(phi.frame(0).size());
        SpectralField acc(n_modes);
        auto axpy = [&](double c, const std::vector<double>& v) {
            for (int j = 0; j < n_modes; ++j)
                acc.coeffs[static_cast<std::size_t>(j)] += c * v[static_cast<std::size_t>(j)];
        };
        for (std::size_t k = 0; k < gm.discrete.lags.size(); ++k) {
            const double hk = gm.discrete.jumps[k](phi);
            if (hk == 0.0) continue;
            axpy(hk, field_at(phi, b, -gm.discrete.lags[k](phi)));
        }
        const double factor = gm.ac.empty() ? 0.0 : (1.0 + gm.ac.beta * gm.ac.s_ac(phi));
        const double gamma = gm.singular.empty() ? 0.0 : gm.singular.gamma(phi);
        for (int i = 0; i < nodes_.cells(); ++i) {
            const double dg = nodes_.increment(i, factor, gamma);
            if (dg != 0.0) axpy(dg, field_at(phi, b, nodes_.cell_mid(i)));
        }
        return acc;
    }

private:
    StieltjesReference nodes_;
    int n_dense_ = 0;
    double hx_ = 0.0;
    std::vector<double> basis_;
    std::vector<double> q_;
};

}  // namespace testsupport
