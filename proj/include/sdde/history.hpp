#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sdde/spatial.hpp"

namespace sdde {

/// Discretized element of C([-r, 0]; L2(Omega)): one spectral frame per
/// node of a uniform grid over [-r, 0]. Frame 0 sits at theta = -r, the
/// last frame at theta = 0, spacing h_t = r/(n_steps - 1). The solver step
/// size must equal h_t so that shift_append advances the window exactly.
class HistorySegment {
public:
    HistorySegment() = default;

    HistorySegment(double r, int n_steps, std::vector<SpectralField> frames)
        : r_(r), frames_(std::move(frames)) {
        if (r <= 0.0) throw std::invalid_argument("HistorySegment: r must be positive");
        if (n_steps < 2) throw std::invalid_argument("HistorySegment: n_steps must be >= 2");
        if (static_cast<int>(frames_.size()) != n_steps)
            throw std::invalid_argument("HistorySegment: frames must have n_steps entries");
    }

    /// Constant-in-time segment.
    HistorySegment(double r, int n_steps, const SpectralField& v)
        : HistorySegment(r, n_steps, std::vector<SpectralField>(static_cast<std::size_t>(n_steps), v)) {}

    /// Sample fn(theta_i) at every grid node.
    template <class Fn>
    static HistorySegment sample(double r, int n_steps, Fn&& fn) {
        std::vector<SpectralField> frames;
        frames.reserve(n_steps);
        const double h = r / (n_steps - 1);
        for (int i = 0; i < n_steps; ++i) frames.push_back(fn(-r + i * h));
        return HistorySegment(r, n_steps, std::move(frames));
    }

    double r() const { return r_; }
    int n_steps() const { return static_cast<int>(frames_.size()); }
    double spacing() const { return r_ / (n_steps() - 1); }
    double theta(int i) const { return -r_ + i * spacing(); }
    const SpectralField& frame(int i) const { return frames_[i]; }
    SpectralField& frame(int i) { return frames_[i]; }
    const std::vector<SpectralField>& frames() const { return frames_; }
    const SpectralField& head() const { return frames_.back(); }  ///< theta = 0

    /// Piecewise-linear evaluation; exact frame copies at grid nodes
    /// (indices within 1e-9 of an integer snap, so grid-aligned arguments
    /// reproduce stored frames bit for bit).
    SpectralField eval_at(double theta) const {
        if (theta < -r_ - 1e-12 || theta > 1e-12)
            throw std::domain_error("HistorySegment::eval_at: theta outside [-r, 0]");
        const double pos = (theta + r_) / spacing();
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) <= 1e-9) {
            int i = static_cast<int>(nearest);
            i = std::max(0, std::min(n_steps() - 1, i));
            return frames_[i];
        }
        const int lo = static_cast<int>(std::floor(pos));
        const double w = pos - lo;
        return lerp(frames_[lo], frames_[lo + 1], w);
    }

    /// Discrete C-norm: max over grid frames of the L2 norm.
    double segment_norm() const {
        double m = 0.0;
        for (const auto& f : frames_) m = std::max(m, f.norm());
        return m;
    }

    /// Max over frames of the fractional-power norm.
    double segment_norm_delta(double delta, const SpatialOperator& op) const {
        double m = 0.0;
        for (const auto& f : frames_) m = std::max(m, fractional_norm(f, delta, op));
        return m;
    }

    /// Advance the window one step: drop the frame at -r, append new_frame
    /// at theta = 0. Pure frame moves, no arithmetic.
    HistorySegment shift_append(SpectralField new_frame) const {
        std::vector<SpectralField> shifted;
        shifted.reserve(frames_.size());
        for (std::size_t i = 1; i < frames_.size(); ++i) shifted.push_back(frames_[i]);
        shifted.push_back(std::move(new_frame));
        return HistorySegment(r_, n_steps(), std::move(shifted));
    }

private:
    double r_ = 1.0;
    std::vector<SpectralField> frames_;
};

/// C-norm distance between two segments on the same grid.
inline double segment_distance(const HistorySegment& a, const HistorySegment& b) {
    double m = 0.0;
    for (int i = 0; i < a.n_steps(); ++i) m = std::max(m, (a.frame(i) - b.frame(i)).norm());
    return m;
}

inline HistorySegment operator+(const HistorySegment& a, const HistorySegment& b) {
    std::vector<SpectralField> frames;
    frames.reserve(a.n_steps());
    for (int i = 0; i < a.n_steps(); ++i) frames.push_back(a.frame(i) + b.frame(i));
    return HistorySegment(a.r(), a.n_steps(), std::move(frames));
}

inline HistorySegment operator*(double s, const HistorySegment& a) {
    std::vector<SpectralField> frames;
    frames.reserve(a.n_steps());
    for (int i = 0; i < a.n_steps(); ++i) frames.push_back(s * a.frame(i));
    return HistorySegment(a.r(), a.n_steps(), std::move(frames));
}

/// The shifted flat extension used to chain solution steps: with
/// phibar(tau) = seg(tau) for tau <= 0 and phibar(tau) = seg(0) for
/// tau in (0, eta_ign), returns the segment theta -> phibar(s + theta).
/// Frames at theta <= -s come from seg (exact copies when s is a grid
/// multiple); frames at theta > -s are frozen at seg's head.
inline HistorySegment extend_flat(const HistorySegment& seg, double s, double eta_ign) {
    if (s < 0.0 || s >= eta_ign)
        throw std::domain_error("extend_flat: s must lie in [0, eta_ign)");
    std::vector<SpectralField> frames;
    frames.reserve(seg.n_steps());
    for (int i = 0; i < seg.n_steps(); ++i) {
        const double theta = seg.theta(i);
        if (theta <= -s + 1e-12 * seg.r())
            frames.push_back(seg.eval_at(s + theta));
        else
            frames.push_back(seg.head());
    }
    return HistorySegment(seg.r(), seg.n_steps(), std::move(frames));
}

}  // namespace sdde
