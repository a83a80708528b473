#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdde/common.hpp"

namespace sdde {

/// Spatial discretization parameters for the interval Omega = (0, length)
/// with homogeneous Dirichlet conditions.
struct DomainConfig {
    double length = kPi;  ///< |Omega|
    int n_modes = 16;     ///< spectral truncation N
    int n_grid = 64;      ///< physical quadrature points (>= 2*n_modes)
};

/// An L2(Omega) element stored by its coefficients against the orthonormal
/// sine basis e_j(x) = sqrt(2/length) * sin(j*pi*x/length), j = 1..N.
/// The L2 norm is the plain Euclidean norm of the coefficients (Parseval).
struct SpectralField {
    std::vector<double> coeffs;

    SpectralField() = default;
    explicit SpectralField(int n_modes) : coeffs(static_cast<std::size_t>(n_modes), 0.0) {}
    explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

    int size() const { return static_cast<int>(coeffs.size()); }

    double norm() const {
        double s = 0.0;
        for (double c : coeffs) s += c * c;
        return std::sqrt(s);
    }
};

inline SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    SpectralField r = a;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] += b.coeffs[i];
    return r;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    SpectralField r = a;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] -= b.coeffs[i];
    return r;
}

inline SpectralField operator*(double s, const SpectralField& a) {
    SpectralField r = a;
    for (double& c : r.coeffs) c *= s;
    return r;
}

/// y += a*x, in place.
inline void axpy(double a, const SpectralField& x, SpectralField& y) {
    for (std::size_t i = 0; i < y.coeffs.size(); ++i) y.coeffs[i] += a * x.coeffs[i];
}

/// (1-w)*a + w*b, coefficient-wise.
inline SpectralField lerp(const SpectralField& a, const SpectralField& b, double w) {
    SpectralField r = a;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i)
        r.coeffs[i] = (1.0 - w) * r.coeffs[i] + w * b.coeffs[i];
    return r;
}

/// Immutable spatial setting: grid, trapezoid weights, and the evaluation
/// matrix of the sine basis. Transforms are direct O(N * n_grid) products.
///
/// On the uniform grid including both endpoints, the interior nodes carry
/// the discrete sine-transform orthogonality, so quadratures of products of
/// basis functions with j, k <= n_grid - 2 are exact up to rounding. This
/// makes grid <-> coefficient round trips and Parseval identities hold to
/// machine precision for fields within the truncation.
class Domain {
public:
    explicit Domain(DomainConfig cfg) : cfg_(cfg) {
        if (cfg.length <= 0.0) throw std::invalid_argument("Domain: length must be positive");
        if (cfg.n_modes < 1) throw std::invalid_argument("Domain: n_modes must be >= 1");
        if (cfg.n_grid < std::max(2 * cfg.n_modes, cfg.n_modes + 2))
            throw std::invalid_argument("Domain: n_grid must be >= max(2*n_modes, n_modes+2)");
        const int n = cfg.n_grid;
        const double h = cfg.length / (n - 1);
        grid_.resize(n);
        weights_.resize(n);
        for (int i = 0; i < n; ++i) {
            grid_[i] = i * h;
            weights_[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
        }
        const double amp = std::sqrt(2.0 / cfg.length);
        basis_.resize(static_cast<std::size_t>(cfg.n_modes) * n);
        for (int j = 0; j < cfg.n_modes; ++j)
            for (int i = 0; i < n; ++i)
                basis_[static_cast<std::size_t>(j) * n + i] =
                    amp * std::sin((j + 1) * kPi * grid_[i] / cfg.length);
    }

    const DomainConfig& config() const { return cfg_; }
    double length() const { return cfg_.length; }
    int n_modes() const { return cfg_.n_modes; }
    int n_grid() const { return cfg_.n_grid; }
    double grid_spacing() const { return cfg_.length / (cfg_.n_grid - 1); }
    std::span<const double> grid() const { return grid_; }
    std::span<const double> quad_weights() const { return weights_; }

    /// e_j(x_i), j zero-based (mode j+1).
    double basis(int j, int i) const { return basis_[static_cast<std::size_t>(j) * cfg_.n_grid + i]; }

    std::vector<double> to_grid(const SpectralField& f) const {
        std::vector<double> g(cfg_.n_grid, 0.0);
        for (int j = 0; j < cfg_.n_modes; ++j) {
            const double c = f.coeffs[j];
            if (c == 0.0) continue;
            const double* row = &basis_[static_cast<std::size_t>(j) * cfg_.n_grid];
            for (int i = 0; i < cfg_.n_grid; ++i) g[i] += c * row[i];
        }
        return g;
    }

    /// L2 projection of tabulated grid values onto the truncated basis.
    SpectralField to_coeffs(std::span<const double> grid_values) const {
        SpectralField f(cfg_.n_modes);
        for (int j = 0; j < cfg_.n_modes; ++j) {
            const double* row = &basis_[static_cast<std::size_t>(j) * cfg_.n_grid];
            double s = 0.0;
            for (int i = 0; i < cfg_.n_grid; ++i) s += weights_[i] * grid_values[i] * row[i];
            f.coeffs[j] = s;
        }
        return f;
    }

    /// Trapezoid quadrature of tabulated values over Omega.
    double quadrature(std::span<const double> values) const {
        double s = 0.0;
        for (int i = 0; i < cfg_.n_grid; ++i) s += weights_[i] * values[i];
        return s;
    }

private:
    DomainConfig cfg_;
    std::vector<double> grid_;
    std::vector<double> weights_;
    std::vector<double> basis_;
};

/// Diagonalized -Laplacian with Dirichlet conditions plus the damping
/// coefficient d (d is carried here but applied by the solver, not by
/// semigroup_apply).
struct SpatialOperator {
    std::vector<double> eigenvalues;  ///< lambda_j = (j*pi/length)^2, increasing
    double damping = 0.0;             ///< d >= 0
    DomainConfig domain;

    static SpatialOperator dirichlet_laplacian(const DomainConfig& cfg, double damping) {
        if (damping < 0.0) throw std::invalid_argument("SpatialOperator: damping must be >= 0");
        SpatialOperator op;
        op.domain = cfg;
        op.damping = damping;
        op.eigenvalues.resize(cfg.n_modes);
        for (int j = 0; j < cfg.n_modes; ++j) {
            const double k = (j + 1) * kPi / cfg.length;
            op.eigenvalues[j] = k * k;
        }
        return op;
    }

    double lambda1() const { return eigenvalues.front(); }
};

/// Heat semigroup e^{-A t} acting coefficient-wise. Damping is NOT folded
/// in here; the solver absorbs d when configured to.
inline SpectralField semigroup_apply(double t, const SpectralField& v, const SpatialOperator& op) {
    if (t < 0.0) throw std::domain_error("semigroup_apply: t must be >= 0");
    SpectralField r = v;
    for (std::size_t j = 0; j < r.coeffs.size(); ++j) r.coeffs[j] *= std::exp(-op.eigenvalues[j] * t);
    return r;
}

/// Exponential-integrator weight (1 - e^{-z})/z, with a series branch below
/// z = 1e-6 to avoid cancellation.
inline double phi1(double z) {
    if (z < 0.0) throw std::domain_error("phi1: z must be >= 0");
    if (z < 1e-6) return 1.0 - 0.5 * z + z * z / 6.0;
    return -std::expm1(-z) / z;
}

/// ||A^delta v|| = sqrt(sum_j lambda_j^{2 delta} v_j^2), delta in [0, 1/2).
inline double fractional_norm(const SpectralField& v, double delta, const SpatialOperator& op) {
    if (delta < 0.0 || delta >= 0.5) throw std::domain_error("fractional_norm: delta must be in [0, 1/2)");
    double s = 0.0;
    for (std::size_t j = 0; j < v.coeffs.size(); ++j)
        s += std::pow(op.eigenvalues[j], 2.0 * delta) * v.coeffs[j] * v.coeffs[j];
    return std::sqrt(s);
}

/// Bounded measurable convolution kernel, tabulated at the grid offsets
/// x_i - y_k = m*h so that a trapezoid convolution is a plain discrete sum.
class Kernel {
public:
    template <class Fn>
    static Kernel from_function(Fn&& f, double bound, const Domain& dom) {
        Kernel k;
        k.bound_ = bound;
        k.h_ = dom.grid_spacing();
        const int n = dom.n_grid();
        k.offsets_.resize(2 * n - 1);
        for (int m = -(n - 1); m <= n - 1; ++m) {
            const double v = f(m * k.h_);
            if (std::abs(v) > bound * (1.0 + 1e-12))
                throw InvariantViolation("Kernel: tabulated value exceeds the declared bound");
            k.offsets_[m + n - 1] = v;
        }
        return k;
    }

    static Kernel constant(double value, const Domain& dom) {
        Kernel k = from_function([value](double) { return value; }, std::abs(value), dom);
        k.describe_ = [value](double) { return value; };
        return k;
    }

    static Kernel gaussian_bump(double amp, double width, const Domain& dom) {
        if (width <= 0.0) throw std::invalid_argument("Kernel: gaussian width must be positive");
        auto f = [amp, width](double x) { return amp * std::exp(-x * x / (2.0 * width * width)); };
        Kernel k = from_function(f, std::abs(amp), dom);
        k.describe_ = f;
        return k;
    }

    double bound() const { return bound_; }

    /// Kernel value at signed offset index m (= f(m*h)).
    double at_offset(int m) const { return offsets_[m + (static_cast<int>(offsets_.size()) - 1) / 2]; }

    /// Pointwise evaluation when the kernel came from a closed form
    /// (presets); used by refined-quadrature cross checks.
    double eval(double x) const {
        if (!describe_) throw std::logic_error("Kernel: no closed form attached");
        return describe_(x);
    }
    bool has_closed_form() const { return static_cast<bool>(describe_); }

    /// v(x_i) = int_Omega w(y) f(x_i - y) dy by trapezoid on the grid.
    std::vector<double> convolve(std::span<const double> w, const Domain& dom) const {
        const int n = dom.n_grid();
        std::span<const double> tau = dom.quad_weights();
        std::vector<double> v(n, 0.0);
        const int center = n - 1;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += tau[k] * w[k] * offsets_[i - k + center];
            v[i] = s;
        }
        return v;
    }

private:
    double bound_ = 0.0;
    double h_ = 0.0;
    std::vector<double> offsets_;
    std::function<double(double)> describe_;
};

/// Convolve grid values (b already applied pointwise) with the kernel and
/// project back to coefficients.
inline SpectralField kernel_convolve(std::span<const double> w_grid, const Kernel& f, const Domain& dom) {
    return dom.to_coeffs(f.convolve(w_grid, dom));
}

}  // namespace sdde
