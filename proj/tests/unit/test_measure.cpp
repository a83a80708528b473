#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sdde/measure.hpp"

#include "../support/helpers.hpp"

using namespace sdde;
using namespace testsupport;
using Catch::Approx;

namespace {

const Domain& small_domain() {
    static Domain dom(DomainConfig{kPi, 8, 32});
    return dom;
}

HistorySegment random_segment(Rng& rng, double amplitude = 1.0, int n_steps = 21) {
    return rough_segment(small_domain(), 1.0, n_steps, rng, amplitude);
}

GeneratingMeasure default_gm(double kappa = 1.0) {
    MeasureFamilyParams p;
    p.kappa = kappa;
    return make_default_measure(p, 1.0);
}

GeneratingMeasure singular_only(int depth, double gamma) {
    MeasureFamilyParams p;
    p.n_atoms = 0;
    p.ac_mass = 0.0;
    p.kappa = 0.0;
    p.gamma_base = gamma;
    p.gamma_scale = 0.0;
    p.cantor_depth = depth;
    return make_default_measure(p, 1.0);
}

}  // namespace

TEST_CASE("single constant atom integrates chi at its lag", "[measure]") {
    DiscretePart d;
    d.eta_ign = 0.5;
    d.lags.push_back([](const HistorySegment&) { return 0.5; });
    d.jumps.push_back([](const HistorySegment&) { return 3.0; });
    const GeneratingMeasure gm = make_discrete_measure(std::move(d), 1.0, 3.0);
    Rng rng(1);
    const HistorySegment phi = random_segment(rng);
    const double val = discrete_integrate([](double t) { return t; }, gm, phi);
    CHECK(val == Approx(3.0 * -0.5).epsilon(1e-15));
    CHECK(total_variation(gm, phi) == Approx(3.0).epsilon(1e-15));
}

TEST_CASE("logistic atom family matches a direct resummation", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const HistorySegment phi = random_segment(rng, rng.uniform(0.1, 3.0));
        auto chi = [](double t) { return t * t; };
        double byhand = 0.0;
        for (int k = 0; k < gm.discrete.size(); ++k) {
            const double eta = gm.discrete.lags[k](phi);
            byhand += chi(-eta) * gm.discrete.jumps[k](phi);
        }
        CHECK(discrete_integrate(chi, gm, phi) == Approx(byhand).margin(1e-14));
    }
}

TEST_CASE("discrete lags leaving the admissible window are rejected", "[measure]") {
    DiscretePart d;
    d.eta_ign = 0.2;
    d.lags.push_back([](const HistorySegment&) { return 1.4; });
    d.jumps.push_back([](const HistorySegment&) { return 1.0; });
    const GeneratingMeasure gm = make_discrete_measure(std::move(d), 1.0, 1.0);
    Rng rng(3);
    const HistorySegment phi = random_segment(rng);
    CHECK_THROWS_AS(discrete_integrate([](double) { return 1.0; }, gm, phi), InvariantViolation);

    DiscretePart d2;
    d2.eta_ign = 0.2;
    d2.lags.push_back([](const HistorySegment&) { return 0.1; });
    d2.jumps.push_back([](const HistorySegment&) { return 1.0; });
    const GeneratingMeasure gm2 = make_discrete_measure(std::move(d2), 1.0, 1.0);
    CHECK_THROWS_AS(discrete_integrate([](double) { return 1.0; }, gm2, phi), InvariantViolation);
}

TEST_CASE("uniform density integrates constants and linear functions exactly", "[measure]") {
    GeneratingMeasure gm;
    gm.r = 1.0;
    gm.ac.r = 1.0;
    gm.ac.beta = 0.0;
    gm.ac.rho.assign(2001, 1.0);
    gm.M_Vg = gm.M_Vgc = 1.0;
    Rng rng(4);
    const HistorySegment phi = random_segment(rng);
    CHECK(ac_integrate([](double) { return 1.0; }, gm, phi) == Approx(1.0).margin(1e-12));
    CHECK(ac_integrate([](double t) { return t; }, gm, phi) == Approx(-0.5).margin(1e-12));
}

TEST_CASE("default density mass and cumulative agree with the closed form", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    CHECK(gm.ac.mass() == Approx(0.5).epsilon(1e-12));
    Rng rng(5);
    const HistorySegment phi = random_segment(rng);
    const double factor = 1.0 + gm.ac.beta * gm.ac.s_ac(phi);
    CHECK(ac_integrate([](double) { return 1.0; }, gm, phi) == Approx(factor * 0.5).epsilon(1e-10));
    for (double theta : {-0.9, -0.62, -0.31, -0.05, 0.0})
        CHECK(ac_g_value(theta, gm, phi) ==
              Approx(factor * default_density_cumulative(theta, 1.0, 0.5)).margin(1e-9));
}

TEST_CASE("cantor atoms integrate constants, linear, and quadratic moments", "[measure]") {
    Rng rng(6);
    const HistorySegment phi = random_segment(rng);

    const GeneratingMeasure gm = singular_only(12, 1.0);
    CHECK(singular_integrate([](double) { return 1.0; }, gm, phi) == Approx(1.0).epsilon(1e-14));
    // the midpoint set is symmetric under x -> 1 - x
    CHECK(singular_integrate([](double t) { return t + 1.0; }, gm, phi) == Approx(0.5).margin(1e-12));
    // self-similarity fixes int x^2 dc = 3/8
    CHECK(singular_integrate([](double t) { return (t + 1.0) * (t + 1.0); }, gm, phi) ==
          Approx(3.0 / 8.0).margin(1e-3));

    const GeneratingMeasure scaled = singular_only(12, 0.7);
    CHECK(singular_integrate([](double) { return 1.0; }, scaled, phi) == Approx(0.7).epsilon(1e-14));
}

TEST_CASE("refining the cantor atoms moves the value within the chi modulus", "[measure]") {
    Rng rng(7);
    const HistorySegment phi = random_segment(rng);
    auto chi = [](double t) { return std::sin(2.0 * t); };  // omega(d) = 2 d
    double prev = singular_integrate(chi, singular_only(4, 1.0), phi);
    for (int m = 5; m <= 10; ++m) {
        const double cur = singular_integrate(chi, singular_only(m, 1.0), phi);
        CHECK(std::abs(cur - prev) <= 2.0 * std::pow(3.0, -(m - 1)));
        prev = cur;
    }
}

TEST_CASE("full integral equals the generating-function increment for chi = 1", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const HistorySegment phi = random_segment(rng, rng.uniform(0.2, 2.0));
        const double mass = stieltjes_integrate([](double) { return 1.0; }, gm, phi);
        const double g0 = discrete_g_value(0.0, gm, phi) + ac_g_value(0.0, gm, phi) +
                          singular_g_value(0.0, gm, phi);
        const double gm1 = discrete_g_value(-1.0, gm, phi) + ac_g_value(-1.0, gm, phi) +
                           singular_g_value(-1.0, gm, phi);
        CHECK(gm1 == 0.0);
        CHECK(mass == Approx(g0).margin(1e-10));
        CHECK(mass == Approx(total_variation(gm, phi)).margin(1e-10));
    }
}

TEST_CASE("stieltjes integral is linear in the integrand", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(9);
    const HistorySegment phi = random_segment(rng);
    auto c1 = [](double t) { return std::sin(1.3 * t + 0.2); };
    auto c2 = [](double t) { return t * t - 0.4; };
    const double a = 1.9, b = -0.7;
    const double lhs = stieltjes_integrate([&](double t) { return a * c1(t) + b * c2(t); }, gm, phi);
    const double rhs = a * stieltjes_integrate(c1, gm, phi) + b * stieltjes_integrate(c2, gm, phi);
    CHECK(lhs == Approx(rhs).margin(1e-12));
}

TEST_CASE("library quadratures track a fine Riemann-Stieltjes partition", "[measure]") {
    MeasureFamilyParams p;
    p.cantor_depth = 14;
    const GeneratingMeasure gm = make_default_measure(p, 1.0);
    const StieltjesReference ref(1000000, 1.0, p.ac_mass);
    Rng rng(10);
    for (int trial = 0; trial < 3; ++trial) {
        const HistorySegment phi = random_segment(rng, rng.uniform(0.3, 2.0));
        auto chi = [](double t) { return std::cos(1.7 * t + 0.3); };
        const double lib = stieltjes_integrate(chi, gm, phi);
        const double oracle = ref.integrate(chi, gm, phi);
        CHECK(lib == Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("total variation matches part-wise sums and respects its bound", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const HistorySegment phi = random_segment(rng, rng.uniform(0.0, 10.0));
        double byhand = 0.0;
        for (int k = 0; k < gm.discrete.size(); ++k) byhand += std::abs(gm.discrete.jumps[k](phi));
        byhand += gm.ac.mass() * (1.0 + gm.ac.beta * gm.ac.s_ac(phi));
        byhand += gm.singular.gamma(phi);
        const double v = total_variation(gm, phi);
        CHECK(v == Approx(byhand).epsilon(1e-13));
        CHECK(v <= gm.M_Vg * (1.0 + 1e-9));
    }
}

TEST_CASE("uniform variation bound holds across many random segments", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(12);
    for (int trial = 0; trial < 10000; ++trial) {
        const HistorySegment phi = random_segment(rng, rng.uniform(0.0, 10.0), 11);
        CHECK_NOTHROW(total_variation(gm, phi));
    }
}

TEST_CASE("variation distance of the continuous part is Lipschitz in the segment", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(13);
    const HistorySegment phi = random_segment(rng);
    CHECK(variation_distance_c(gm, phi, phi) == 0.0);
    for (int trial = 0; trial < 200; ++trial) {
        const HistorySegment a = random_segment(rng, rng.uniform(0.1, 3.0));
        const HistorySegment b = random_segment(rng, rng.uniform(0.1, 3.0));
        const double v = variation_distance_c(gm, a, b);
        CHECK(v <= gm.L_Vgc * segment_distance(a, b) * (1.0 + 1e-9) + 1e-12);
    }

    const GeneratingMeasure frozen = default_gm(0.0);
    const HistorySegment a = random_segment(rng, 2.0);
    const HistorySegment b = random_segment(rng, 2.0);
    CHECK(variation_distance_c(frozen, a, b) == 0.0);
}

TEST_CASE("state functionals ignore the near window entirely", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(14);
    for (int trial = 0; trial < 1000; ++trial) {
        const HistorySegment phi = random_segment(rng, rng.uniform(0.1, 5.0));
        const HistorySegment psi = near_window_variant(phi, gm.eta_ign(), rng, 5.0);
        for (int k = 0; k < gm.discrete.size(); ++k) {
            CHECK(gm.discrete.lags[k](phi) == gm.discrete.lags[k](psi));
            CHECK(gm.discrete.jumps[k](phi) == gm.discrete.jumps[k](psi));
        }
    }
}

TEST_CASE("far-window energy is a trapezoid over the far nodes only", "[measure]") {
    const Domain& dom = small_domain();
    Rng rng(15);
    const HistorySegment phi = rough_segment(dom, 1.0, 21, rng, 1.0);
    const double eta_ign = 0.2;
    const double h = phi.spacing();
    double byhand = 0.0;
    const int last = 16;  // theta_16 = -0.2 on the 21-node grid
    for (int i = 0; i <= last; ++i) {
        const double w = (i == 0 || i == last) ? 0.5 * h : h;
        const double n = phi.frame(i).norm();
        byhand += w * n * n;
    }
    CHECK(far_window_energy(phi, eta_ign) == Approx(byhand).epsilon(1e-13));
    // window collapsing below one interval yields zero
    CHECK(far_window_energy(phi, 0.999) == 0.0);
}

TEST_CASE("generating function converges pointwise along convergent segments", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    Rng rng(16);
    const HistorySegment phi = random_segment(rng);
    const HistorySegment psi = random_segment(rng);
    for (double theta : {-0.8, -0.4, -0.1}) {
        const double base = ac_g_value(theta, gm, phi) + singular_g_value(theta, gm, phi);
        double prev = -1.0;
        for (int n = 0; n <= 24; n += 4) {
            const HistorySegment phin = phi + std::pow(0.5, n) * psi;
            const double diff =
                std::abs(ac_g_value(theta, gm, phin) + singular_g_value(theta, gm, phin) - base);
            if (prev >= 0.0) CHECK(diff <= 0.5 * prev + 1e-14);
            prev = diff;
        }
        CHECK(prev <= 1e-7);
    }
}

TEST_CASE("discrete generating function takes left values at the atoms", "[measure]") {
    DiscretePart d;
    d.eta_ign = 0.3;
    d.lags.push_back([](const HistorySegment&) { return 0.5; });
    d.jumps.push_back([](const HistorySegment&) { return 1.0; });
    const GeneratingMeasure gm = make_discrete_measure(std::move(d), 1.0, 1.0);
    Rng rng(17);
    const HistorySegment phi = random_segment(rng);
    CHECK(discrete_g_value(-0.5, gm, phi) == 0.0);
    CHECK(discrete_g_value(-0.5 + 1e-9, gm, phi) == 1.0);
    CHECK(discrete_g_value(0.0, gm, phi) == 1.0);
}

TEST_CASE("stripping the atoms keeps the continuous parts and the cut", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    const GeneratingMeasure c = strip_discrete(gm);
    CHECK(c.discrete.empty());
    CHECK(c.eta_ign() == gm.eta_ign());
    CHECK(c.M_Vg == gm.M_Vgc);
    Rng rng(18);
    const HistorySegment phi = random_segment(rng);
    auto chi = [](double t) { return std::sin(t); };
    CHECK(stieltjes_integrate(chi, c, phi) ==
          Approx(ac_integrate(chi, gm, phi) + singular_integrate(chi, gm, phi)).margin(1e-14));
}

TEST_CASE("family constants compose as documented", "[measure]") {
    const GeneratingMeasure gm = default_gm();
    CHECK(gm.discrete_sum_bound == Approx(1.0 - std::pow(0.5, 16)).epsilon(1e-15));
    CHECK(gm.series_tail_bound == Approx(std::pow(0.5, 16)).epsilon(1e-15));
    CHECK(gm.M_Vgc == Approx(gm.ac.mass() * 1.5 + 0.4).epsilon(1e-12));
    CHECK(gm.M_Vg == Approx(gm.discrete_sum_bound + gm.M_Vgc).epsilon(1e-15));
    CHECK(gm.L_Vgc == Approx(gm.ac.mass() * 0.5 * 1.0 + 0.2).epsilon(1e-12));
    CHECK_THROWS_AS(make_default_measure(MeasureFamilyParams{}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SingularPart::cantor_midpoints(0), std::invalid_argument);
    CHECK_THROWS_AS(SingularPart::cantor_midpoints(21), std::invalid_argument);
}

TEST_CASE("cantor function fixed points and symmetry", "[measure]") {
    CHECK(cantor_function(0.0) == 0.0);
    CHECK(cantor_function(1.0) == 1.0);
    CHECK(cantor_function(0.5) == Approx(0.5).margin(1e-15));
    CHECK(cantor_function(1.0 / 3.0) == Approx(0.5).margin(1e-12));
    CHECK(cantor_function(0.25) == Approx(1.0 / 3.0).margin(1e-12));
    Rng rng(19);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform();
        CHECK(cantor_function(1.0 - x) == Approx(1.0 - cantor_function(x)).margin(1e-12));
        if (i > 0) {
            const double y = rng.uniform();
            const auto [lo, hi] = std::minmax(x, y);
            CHECK(cantor_function(lo) <= cantor_function(hi) + 1e-15);
        }
    }
}
