#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qlw/errors.hpp"
#include "qlw/lifespan.hpp"
#include "qlw/riccati.hpp"
#include "oracles.hpp"

using namespace qlw;

namespace {

CoefficientSet quartic_time_tensor(int m, double kappa, int comp = 1) {
    CoefficientSet c(m);
    c.set_c(comp, comp, comp, comp, 0, 0, 0, 0, kappa);
    return c;
}

InitialDataSet bump_g_data(double amplitude = 1.0, double M = 1.0) {
    return InitialDataSet::single(zero_field(M), bump_field(amplitude, M), M);
}

} // namespace

TEST_CASE("H vanishes for a zero quartic tensor") {
    SpeedVector s({1.0});
    CoefficientSet zero(1);
    InitialDataSet data = bump_g_data();
    std::vector<RadiationTable> tables{build_radiation_table(data, 1, -4.0, 65, 1)};
    const LifespanEstimate est = compute_H(zero, s, tables);
    CHECK(est.H == 0.0);
    CHECK(est.per_component[0] == 0.0);
}

TEST_CASE("H vanishes for zero data") {
    SpeedVector s({1.0});
    CoefficientSet c = quartic_time_tensor(1, 1.0);
    InitialDataSet data = InitialDataSet::single(zero_field(1.0), zero_field(1.0), 1.0);
    std::vector<RadiationTable> tables{build_radiation_table(data, 1, -4.0, 65, 1)};
    const LifespanEstimate est = compute_H(c, s, tables);
    CHECK(est.H == 0.0);
}

TEST_CASE("H matches a dense-grid brute-force maximum") {
    SpeedVector s({1.0});
    CoefficientSet c = quartic_time_tensor(1, 1.0);
    InitialDataSet data = bump_g_data();
    std::vector<RadiationTable> tables{build_radiation_table(data, 1, -6.0, 121, 4)};
    const LifespanEstimate est = compute_H(c, s, tables);
    REQUIRE(est.H > 0.0);

    // 10x finer scan, plain loop, no golden-section refinement
    RadiationTable dense = build_radiation_table(data, 1, -6.0, 1201, 4);
    double brute = 0.0;
    for (int r = 0; r < dense.n_rho(); ++r)
        for (int o = 0; o < dense.n_omega(); ++o) {
            const double theta = eval_form(FormKind::Theta, c, 1, 1,
                                           {-1.0, std::cos(dense.omega_grid[o]),
                                            std::sin(dense.omega_grid[o])});
            brute = std::max(brute, -theta * dense.at(dense.F_rho, r, o) *
                                        dense.at(dense.F_rhorho, r, o));
        }
    CHECK(est.H == doctest::Approx(brute).epsilon(1e-4));
    CHECK_FALSE(est.argmax_on_boundary);
}

TEST_CASE("H scales linearly in the quartic tensor") {
    SpeedVector s({1.0});
    InitialDataSet data = bump_g_data();
    std::vector<RadiationTable> tables{build_radiation_table(data, 1, -4.0, 81, 1)};
    const double H1 = compute_H(quartic_time_tensor(1, 1.0), s, tables).H;
    const double H2 = compute_H(quartic_time_tensor(1, 2.0), s, tables).H;
    CHECK(H2 == doctest::Approx(2.0 * H1).epsilon(1e-9));
}

TEST_CASE("H is invariant under rotating the data") {
    SpeedVector s({1.0});
    CoefficientSet c = quartic_time_tensor(1, 1.0);
    const double beta = 0.6;
    const int mode = 2;
    auto rotated_data = [&](double shift) {
        SupportedField g = modulated_bump_field(1.0, 1.0, mode, beta);
        SupportedField grot{[g, shift](double x, double y) {
                                const double cs = std::cos(shift), sn = std::sin(shift);
                                return g(cs * x + sn * y, -sn * x + cs * y);
                            },
                            1.0, false};
        return InitialDataSet::single(zero_field(1.0), shift == 0.0 ? g : grot, 1.0);
    };
    // rotate by a whole number of grid steps so the omega nodes relabel
    const int n_omega = 24;
    const double shift = 2.0 * M_PI * 3 / n_omega;
    InitialDataSet d0 = rotated_data(0.0);
    InitialDataSet d1 = rotated_data(shift);
    std::vector<RadiationTable> t0{build_radiation_table(d0, 1, -3.0, 41, n_omega)};
    std::vector<RadiationTable> t1{build_radiation_table(d1, 1, -3.0, 41, n_omega)};
    const double H0 = compute_H(c, s, t0).H;
    const double H1 = compute_H(c, s, t1).H;
    // the quartic form is isotropic here, so rotation only relabels omega
    CHECK(H0 == doctest::Approx(H1).epsilon(1e-6));
}

TEST_CASE("prediction formula and saturation") {
    const LifespanEstimate e1 = predict_lifespan(1.0, 1.0);
    CHECK(e1.predicted_T == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    const LifespanEstimate e2 = predict_lifespan(2.0, 0.5);
    CHECK(e2.predicted_log_horizon == doctest::Approx(2.0));
    CHECK(e2.predicted_T == doctest::Approx(std::exp(2.0) - 1.0));
    const LifespanEstimate e0 = predict_lifespan(0.0, 0.3);
    CHECK(std::isinf(e0.predicted_T));
    CHECK(std::isinf(e0.predicted_log_horizon));
    const LifespanEstimate tiny = predict_lifespan(1.0, 1e-3); // saturates
    CHECK(std::isinf(tiny.predicted_T));
    CHECK_THROWS_AS(predict_lifespan(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(predict_lifespan(-1.0, 0.1), DomainError);
}

TEST_CASE("prediction is monotone in H and epsilon") {
    auto rng = test::make_rng(2);
    std::uniform_real_distribution<double> hh(0.1, 5.0), ee(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double H = hh(rng), eps = ee(rng);
        const double T = predict_lifespan(H, eps).predicted_T;
        CHECK(predict_lifespan(H * 1.5, eps).predicted_T <= T);
        CHECK(predict_lifespan(H, eps * 1.5).predicted_T <= T);
    }
}

TEST_CASE("model blow-up approaches the predicted log horizon from above") {
    // along the worst ray the reduced dynamics has alpha*w0 = eps^2 H; its
    // blow-up time obeys eps^2 log(1+T) = eps^2 log(1+t0) + 1/H -> 1/H.
    const double H = 1.0;
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (double eps : {0.2, 0.1, 0.05}) {
        const double t0 = 1.0 / eps;
        const double alpha = eps * H; // c = 1, seed w0 = eps folds the rest
        RiccatiProblem p;
        p.alpha = alpha;
        p.w0 = eps;
        p.t0 = t0;
        p.t1 = 1e280;
        const RiccatiSolution sol = riccati_integrate(p);
        REQUIRE(sol.outcome == RiccatiOutcome::BlowUp);
        const double value = eps * eps * std::log1p(sol.blowup_time);
        const double ratio = value * H; // vs 1/H
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.10));
        CHECK(ratio <= prev_ratio + 1e-12); // monotone approach
        CHECK(ratio >= 1.0);                // from above
        prev_ratio = ratio;
    }
}

TEST_CASE("characteristic curve with zero field is a straight line") {
    SpeedVector s({2.0});
    CoefficientSet c = quartic_time_tensor(1, 1.0);
    CharCurveConfig cfg;
    cfg.epsilon = 0.5;
    cfg.dt = 0.01;
    cfg.t_end = 10.0;
    const double lambda = 0.7;
    const CharCurveState curve = characteristic_curve(
        1, lambda, 0.0, [](double, double) { return 0.0; }, c, s, cfg);
    CHECK(curve.t0 == doctest::Approx(2.0)); // 1/eps rule
    for (std::size_t k = 0; k < curve.t.size(); ++k)
        CHECK(curve.r[k] == doctest::Approx(2.0 * curve.t[k] + lambda).epsilon(1e-12));
}

TEST_CASE("zero quartic tensor gives the same straight line for any field") {
    SpeedVector s({1.0});
    CoefficientSet zero(1);
    CharCurveConfig cfg;
    cfg.epsilon = 0.25;
    cfg.dt = 0.01;
    cfg.t_end = 12.0;
    const CharCurveState curve = characteristic_curve(
        1, -0.4, 1.1, [](double r, double t) { return 0.3 * std::sin(r + t); }, zero, s, cfg);
    for (std::size_t k = 0; k < curve.t.size(); ++k)
        CHECK(curve.r[k] == doctest::Approx(curve.t[k] - 0.4).epsilon(1e-12));
}

TEST_CASE("start time rule switches from 1/eps to lambda^4") {
    SpeedVector s({1.0});
    CoefficientSet zero(1);
    CharCurveConfig cfg;
    cfg.epsilon = 0.01; // eps^{-1/4} ~ 3.16
    cfg.dt = 0.5;
    cfg.t_end = 700.0;
    const CharCurveState inside = characteristic_curve(
        1, 3.0, 0.0, [](double, double) { return 0.0; }, zero, s, cfg);
    CHECK(inside.t0 == doctest::Approx(100.0));
    const CharCurveState outside = characteristic_curve(
        1, 5.0, 0.0, [](double, double) { return 0.0; }, zero, s, cfg);
    CHECK(outside.t0 == doctest::Approx(625.0));
}

TEST_CASE("frozen radiation field drift stays within the slow-growth band") {
    // field = eps r^{-1/2} (-c) F'(lambda, omega), frozen: the drift of
    // r - c t is Theta (-c,omega) eps^2 c^2 F'^2 log(t/t0) / (2 c^3), up to
    // the 1/r vs 1/(ct) difference; check the factor-2 band + step halving.
    SpeedVector s({1.0});
    const double kappa = 1.0;
    CoefficientSet c = quartic_time_tensor(1, kappa);
    const double eps = 0.1, Fp = 0.8, lambda = 0.0;
    CharCurveConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = 0.02;
    cfg.t_end = 400.0;
    auto field = [&](double r, double t) {
        (void)t;
        return eps * (-1.0) * Fp / std::sqrt(r);
    };
    const CharCurveState curve = characteristic_curve(1, lambda, 0.0, field, c, s, cfg);
    const double drift = curve.r.back() - curve.t.back() - lambda;
    const double model = 0.5 * kappa * eps * eps * Fp * Fp *
                         std::log(curve.t.back() / curve.t0);
    CHECK(drift > 0.25 * model);
    CHECK(drift < 2.0 * model);

    CharCurveConfig half = cfg;
    half.dt = 0.01;
    const CharCurveState fine = characteristic_curve(1, lambda, 0.0, field, c, s, half);
    CHECK(fine.r.back() == doctest::Approx(curve.r.back()).epsilon(1e-8));
}

TEST_CASE("compute_H validates its inputs") {
    SpeedVector s({1.0});
    CoefficientSet c = quartic_time_tensor(1, 1.0);
    CHECK_THROWS_AS(compute_H(c, s, {}), DomainError);
}
