#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qlw/errors.hpp"
#include "qlw/initial_data.hpp"
#include "qlw/radiation.hpp"
#include "oracles.hpp"

using namespace qlw;

namespace {

InitialDataSet bump_g_data(double amplitude = 1.0, double M = 1.0) {
    return InitialDataSet::single(zero_field(M), bump_field(amplitude, M), M);
}

} // namespace

TEST_CASE("line transform of the disk indicator equals the chord length") {
    // Non-smooth test-only field; on the chord the integrand is identically
    // one, so the rule reproduces 2 sqrt(1 - s^2) up to roundoff.
    SupportedField indicator{[](double x, double y) { return x * x + y * y < 1.0 ? 1.0 : 0.0; },
                             1.0, true};
    auto rng = test::make_rng(7);
    std::uniform_real_distribution<double> ss(-0.999, 0.999), ww(0.0, 2.0 * M_PI);
    for (int k = 0; k < 100; ++k) {
        const double s = ss(rng), w = ww(rng);
        const double expected = 2.0 * std::sqrt(1.0 - s * s);
        CHECK(radon_transform(indicator, s, w) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("line transform vanishes outside the support") {
    SupportedField b = bump_field(3.0, 2.0);
    CHECK(radon_transform(b, 3.0, 0.3) == 0.0);
    CHECK(radon_transform(b, -2.0, 1.0) == 0.0);
}

TEST_CASE("line transform of radial fields is rotation invariant") {
    SupportedField b = bump_field(1.0, 1.5);
    for (double s : {0.0, 0.4, 1.1})
        CHECK(radon_transform(b, s, 0.3) ==
              doctest::Approx(radon_transform(b, s, 2.2)).epsilon(1e-12));
}

TEST_CASE("radiation profile of zero data vanishes") {
    InitialDataSet data = InitialDataSet::single(zero_field(1.0), zero_field(1.0), 1.0);
    CHECK(radiation_field(data, 1, 0.0, 0.0) == 0.0);
    CHECK(radiation_field(data, 1, -3.0, 1.0) == 0.0);
    const auto d = radiation_derivatives(data, 1, -0.5, 0.0);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
}

TEST_CASE("radiation profile vanishes at and beyond the support edge") {
    InitialDataSet data = bump_g_data();
    CHECK(radiation_field(data, 1, 1.0, 0.2) == 0.0);
    CHECK(radiation_field(data, 1, 1.5, 0.2) == 0.0);
    const auto d = radiation_derivatives(data, 1, 1.0, 0.2);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
}

TEST_CASE("profile matches a 10x-node quadrature oracle") {
    InitialDataSet data = bump_g_data();
    RadiationParams coarse;
    RadiationParams fine;
    fine.n_abel = coarse.n_abel * 10;
    for (double rho : {0.0, -0.5, 0.5, -2.0}) {
        const double v = radiation_field(data, 1, rho, 0.0, coarse);
        const double oracle = radiation_field(data, 1, rho, 0.0, fine);
        CHECK(v == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("profile derivatives match finite differences of the profile") {
    InitialDataSet data = bump_g_data();
    const double rho = 0.3, omega = 0.0, step = 1e-3;
    const auto d = radiation_derivatives(data, 1, rho, omega);
    const double fp = radiation_field(data, 1, rho + step, omega);
    const double f0 = radiation_field(data, 1, rho, omega);
    const double fm = radiation_field(data, 1, rho - step, omega);
    CHECK(std::abs(d[0] - (fp - fm) / (2 * step)) < 1e-4);
    CHECK(std::abs(d[1] - (fp - 2 * f0 + fm) / (step * step)) < 1e-4);
}

TEST_CASE("profile is linear in the data") {
    auto rng = test::make_rng(3);
    std::uniform_real_distribution<double> sc(-2.0, 2.0);
    const double M = 1.0;
    for (int trial = 0; trial < 5; ++trial) {
        const double af = sc(rng), ag = sc(rng);
        InitialDataSet d1 = InitialDataSet::single(bump_field(1.0, M), zero_field(M), M);
        InitialDataSet d2 = bump_g_data();
        InitialDataSet combo = InitialDataSet::single(bump_field(af, M), bump_field(ag, M), M);
        for (double rho : {-1.2, 0.1}) {
            const double lhs = radiation_field(combo, 1, rho, 0.7);
            const double rhs = af * radiation_field(d1, 1, rho, 0.7) +
                               ag * radiation_field(d2, 1, rho, 0.7);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
        }
    }
}

TEST_CASE("table of zero data is all zero") {
    InitialDataSet data = InitialDataSet::single(zero_field(1.0), zero_field(1.0), 1.0);
    RadiationTable table = build_radiation_table(data, 1, -2.0, 17, 8);
    for (double v : table.F) CHECK(v == 0.0);
    for (double v : table.F_rho) CHECK(v == 0.0);
    for (double v : table.F_rhorho) CHECK(v == 0.0);
    CHECK(table.decay_constant[0] == 0.0);
}

TEST_CASE("radial data give an omega-independent table without the shortcut") {
    InitialDataSet data = bump_g_data();
    TableBuildOptions opts;
    opts.exploit_radial = false;
    RadiationTable table = build_radiation_table(data, 1, -1.5, 9, 6, {}, opts);
    for (int r = 0; r < table.n_rho(); ++r)
        for (int o = 1; o < table.n_omega(); ++o) {
            CHECK(std::abs(table.at(table.F, r, o) - table.at(table.F, r, 0)) < 1e-9);
            CHECK(std::abs(table.at(table.F_rho, r, o) - table.at(table.F_rho, r, 0)) < 1e-9);
        }
}

TEST_CASE("table values at shared nodes are stable under rho refinement") {
    InitialDataSet data = bump_g_data();
    RadiationTable coarse = build_radiation_table(data, 1, -2.0, 9, 4);
    RadiationTable fine = build_radiation_table(data, 1, -2.0, 17, 4);
    for (int r = 0; r < coarse.n_rho(); ++r)
        for (int o = 0; o < coarse.n_omega(); ++o)
            CHECK(std::abs(coarse.at(coarse.F, r, o) - fine.at(fine.F, 2 * r, o)) < 1e-6);
}

TEST_CASE("empirical decay constants are stable under refinement") {
    InitialDataSet data = bump_g_data();
    RadiationTable t1 = build_radiation_table(data, 1, -50.0, 201, 1);
    RadiationTable t2 = build_radiation_table(data, 1, -50.0, 401, 1);
    for (int l = 0; l < 3; ++l) {
        CHECK(std::isfinite(t1.decay_constant[static_cast<std::size_t>(l)]));
        const double a = t1.decay_constant[static_cast<std::size_t>(l)];
        const double b = t2.decay_constant[static_cast<std::size_t>(l)];
        CHECK(std::max(a, b) / std::min(a, b) < 2.0);
    }
}

TEST_CASE("table rejects bad parameters") {
    InitialDataSet data = bump_g_data();
    CHECK_THROWS_AS(build_radiation_table(data, 1, 2.0, 9, 4), DomainError);
    CHECK_THROWS_AS(build_radiation_table(data, 1, -1.0, 1, 4), DomainError);
    CHECK_THROWS_AS(build_radiation_table(data, 2, -1.0, 9, 4), DomainError);
}

TEST_CASE("modulated data carry their angular mode into the profile") {
    const int mode = 3;
    InitialDataSet data = InitialDataSet::single(
        zero_field(1.0), modulated_bump_field(1.0, 1.0, mode, 0.5), 1.0);
    const double base = radiation_field(data, 1, 0.2, 0.0);
    const double shifted = radiation_field(data, 1, 0.2, 2.0 * M_PI / mode);
    CHECK(base == doctest::Approx(shifted).epsilon(1e-9)); // periodic in omega
    const double quarter = radiation_field(data, 1, 0.2, M_PI / mode);
    CHECK(std::abs(base - quarter) > 1e-6); // genuinely angular
}
