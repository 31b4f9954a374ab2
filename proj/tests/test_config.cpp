#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "qlw/config.hpp"
#include "qlw/errors.hpp"

using namespace qlw;

namespace {
const char* kMinimal = R"({"speeds": [1.0]})";
}

TEST_CASE("minimal config fills documented defaults") {
    ProblemConfig cfg = parse_config_text(kMinimal, "");
    CHECK(cfg.m() == 1);
    CHECK(cfg.epsilon == 0.1);
    CHECK(cfg.cfl == 0.45);
    CHECK(cfg.grid.nx == 201);
    CHECK(cfg.blowup_factor == 1000.0);
    CHECK(cfg.radiation.params.n_line == 128);
    CHECK(cfg.radiation.params.n_abel == 96);
    CHECK(cfg.scaling_tolerance == 0.35);
    CHECK(cfg.epsilons == std::vector<double>{0.1});
    CHECK(cfg.f_specs.size() == 1);
    CHECK(cfg.f_specs[0].family == "zero");
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"speeds": [1.0], "bogus": 1})", ""),
                         doctest::Contains("bogus"), DomainError);
    CHECK_THROWS_WITH_AS(
        parse_config_text(R"({"speeds": [1.0], "grid": {"extent": 1.0, "nnx": 3}})", ""),
        doctest::Contains("grid.nnx"), DomainError);
    CHECK_THROWS_WITH_AS(
        parse_config_text(
            R"({"speeds": [1.0], "initial_data": {"components": [{"f": {"famly": "bump"}}]}})",
            ""),
        doctest::Contains("famly"), DomainError);
}

TEST_CASE("decreasing speeds are rejected naming the ordering") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"speeds": [2.0, 1.0]})", ""),
                         doctest::Contains("strictly increasing"), DomainError);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"speeds": [-1.0]})", ""),
                         doctest::Contains("strictly increasing"), DomainError);
}

TEST_CASE("resolved config reparses to the identical resolved form") {
    const char* text = R"({
        "speeds": [1.0, 2.0],
        "initial_data": {"support_radius": 0.5, "components": [
            {"f": {"family": "bump", "amplitude": 2.0}, "g": {"family": "zero"}},
            {"f": {"family": "zero"}, "g": {"family": "modulated_bump", "angular_mode": 3}}
        ]},
        "epsilon": 0.25,
        "grid": {"extent": 6.0, "nx": 301},
        "t_max": 2.0,
        "coefficients_inline": [
            {"tensor": "b", "indices": [1,1,1,0,0], "value": 1.5}
        ]
    })";
    ProblemConfig cfg = parse_config_text(text, "");
    const std::string resolved = cfg.resolved_json();
    ProblemConfig back = parse_config_text(resolved, "");
    CHECK(back.resolved_json() == resolved); // byte-identical round trip
    CHECK(back.epsilon == 0.25);
    CHECK(back.g_specs[1].angular_mode == 3);
    CHECK(back.make_coefficients().b(1, 1, 1, 0, 0) == 1.5);
}

TEST_CASE("config materializes library objects") {
    const char* text = R"({
        "speeds": [1.0],
        "initial_data": {"components": [{"g": {"family": "bump"}}]},
        "riccati": {"alpha": 1.0, "w0": 1.0, "t0": 0.0, "t1": 5.0,
                     "forcing_amplitude": 0.001}
    })";
    ProblemConfig cfg = parse_config_text(text, "");
    const InitialDataSet data = cfg.make_data();
    CHECK(data.m == 1);
    CHECK(data.g[0](0.0, 0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(data.f[0](0.0, 0.0) == 0.0);
    const RiccatiProblem p = cfg.make_riccati();
    CHECK(p.forcing(0.0) == doctest::Approx(0.001));
}

TEST_CASE("missing files and malformed syntax carry distinct messages") {
    CHECK_THROWS_WITH_AS(parse_config("no_such_file.json"), doctest::Contains("not readable"),
                         DomainError);
    CHECK_THROWS_WITH_AS(parse_config_text("{", ""), doctest::Contains("malformed"),
                         DomainError);
    CHECK_THROWS_WITH_AS(
        parse_config_text(R"({"speeds": [1.0], "coefficients": "missing.json"})", "."),
        doctest::Contains("does not exist"), DomainError);
}

TEST_CASE("component count must match the speeds") {
    CHECK_THROWS_AS(parse_config_text(R"({
        "speeds": [1.0],
        "initial_data": {"components": [{}, {}]}
    })",
                                      ""),
                    DomainError);
}
