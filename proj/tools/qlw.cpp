// Command-line driver: configuration in, CSV/JSON artifacts out.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlw/config.hpp"
#include "qlw/errors.hpp"
#include "qlw/lifespan.hpp"
#include "qlw/nullform.hpp"
#include "qlw/radiation.hpp"
#include "qlw/riccati.hpp"
#include "qlw/simulator.hpp"

using namespace qlw;
using nlohmann::json;

namespace {

struct Artifacts {
    std::filesystem::path dir;

    explicit Artifacts(const std::string& out) : dir(out) {
        std::filesystem::create_directories(dir);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    void write_text(const std::string& name, const std::string& text) const {
        std::ofstream f(path(name));
        if (!f) throw DomainError("cannot write artifact: " + path(name));
        f << text;
    }
    void write_json(const std::string& name, const json& doc) const {
        write_text(name, doc.dump(2) + "\n");
    }
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/** Refuses configurations whose quadratic coupling breaks the symmetry or
 *  index-structure assumptions, unless overridden. */
void gate_structure(const ProblemConfig& cfg, const CoefficientSet& coeffs, bool override_flag) {
    if (cfg.allow_structure_violation || override_flag) return;
    if (!check_symmetry(coeffs, 0.0))
        throw DomainError("coefficients violate the A-symmetry assumption "
                          "(A_l^{i,ab} = A_i^{l,ab} = A_i^{l,ba}); pass --override-structure "
                          "to run anyway");
    if (!check_structure(coeffs))
        throw DomainError("coefficients violate the index-structure assumption "
                          "(a nonzero only at (j,l) = (i,i), b only at j = k); pass "
                          "--override-structure to run anyway");
}

std::vector<RadiationTable> build_tables(const ProblemConfig& cfg) {
    const InitialDataSet data = cfg.make_data();
    std::vector<RadiationTable> tables;
    TableBuildOptions opts;
    opts.parallel = cfg.parallel;
    for (int i = 1; i <= cfg.m(); ++i)
        tables.push_back(build_radiation_table(data, i, cfg.radiation.rho_min,
                                               cfg.radiation.n_rho, cfg.radiation.n_omega,
                                               cfg.radiation.params, opts));
    return tables;
}

int cmd_check_null(const ProblemConfig& cfg, const Artifacts& art) {
    const SpeedVector speeds = cfg.make_speeds();
    const CoefficientSet coeffs = cfg.make_coefficients();
    json report;
    for (FormKind kind : {FormKind::Phi, FormKind::Psi, FormKind::Theta, FormKind::Xi}) {
        for (NullMode mode : {NullMode::Strong, NullMode::Standard}) {
            const NullReport rep = check_null(coeffs, speeds, kind, mode);
            const std::string key = std::string(form_name(kind)) +
                                    (mode == NullMode::Strong ? ".strong" : ".standard");
            json entry;
            entry["holds"] = rep.holds;
            json witnesses = json::array();
            for (const auto& w : rep.witnesses)
                witnesses.push_back({{"i", w.i},
                                     {"l", w.l},
                                     {"theta", w.theta},
                                     {"sign", w.sign},
                                     {"value", w.value}});
            entry["witnesses"] = witnesses;
            report[key] = entry;
            std::cout << form_name(kind) << " "
                      << (mode == NullMode::Strong ? "strong" : "standard") << ": "
                      << (rep.holds ? "holds" : "fails") << "\n";
        }
    }
    report["symmetry"] = check_symmetry(coeffs, 0.0);
    report["structure"] = check_structure(coeffs);
    report["smallness_at_unit_gradient"] = check_smallness(coeffs, speeds, 1.0);
    art.write_json("report.json", report);
    return 0;
}

int cmd_radiation(const ProblemConfig& cfg, const Artifacts& art) {
    const auto tables = build_tables(cfg);
    json report;
    for (const auto& table : tables) {
        const std::string name = "radiation_" + std::to_string(table.component) + ".csv";
        write_radiation_csv(table, art.path(name));
        report["component_" + std::to_string(table.component)] = {
            {"decay_constant_F", table.decay_constant[0]},
            {"decay_constant_F_rho", table.decay_constant[1]},
            {"decay_constant_F_rhorho", table.decay_constant[2]},
            {"csv", name}};
    }
    art.write_json("report.json", report);
    return 0;
}

void write_lifespan_csv(const Artifacts& art, const LifespanEstimate& base,
                        const std::vector<double>& epsilons,
                        const std::vector<double>* empirical) {
    std::ofstream csv(art.path("lifespan.csv"));
    csv << "epsilon,H,predicted_T,empirical_T,eps2_log1pT\n";
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        LifespanEstimate est = base;
        apply_epsilon(est, epsilons[k]);
        const double emp = empirical ? (*empirical)[k] : std::nan("");
        const double value = empirical && std::isfinite(emp)
                                 ? est.epsilon * est.epsilon * std::log1p(emp)
                                 : est.epsilon * est.epsilon * std::log1p(est.predicted_T);
        csv << fmt17(est.epsilon) << "," << fmt17(est.H) << "," << fmt17(est.predicted_T) << ","
            << fmt17(emp) << "," << fmt17(value) << "\n";
    }
}

json lifespan_report(const LifespanEstimate& est) {
    json per = json::array();
    for (double h : est.per_component) per.push_back(h);
    json doc{{"H", est.H},
             {"per_component", per},
             {"argmax_component", est.argmax_component},
             {"argmax_rho", est.argmax_rho},
             {"argmax_omega", est.argmax_omega},
             {"argmax_on_table_boundary", est.argmax_on_boundary}};
    return doc;
}

int cmd_lifespan(const ProblemConfig& cfg, const Artifacts& art) {
    const SpeedVector speeds = cfg.make_speeds();
    const CoefficientSet coeffs = cfg.make_coefficients();
    const auto tables = build_tables(cfg);
    LifespanEstimate est = compute_H(coeffs, speeds, tables);
    json report = lifespan_report(est);
    if (est.argmax_on_boundary)
        std::cout << "warning: maximizer sits on the table boundary; extend rho_min\n";
    write_lifespan_csv(art, est, cfg.epsilons, nullptr);
    apply_epsilon(est, cfg.epsilon);
    report["epsilon"] = cfg.epsilon;
    report["predicted_log_horizon"] = est.predicted_log_horizon;
    report["predicted_T"] = est.predicted_T;
    art.write_json("report.json", report);
    std::cout << "H = " << fmt17(est.H) << "\n";
    if (est.H == 0.0)
        std::cout << "predicted horizon: unbounded\n";
    else
        std::cout << "predicted T(eps=" << fmt17(cfg.epsilon) << ") = " << fmt17(est.predicted_T)
                  << "\n";
    return 0;
}

int cmd_riccati(const ProblemConfig& cfg, const Artifacts& art) {
    const RiccatiProblem p = cfg.make_riccati();
    const RiccatiSolution sol = riccati_integrate(p, cfg.riccati.tolerance);
    std::ofstream csv(art.path("riccati.csv"));
    csv << "t,w,bound\n";
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
        std::optional<double> bound;
        try {
            bound = riccati_bound(p, sol.t[k]);
        } catch (const DomainError&) {
            bound.reset();
        }
        csv << fmt17(sol.t[k]) << "," << fmt17(sol.w[k]) << ","
            << (bound ? fmt17(*bound) : "") << "\n";
    }
    json report{{"outcome", sol.outcome == RiccatiOutcome::BlowUp ? "blowup" : "horizon"},
                {"step_underflow", sol.step_underflow},
                {"steps", sol.t.size()}};
    if (sol.outcome == RiccatiOutcome::BlowUp) {
        report["blowup_time"] = sol.blowup_time;
        std::cout << "blow-up at t = " << fmt17(sol.blowup_time) << "\n";
    } else {
        std::cout << "horizon reached at t = " << fmt17(p.t1) << "\n";
    }
    art.write_json("report.json", report);
    return 0;
}

void write_diagnostics_csv(const Artifacts& art, const RunResult& res) {
    std::ofstream csv(art.path("diagnostics.csv"));
    csv << "t,sup_du,energy,bracket_norm,angle_norm\n";
    for (const auto& s : res.series)
        csv << fmt17(s.t) << "," << fmt17(s.sup_du) << "," << fmt17(s.energy) << ","
            << fmt17(s.bracket_norm) << "," << fmt17(s.angle_norm) << "\n";
}

const char* outcome_name(RunOutcome o) {
    switch (o) {
        case RunOutcome::Completed: return "completed";
        case RunOutcome::Blowup: return "blowup";
        case RunOutcome::Unstable: return "unstable";
    }
    return "?";
}

int cmd_simulate(const ProblemConfig& cfg, const Artifacts& art) {
    SimConfig sim_cfg = cfg.make_sim_config();
    Simulator sim(sim_cfg);
    RunResult res = sim.run();
    write_diagnostics_csv(art, res);
    for (int i = 1; i <= cfg.m(); ++i)
        write_field_binary(res.final_state.field(i),
                           art.path("final_u" + std::to_string(i) + ".bin"));
    json report{{"outcome", outcome_name(res.outcome)},
                {"T_emp", res.T_emp},
                {"threshold", res.threshold},
                {"T_at_factor_100", res.T_at_factor_100},
                {"T_at_factor_10000", res.T_at_factor_10000},
                {"final_time", res.final_state.t}};
    art.write_json("report.json", report);
    std::cout << "outcome: " << outcome_name(res.outcome) << ", T_emp = " << fmt17(res.T_emp)
              << "\n";
    return 0;
}

int cmd_scaling(const ProblemConfig& cfg, const Artifacts& art) {
    const SpeedVector speeds = cfg.make_speeds();
    const CoefficientSet coeffs = cfg.make_coefficients();
    const auto tables = build_tables(cfg);
    const LifespanEstimate est = compute_H(coeffs, speeds, tables);
    const SimConfig sim_cfg = cfg.make_sim_config();
    const ScalingStudy study =
        scaling_study(sim_cfg, cfg.epsilons, est.H, cfg.scaling_tolerance, cfg.parallel);
    write_scaling_csv(study, art.path("scaling.csv"));

    std::vector<double> empirical;
    for (const auto& row : study.rows)
        empirical.push_back(row.reached_horizon ? std::numeric_limits<double>::infinity()
                                                : row.T_emp);
    write_lifespan_csv(art, est, cfg.epsilons, &empirical);

    json rows = json::array();
    for (const auto& row : study.rows) {
        rows.push_back({{"epsilon", row.epsilon},
                        {"reached_horizon", row.reached_horizon},
                        {"T_emp", row.T_emp},
                        {"eps2_log1pT", row.eps2_log1pT},
                        {"flagged", row.flagged},
                        {"valid", row.valid}});
        std::cout << "eps = " << fmt17(row.epsilon) << "  "
                  << (row.reached_horizon ? ">= t_max" : ("T_emp = " + fmt17(row.T_emp)))
                  << (row.flagged ? "  [flag: below (1-tol)/H]" : "") << "\n";
    }
    json report = lifespan_report(est);
    report["rows"] = rows;
    report["tol_scaling"] = cfg.scaling_tolerance;
    art.write_json("report.json", report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2-D multiple-speed quasilinear wave toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // allow `qlw <subcommand> -c config.json`

    std::string config_path;
    std::string out_override;
    bool override_structure = false;
    bool serial = false;
    app.add_option("-c,--config", config_path, "problem configuration (JSON)")->required();
    app.add_option("-o,--out", out_override, "output directory (overrides config)");
    app.add_flag("--override-structure", override_structure,
                 "run even if the coefficient structure checks fail");
    app.add_flag("--serial", serial, "disable parallel kernels");

    auto* c_null = app.add_subcommand("check-null", "classify the nonlinearity");
    auto* c_rad = app.add_subcommand("radiation", "tabulate radiation profiles");
    auto* c_life = app.add_subcommand("lifespan", "blow-up constant and predicted horizon");
    auto* c_ricc = app.add_subcommand("riccati", "integrate the configured model problem");
    auto* c_sim = app.add_subcommand("simulate", "evolve the system once");
    auto* c_scale = app.add_subcommand("scaling-study", "measured horizons across epsilons");

    CLI11_PARSE(app, argc, argv);

    try {
        ProblemConfig cfg = parse_config(config_path);
        if (!out_override.empty()) cfg.output_dir = out_override;
        if (serial) cfg.parallel = false;
        Artifacts art(cfg.output_dir);
        art.write_text("resolved_config.json", cfg.resolved_json());

        const CoefficientSet coeffs = cfg.make_coefficients();
        if (!c_null->parsed()) gate_structure(cfg, coeffs, override_structure);

        if (c_null->parsed()) return cmd_check_null(cfg, art);
        if (c_rad->parsed()) return cmd_radiation(cfg, art);
        if (c_life->parsed()) return cmd_lifespan(cfg, art);
        if (c_ricc->parsed()) return cmd_riccati(cfg, art);
        if (c_sim->parsed()) return cmd_simulate(cfg, art);
        if (c_scale->parsed()) return cmd_scaling(cfg, art);
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
}
