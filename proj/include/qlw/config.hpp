#ifndef QLW_CONFIG_HPP
#define QLW_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "qlw/initial_data.hpp"
#include "qlw/nullform.hpp"
#include "qlw/radiation.hpp"
#include "qlw/riccati.hpp"
#include "qlw/simulator.hpp"

namespace qlw {

struct DataFamilySpec {
    std::string family = "zero"; // zero | bump | modulated_bump
    double amplitude = 1.0;
    int angular_mode = 0;
    double angular_weight = 0.0;
};

struct RiccatiConfig {
    double alpha = 1.0;
    double w0 = 1.0;
    double t0 = 0.0;
    double t1 = 10.0;
    double forcing_amplitude = 0.0; // q(t) = amplitude (1+t)^{-exponent}
    double forcing_exponent = 1.25;
    double tolerance = 1e-10;
};

struct RadiationConfig {
    double rho_min = -8.0;
    int n_rho = 257;
    int n_omega = 64;
    RadiationParams params;
};

/** Parsed and validated problem description. Strict: unknown keys are
 *  rejected with their path, defaults are filled in and echoed back through
 *  resolved_json(). */
struct ProblemConfig {
    std::vector<double> speeds;
    std::string coefficients_path;          // empty when inline
    std::string coefficients_inline_json;   // normalized inline records
    double support_radius = 1.0;
    std::vector<DataFamilySpec> f_specs;
    std::vector<DataFamilySpec> g_specs;
    double epsilon = 0.1;
    std::vector<double> epsilons;           // scaling study; defaults to {epsilon}
    SimGrid grid;
    double cfl = 0.45;
    double t_max = 1.0;
    double blowup_threshold = 0.0;
    double blowup_factor = 1e3;
    double output_cadence = 0.05;
    RadiationConfig radiation;
    RiccatiConfig riccati;
    double scaling_tolerance = 0.35;
    bool parallel = true;
    bool allow_structure_violation = false;
    std::string output_dir = "out";

    int m() const { return static_cast<int>(speeds.size()); }

    SpeedVector make_speeds() const;
    CoefficientSet make_coefficients() const;
    InitialDataSet make_data() const;
    SimConfig make_sim_config() const;
    RiccatiProblem make_riccati() const;

    /** Complete JSON with every default materialized; reparsing it yields
     *  the identical config. */
    std::string resolved_json() const;
};

ProblemConfig parse_config(const std::string& path);
ProblemConfig parse_config_text(const std::string& json_text, const std::string& base_dir);

} // namespace qlw

#endif
