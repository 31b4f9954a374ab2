#ifndef QLW_SIMULATOR_HPP
#define QLW_SIMULATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "qlw/grid.hpp"
#include "qlw/initial_data.hpp"
#include "qlw/nullform.hpp"

namespace qlw {

struct SimGrid {
    double extent = 4.0; // domain [-extent, extent]^2
    int nx = 201;        // points per side
};

/** A point riding the outgoing cone of one component: radius c_i t + lambda
 *  along a fixed direction. Sampled once per diagnostic interval. */
struct ConeProbe {
    int component = 1;
    double lambda = 0.0;
    double omega = 0.0;
};

struct SimConfig {
    CoefficientSet coeffs;
    SpeedVector speeds;
    InitialDataSet data;
    double epsilon = 0.1;
    SimGrid grid;
    double cfl = 0.45;       // dt = cfl * h / (sqrt(2) c_m)
    double t_max = 1.0;
    double blowup_threshold = 0.0; // absolute; 0 means blowup_factor * initial sup
    double blowup_factor = 1e3;
    double output_cadence = 0.05;
    bool parallel = true;
    std::vector<ConeProbe> probes;

    SimConfig(CoefficientSet c, SpeedVector s, InitialDataSet d, double eps, SimGrid g,
              double tmax)
        : coeffs(std::move(c)), speeds(std::move(s)), data(std::move(d)), epsilon(eps),
          grid(g), t_max(tmax) {}

    /** Throws DomainError on violated invariants: CFL factor in (0,1], the
     *  domain must contain the forward cone c_m t_max + M, positive sizes. */
    void validate() const;

    double h() const { return 2.0 * grid.extent / (grid.nx - 1); }
    double dt() const;
};

/** Discrete fields of one run at a single time level plus what the leapfrog
 *  needs: the previous level and the last acceleration. */
struct WaveState {
    double t = 0.0;
    double dt = 0.0;
    int nx = 0;
    double h = 0.0;
    bool blown = false;
    std::vector<std::vector<double>> u_prev; // per component
    std::vector<std::vector<double>> u;      // current level
    std::vector<std::vector<double>> dtu;    // d/dt u at the current level
    std::vector<std::vector<double>> acc;    // d2/dt2 u at the previous level

    GridField field(int i) const;     // u^i as a GridField
    GridField dt_field(int i) const;  // du^i/dt
};

enum class RunOutcome { Completed, Blowup, Unstable };

struct DiagnosticSample {
    double t = 0.0;
    double sup_du = 0.0;      // max_i |du^i|_inf over first derivatives
    double energy = 0.0;      // sum_i int (du/dt)^2 + c_i^2 |grad u|^2
    double bracket_norm = 0.0; // weighted sup of |du| (order 0)
    double angle_norm = 0.0;   // weighted sup of |u| (order 0)
    std::vector<double> region_max; // per slab 0..m, of |du| aggregate
};

struct ProbeSample {
    double t = 0.0;
    double r = 0.0;
    double W = 0.0; // r^{1/2} d2u/dt2 at the probe
};

struct RunResult {
    RunOutcome outcome = RunOutcome::Completed;
    double T_emp = 0.0; // last stable time (== final time when completed)
    std::vector<DiagnosticSample> series;
    std::vector<std::vector<ProbeSample>> probe_series; // one per configured probe
    double threshold = 0.0;
    double T_at_factor_100 = -1.0;  // crossing times at softer/harder
    double T_at_factor_10000 = -1.0; // thresholds; -1 means never crossed
    WaveState final_state;
};

/** One run, owning its state. The update kernel is OpenMP-parallel over row
 *  bands; a plain serial kernel is kept as the reference implementation and
 *  selected with SimConfig::parallel = false. */
class Simulator {
public:
    explicit Simulator(const SimConfig& cfg);

    void step();
    const WaveState& state() const { return state_; }
    WaveState& state() { return state_; }
    const SimConfig& config() const { return cfg_; }

    /** Evolves to t_max, blow-up or instability, recording diagnostics. */
    RunResult run();

    double initial_sup_du() const { return initial_sup_du_; }
    double threshold() const { return threshold_; }

private:
    struct StepInfo {
        double sup_du = 0.0; // at the level that was just consumed
        bool singular = false;
        bool nonfinite = false;
    };
    StepInfo advance(WaveState& st, std::vector<std::vector<double>>& scratch,
                     bool parallel) const;
    StepInfo accel_only(WaveState& st, bool parallel) const;
    StepInfo cell_pass(WaveState& st, std::vector<std::vector<double>>* out, bool parallel) const;
    StepInfo cell_pass_serial(WaveState& st, std::vector<std::vector<double>>* out) const;
    DiagnosticSample diagnostics(const WaveState& st, double t, bool use_prev_level) const;
    int region_of(double r, double t) const;
    double refine_crossing(const WaveState& snapshot, double stop_time) const;

    SimConfig cfg_;
    WaveState state_;
    std::vector<std::vector<double>> next_; // scratch level
    double initial_sup_du_ = 0.0;
    double threshold_ = 0.0;

    // compiled sparse nonlinearity
    struct ATerm { int i, l, al, be, j, ga; double coef; };
    struct CTerm { int i, l, al, be, j, ga, k, de; double coef; };
    struct BTerm { int i, j, al, k, be; double coef; };
    struct DTerm { int i, j, al, k, be, l, ga; double coef; };
    std::vector<ATerm> a_terms_;
    std::vector<CTerm> c_terms_;
    std::vector<BTerm> b_terms_;
    std::vector<DTerm> d_terms_;
};

RunResult run(const SimConfig& cfg);

struct LifespanMeasurement {
    bool reached_horizon = false; // ">= t_max"
    double T_emp = 0.0;
    RunOutcome outcome = RunOutcome::Completed;
};

/** Empirical horizon proxy: first time sup_i |du^i|_inf exceeds the blow-up
 *  threshold, refined inside the crossing step with a halved time step;
 *  "reached_horizon" when the run completes instead. */
LifespanMeasurement estimate_lifespan(const SimConfig& cfg, double epsilon);

struct ScalingRow {
    double epsilon = 0.0;
    bool reached_horizon = false;
    double T_emp = 0.0;
    double eps2_log1pT = 0.0;
    double inv_H = 0.0;
    bool flagged = false; // below (1 - tol) / H
    bool valid = true;    // false when blown up at start
};

struct ScalingStudy {
    double H = 0.0;
    double tol = 0.35;
    std::vector<ScalingRow> rows;
};

/** Runs estimate_lifespan once per epsilon (concurrently when enabled) and
 *  compares eps^2 log(1+T_emp) against 1/H with the given slack. */
ScalingStudy scaling_study(const SimConfig& cfg, const std::vector<double>& eps_list, double H,
                           double tol_scaling = 0.35, bool parallel_sweep = true);

void write_scaling_csv(const ScalingStudy& study, const std::string& path);

} // namespace qlw

#endif
