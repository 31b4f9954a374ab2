#ifndef QLW_LIFESPAN_HPP
#define QLW_LIFESPAN_HPP

#include <functional>
#include <optional>
#include <vector>

#include "qlw/nullform.hpp"
#include "qlw/radiation.hpp"

namespace qlw {

/** Blow-up constant and the horizon it predicts. H = max_i H_i with
 *  H_i = max over (rho, omega) of -Theta_i^i(-c_i, omega) F' F'' / c_i^2;
 *  the log horizon is 1/(H eps^2) and the time horizon exp of it minus one
 *  (saturating to +inf). The prediction is a lower-bound claim. */
struct LifespanEstimate {
    double H = 0.0;
    std::vector<double> per_component;
    double epsilon = 0.0;
    double predicted_log_horizon = 0.0; // +inf when H == 0
    double predicted_T = 0.0;           // may saturate to +inf

    // Diagnostics from the maximization.
    int argmax_component = 0;
    double argmax_rho = 0.0;
    double argmax_omega = 0.0;
    bool argmax_on_boundary = false; // maximizer sits on the table edge
};

/** Grid scan over the tables followed by golden-section refinement in rho
 *  at the best node. One table per component. The raw maximum is reported
 *  (no clamping); nonnegativity is guaranteed because the profile vanishes
 *  at the support edge, which every table contains. */
LifespanEstimate compute_H(const CoefficientSet& coeffs, const SpeedVector& speeds,
                           const std::vector<RadiationTable>& tables);

/** Fills epsilon-dependent fields: log horizon 1/(H eps^2) and
 *  T = exp(1/(H eps^2)) - 1; unbounded when H == 0. */
LifespanEstimate predict_lifespan(double H, double epsilon);
void apply_epsilon(LifespanEstimate& est, double epsilon);

/** Radial sampler of d/dt u^i(r omega, t) along a fixed direction. */
using FieldSampler = std::function<double(double r, double t)>;

struct CharCurveConfig {
    double epsilon = 0.1;              // sets the default start time rule
    std::optional<double> t0_override; // bypass the rule
    double dt = 1e-2;
    double t_end = 10.0;
};

/** Outgoing curve r(t) with dr/dt = c_i + Theta_i^i(-c_i, omega)
 *  (du/dt)^2 / (2 c_i^3), started on r(t0) = c_i t0 + lambda. By default
 *  t0 = 1/eps for |lambda| < eps^{-1/4} and t0 = lambda^4 otherwise, which
 *  places the start on the inner cone boundary. */
struct CharCurveState {
    int component = 1;
    double lambda = 0.0;
    double omega = 0.0;
    double t0 = 0.0;
    std::vector<double> t;
    std::vector<double> r;
};

CharCurveState characteristic_curve(int i, double lambda, double omega,
                                    const FieldSampler& du0, const CoefficientSet& coeffs,
                                    const SpeedVector& speeds, const CharCurveConfig& config);

} // namespace qlw

#endif
