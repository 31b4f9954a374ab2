#include "qlw/lifespan.hpp"

#include <cmath>
#include <limits>

#include "qlw/errors.hpp"

namespace qlw {

namespace {

double theta_on_cone(const CoefficientSet& coeffs, int i, double ci, double omega) {
    return eval_form(FormKind::Theta, coeffs, i, i, {-ci, std::cos(omega), std::sin(omega)});
}

// Golden-section maximization on [a, b] for a smooth scalar function.
double golden_max(const std::function<double(double)>& f, double a, double b, double& xbest) {
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int iter = 0; iter < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a)); ++iter) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if (f1 >= f2) {
        xbest = x1;
        return f1;
    }
    xbest = x2;
    return f2;
}

} // namespace

LifespanEstimate compute_H(const CoefficientSet& coeffs, const SpeedVector& speeds,
                           const std::vector<RadiationTable>& tables) {
    const int m = speeds.m();
    if (coeffs.m() != m) throw DomainError("compute_H: coefficients and speeds disagree on m");
    if (tables.size() != static_cast<std::size_t>(m))
        throw DomainError("compute_H: need one radiation table per component");

    LifespanEstimate est;
    est.per_component.assign(m, 0.0);

    for (int i = 1; i <= m; ++i) {
        const RadiationTable& table = tables[static_cast<std::size_t>(i - 1)];
        if (table.component != i)
            throw DomainError("compute_H: table order must match component order");
        if (table.n_rho() < 2) throw DomainError("compute_H: table too small");
        const double ci = speeds.c(i);
        const double inv_c2 = 1.0 / (ci * ci);

        double best = -std::numeric_limits<double>::infinity();
        int best_r = 0, best_o = 0;
        for (int r = 0; r < table.n_rho(); ++r)
            for (int o = 0; o < table.n_omega(); ++o) {
                const double theta = theta_on_cone(coeffs, i, ci, table.omega_grid[o]);
                const double val =
                    -inv_c2 * theta * table.at(table.F_rho, r, o) * table.at(table.F_rhorho, r, o);
                if (val > best) {
                    best = val;
                    best_r = r;
                    best_o = o;
                }
            }

        // Refine in rho around the winning node at fixed omega.
        const double omega = table.omega_grid[best_o];
        const double theta = theta_on_cone(coeffs, i, ci, omega);
        double hi_val = best, hi_rho = table.rho_grid[best_r];
        if (theta != 0.0 && table.eval) {
            const double drho = table.rho_grid[1] - table.rho_grid[0];
            const double lo = table.rho_grid[best_r] - drho;
            const double hi = table.rho_grid[best_r] + drho;
            double xbest = hi_rho;
            const double refined = golden_max(
                [&](double rho) {
                    const auto v = table.eval(rho, omega);
                    return -inv_c2 * theta * v[1] * v[2];
                },
                lo, hi, xbest);
            if (refined > hi_val) {
                hi_val = refined;
                hi_rho = xbest;
            }
        }

        est.per_component[static_cast<std::size_t>(i - 1)] = hi_val;
        if (i == 1 || hi_val > est.H) {
            est.H = hi_val;
            est.argmax_component = i;
            est.argmax_rho = hi_rho;
            est.argmax_omega = omega;
            est.argmax_on_boundary = best_r == 0 || best_r == table.n_rho() - 1;
        }
    }
    // The maximized quantity vanishes at the support edge, which every table
    // contains, so a negative maximum means a broken table.
    if (est.H < 0.0)
        throw NumericalError("compute_H: negative maximum; table does not reach the support edge");
    return est;
}

void apply_epsilon(LifespanEstimate& est, double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("predict_lifespan: epsilon must be positive");
    est.epsilon = epsilon;
    if (est.H > 0.0) {
        est.predicted_log_horizon = 1.0 / (est.H * epsilon * epsilon);
        est.predicted_T = std::expm1(est.predicted_log_horizon); // may overflow to +inf
    } else {
        est.predicted_log_horizon = std::numeric_limits<double>::infinity();
        est.predicted_T = std::numeric_limits<double>::infinity();
    }
}

LifespanEstimate predict_lifespan(double H, double epsilon) {
    if (H < 0.0) throw DomainError("predict_lifespan: H must be nonnegative");
    LifespanEstimate est;
    est.H = H;
    est.per_component = {H};
    apply_epsilon(est, epsilon);
    return est;
}

CharCurveState characteristic_curve(int i, double lambda, double omega,
                                    const FieldSampler& du0, const CoefficientSet& coeffs,
                                    const SpeedVector& speeds, const CharCurveConfig& config) {
    if (i < 1 || i > speeds.m()) throw DomainError("characteristic_curve: bad component");
    if (!(config.dt > 0.0)) throw DomainError("characteristic_curve: dt must be positive");
    const double ci = speeds.c(i);
    const double theta = theta_on_cone(coeffs, i, ci, omega);
    const double slope_factor = theta / (2.0 * ci * ci * ci);

    double t0;
    if (config.t0_override) {
        t0 = *config.t0_override;
    } else {
        if (!(config.epsilon > 0.0))
            throw DomainError("characteristic_curve: epsilon must be positive");
        const double lam_cut = std::pow(config.epsilon, -0.25);
        t0 = (std::abs(lambda) < lam_cut) ? 1.0 / config.epsilon
                                          : lambda * lambda * lambda * lambda;
    }
    if (!(t0 < config.t_end)) throw DomainError("characteristic_curve: t0 >= t_end");

    auto slope = [&](double r, double t) {
        const double du = du0(r, t);
        return ci + slope_factor * du * du;
    };

    CharCurveState curve;
    curve.component = i;
    curve.lambda = lambda;
    curve.omega = omega;
    curve.t0 = t0;

    double t = t0;
    double r = ci * t0 + lambda;
    if (!(r > 0.0)) throw DomainError("characteristic_curve: start radius not positive");
    curve.t.push_back(t);
    curve.r.push_back(r);

    while (t < config.t_end) {
        const double dt = std::min(config.dt, config.t_end - t);
        const double k1 = slope(r, t);
        const double k2 = slope(r + 0.5 * dt * k1, t + 0.5 * dt);
        const double k3 = slope(r + 0.5 * dt * k2, t + 0.5 * dt);
        const double k4 = slope(r + dt * k3, t + dt);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        if (!(r > 0.0) || !std::isfinite(r))
            throw NumericalError("characteristic_curve: radius left (0, inf)");
        curve.t.push_back(t);
        curve.r.push_back(r);
    }
    return curve;
}

} // namespace qlw
