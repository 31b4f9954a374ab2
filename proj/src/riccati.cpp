#include "qlw/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlw/errors.hpp"
#include "qlw/quadrature.hpp"

namespace qlw {

double RiccatiSolution::value_at(double time) const {
    if (t.empty()) throw DomainError("riccati solution: empty trajectory");
    if (time <= t.front()) return w.front();
    if (time >= t.back()) return w.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    const double dt = t[hi] - t[lo];
    const double s = (time - t[lo]) / dt;
    if (dw.size() != w.size()) return w[lo] + s * (w[hi] - w[lo]);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * w[lo] + h10 * dt * dw[lo] + h01 * w[hi] + h11 * dt * dw[hi];
}

namespace {

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace

RiccatiSolution riccati_integrate(const RiccatiProblem& p, double tolerance,
                                  const RiccatiOptions& options) {
    if (!(p.t0 < p.t1)) throw DomainError("riccati: need T0 < T1");
    if (!(tolerance > 0.0)) throw DomainError("riccati: tolerance must be positive");
    const double w_cap = 1.0 / tolerance;

    auto rhs = [&](double t, double w) { return p.alpha * w * w / (1.0 + t) + p.forcing(t); };

    RiccatiSolution sol;
    double t = p.t0, w = p.w0;
    sol.t.push_back(t);
    sol.w.push_back(w);
    sol.dw.push_back(rhs(t, w));

    // The quadratic term acts through log(1+t), so steps are allowed to grow
    // with 1+t; this is what lets horizons of order exp(1/eps^2) terminate.
    double dt = 1e-4 * (1.0 + t);
    double k1 = rhs(t, w);

    auto declare_blowup = [&](double tb, bool underflow) {
        sol.outcome = RiccatiOutcome::BlowUp;
        sol.blowup_time = tb;
        sol.step_underflow = underflow;
    };

    for (long step = 0; step < options.max_steps; ++step) {
        if (std::abs(w) > w_cap || !std::isfinite(w)) {
            // Threshold reached: the remaining time along w' = alpha w^2/(1+t)
            // is log-exactly 1/(alpha w); extrapolate with it.
            double tb = t;
            if (std::isfinite(w) && p.alpha * w > 0.0)
                tb = (1.0 + t) * std::exp(1.0 / (p.alpha * w)) - 1.0;
            declare_blowup(tb, false);
            return sol;
        }
        if (t >= p.t1) {
            sol.outcome = RiccatiOutcome::HorizonReached;
            return sol;
        }
        dt = std::min(dt, p.t1 - t);
        if (dt <= 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + t)) {
            declare_blowup(t, true);
            return sol;
        }

        const double k2 = rhs(t + c2 * dt, w + dt * a21 * k1);
        const double k3 = rhs(t + c3 * dt, w + dt * (a31 * k1 + a32 * k2));
        const double k4 = rhs(t + c4 * dt, w + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = rhs(t + c5 * dt, w + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 =
            rhs(t + dt, w + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double w_new = w + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double k7 = rhs(t + dt, w_new);
        const double err_raw =
            dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double scale =
            options.atol + options.rtol * std::max(std::abs(w), std::abs(w_new));
        const double err = std::abs(err_raw) / scale;

        if (err <= 1.0 || !std::isfinite(err)) {
            if (!std::isfinite(w_new)) {
                declare_blowup(t, false);
                return sol;
            }
            t += dt;
            w = w_new;
            k1 = k7; // FSAL
            sol.t.push_back(t);
            sol.w.push_back(w);
            sol.dw.push_back(k1);
        }
        const double grow = std::isfinite(err)
                                ? 0.9 * std::pow(std::max(err, 1e-10), -0.2)
                                : 0.1;
        dt *= std::clamp(grow, 0.1, 5.0);
        dt = std::min(dt, 0.25 * (1.0 + t));
    }
    throw NumericalError("riccati: step budget exhausted before horizon or blow-up");
}

double riccati_q_star(const RiccatiProblem& p) {
    if (p.q_star) return *p.q_star;
    if (!p.q) return 0.0;
    // Integrate |q| in tau = log(1+t); dt = e^tau dtau.
    const double tau0 = std::log1p(p.t0), tau1 = std::log1p(p.t1);
    const double val = integrate_adaptive(
        [&](double tau) {
            const double t = std::expm1(tau);
            return std::abs(p.forcing(t)) * (1.0 + t);
        },
        tau0, tau1, 1e-12, 56);
    return val;
}

std::optional<double> riccati_bound(const RiccatiProblem& p, double t) {
    const double qs = riccati_q_star(p);
    if (!std::isfinite(qs)) throw DomainError("riccati bound: q* is not finite");
    const double dlog_total = std::log1p(p.t1) - std::log1p(p.t0);
    if (!(2.0 * p.alpha * qs * dlog_total < 1.0))
        throw DomainError("riccati bound: hypothesis 2 alpha q* dlog < 1 fails");
    if (t < p.t0) throw DomainError("riccati bound: t below T0");
    const double dlog = std::log1p(t) - std::log1p(p.t0);
    const double denom = 1.0 - p.alpha * (p.w0 + qs) * dlog;
    if (!(denom > 0.0)) return std::nullopt; // bound expired
    return (1.0 + 1.0 / denom) * (std::abs(p.w0) + qs);
}

double riccati_blowup_time_unforced(double alpha, double w0, double t0) {
    if (alpha * w0 <= 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 + t0) * std::exp(1.0 / (alpha * w0)) - 1.0;
}

} // namespace qlw
