#ifndef QLW_RICCATI_HPP
#define QLW_RICCATI_HPP

#include <functional>
#include <optional>
#include <vector>

namespace qlw {

/** Scalar Riccati problem
 *      w'(t) = alpha * w(t)^2 / (1 + t) + q(t),   T0 <= t < T1,
 *  the normal form the characteristic dynamics reduces to. */
struct RiccatiProblem {
    double alpha = 0.0;
    std::function<double(double)> q; // null means q == 0
    double t0 = 0.0;
    double w0 = 0.0;
    double t1 = 1.0;
    std::optional<double> q_star;    // integral of |q| over [t0, t1), if known

    double forcing(double t) const { return q ? q(t) : 0.0; }
};

enum class RiccatiOutcome { HorizonReached, BlowUp };

struct RiccatiSolution {
    RiccatiOutcome outcome = RiccatiOutcome::HorizonReached;
    double blowup_time = 0.0;     // valid for BlowUp
    bool step_underflow = false;  // blow-up declared because steps collapsed
    std::vector<double> t;        // accepted step times
    std::vector<double> w;        // values there
    std::vector<double> dw;       // slopes there (dense output)

    /** Cubic Hermite interpolation between accepted steps. */
    double value_at(double time) const;
};

struct RiccatiOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    long max_steps = 2'000'000;
};

/** Adaptive embedded 4(5) integration. Blow-up is declared when |w| exceeds
 *  1/tolerance; the crossing time is then extrapolated along the dominant
 *  quadratic dynamics, which pins the blow-up time to about 1e-3 relative. */
RiccatiSolution riccati_integrate(const RiccatiProblem& p, double tolerance = 1e-10,
                                  const RiccatiOptions& options = {});

/** Integral of |q| over [t0, t1), computed adaptively in log(1+t). */
double riccati_q_star(const RiccatiProblem& p);

/** A-priori envelope for |w(t)|:
 *      (1 + 1/(1 - alpha (w0 + q*) (log(1+t) - log(1+T0)))) (|w0| + q*).
 *  Validates the hypotheses q* < inf and
 *  2 alpha q* (log(1+T1) - log(1+T0)) < 1; returns nullopt once the
 *  denominator is no longer positive (bound expired). */
std::optional<double> riccati_bound(const RiccatiProblem& p, double t);

/** Closed-form blow-up time (1+T0) exp(1/(alpha w0)) - 1 of the unforced
 *  problem, +inf when alpha*w0 <= 0. */
double riccati_blowup_time_unforced(double alpha, double w0, double t0);

} // namespace qlw

#endif
