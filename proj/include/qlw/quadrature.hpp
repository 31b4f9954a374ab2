#ifndef QLW_QUADRATURE_HPP
#define QLW_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace qlw {

/** Gauss-Legendre rule on [-1, 1]. An n-point rule integrates polynomials
 *  of degree 2n-1 exactly; for entire integrands convergence is spectral. */
struct GaussRule {
    std::vector<double> x; // abscissae
    std::vector<double> w; // weights
};

/** Returns the cached n-point Gauss-Legendre rule. Thread safe. */
const GaussRule& gauss_legendre(int n);

/** Integrates f over [a, b] with an n-point Gauss-Legendre rule. */
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);

template <class F>
double integrate_gl(F&& f, double a, double b, const GaussRule& rule) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k)
        acc += rule.w[k] * f(mid + half * rule.x[k]);
    return acc * half;
}

/** Adaptive Simpson quadrature with absolute/relative tolerance.
 *  Depth-limited; intended for well-behaved 1-D integrands. */
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10, int max_depth = 48);

} // namespace qlw

#endif
