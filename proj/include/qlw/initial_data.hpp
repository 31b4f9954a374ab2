#ifndef QLW_INITIAL_DATA_HPP
#define QLW_INITIAL_DATA_HPP

#include <functional>
#include <vector>

namespace qlw {

using ScalarField2D = std::function<double(double, double)>;

/** A pointwise-evaluable field together with what the quadratures need to
 *  know about it: the support radius and whether it is radially symmetric. */
struct SupportedField {
    ScalarField2D eval;
    double support_radius = 0.0;
    bool radial = false;

    double operator()(double x1, double x2) const { return eval(x1, x2); }
};

/** Zero field (radial, any support radius). */
SupportedField zero_field(double support_radius);

/** amplitude * exp(-1 / (1 - |x/M|^2)) for |x| < M, zero outside. */
SupportedField bump_field(double amplitude, double support_radius);

/** Angular modulation of the bump:
 *  amplitude * (1 + weight * cos(mode * theta)) * exp(-1 / (1 - |x/M|^2)). */
SupportedField modulated_bump_field(double amplitude, double support_radius,
                                    int angular_mode, double angular_weight);

/** Initial Cauchy data (f^i, g^i), all supported in |x| <= M. The amplitude
 *  factor epsilon is applied by consumers, not stored here. */
struct InitialDataSet {
    int m = 0;
    std::vector<SupportedField> f; // displacement data
    std::vector<SupportedField> g; // velocity data
    double M = 0.0;                // common support radius

    static InitialDataSet single(SupportedField f1, SupportedField g1, double M);
};

} // namespace qlw

#endif
