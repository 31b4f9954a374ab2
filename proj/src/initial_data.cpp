#include "qlw/initial_data.hpp"

#include <cmath>

#include "qlw/errors.hpp"

namespace qlw {

SupportedField zero_field(double support_radius) {
    return {[](double, double) { return 0.0; }, support_radius, true};
}

static double bump_profile(double r2) {
    // exp(-1/(1-r^2)) on r^2 < 1; vanishes with all derivatives at r = 1.
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2));
}

SupportedField bump_field(double amplitude, double support_radius) {
    if (support_radius <= 0.0) throw DomainError("bump: support radius must be positive");
    const double M2 = support_radius * support_radius;
    return {[amplitude, M2](double x1, double x2) {
                return amplitude * bump_profile((x1 * x1 + x2 * x2) / M2);
            },
            support_radius, true};
}

SupportedField modulated_bump_field(double amplitude, double support_radius,
                                    int angular_mode, double angular_weight) {
    if (support_radius <= 0.0) throw DomainError("bump: support radius must be positive");
    const double M2 = support_radius * support_radius;
    return {[amplitude, M2, angular_mode, angular_weight](double x1, double x2) {
                const double shape = bump_profile((x1 * x1 + x2 * x2) / M2);
                if (shape == 0.0) return 0.0;
                const double theta = std::atan2(x2, x1);
                return amplitude * (1.0 + angular_weight * std::cos(angular_mode * theta)) * shape;
            },
            support_radius, angular_mode == 0 || angular_weight == 0.0};
}

InitialDataSet InitialDataSet::single(SupportedField f1, SupportedField g1, double M) {
    InitialDataSet data;
    data.m = 1;
    data.f.push_back(std::move(f1));
    data.g.push_back(std::move(g1));
    data.M = M;
    return data;
}

} // namespace qlw
