#ifndef QLW_RADIATION_HPP
#define QLW_RADIATION_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qlw/initial_data.hpp"

namespace qlw {

/** Quadrature controls for the line and profile integrals. h_s scales with
 *  the support radius; it is the step of the finite-difference stencils that
 *  supply s-derivatives of the line transform. */
struct RadiationParams {
    int n_line = 128;       // Gauss-Legendre nodes along a chord
    int n_abel = 96;        // Gauss-Legendre nodes after the square-root substitution
    double h_s_factor = 1e-4; // h_s = h_s_factor * M
};

/** Line transform: integral of h over the line {y : omega.y = s}. Exactly
 *  zero once |s| reaches the support radius. */
double radon_transform(const SupportedField& h, double s, double omega,
                       const RadiationParams& params = {});

/** Outgoing r^{-1/2} profile of the free evolution of (f^i, g^i):
 *  the half-order integral of (R_g - d/ds R_f) from rho to the support edge,
 *  evaluated after the substitution s = rho + u^2 which makes the integrand
 *  smooth. Zero for rho >= M. */
double radiation_field(const InitialDataSet& data, int i, double rho, double omega,
                       const RadiationParams& params = {});

/** First and second rho-derivatives of the profile; the derivative lands on
 *  the smooth factor after the substitution, so the same rule applies. */
std::array<double, 2> radiation_derivatives(const InitialDataSet& data, int i, double rho,
                                            double omega, const RadiationParams& params = {});

/** Sampled profile and its first two rho-derivatives on a uniform
 *  (rho, omega) grid, plus the smallest empirical constants C with
 *  |d^l F / d rho^l| <= C (1+|rho|)^{-1/2-l} over the table. */
struct RadiationTable {
    int component = 1;
    std::vector<double> rho_grid;     // uniform on [rho_min, M]
    std::vector<double> omega_grid;   // uniform on [0, 2 pi)
    std::vector<double> F, F_rho, F_rhorho; // row-major [i_rho * n_omega + i_omega]
    std::array<double, 3> decay_constant{0.0, 0.0, 0.0}; // orders 0,1,2

    // Direct evaluator (F, F_rho, F_rhorho) bound to the source data; used
    // for refinement off the grid. Not serialized.
    std::function<std::array<double, 3>(double, double)> eval;

    double at(const std::vector<double>& mat, int ir, int io) const;
    int n_rho() const { return static_cast<int>(rho_grid.size()); }
    int n_omega() const { return static_cast<int>(omega_grid.size()); }
};

struct TableBuildOptions {
    bool parallel = true;        // OpenMP over grid nodes
    bool exploit_radial = true;  // replicate the omega column for radial data
};

RadiationTable build_radiation_table(const InitialDataSet& data, int i, double rho_min,
                                     int n_rho, int n_omega, const RadiationParams& params = {},
                                     const TableBuildOptions& options = {});

/** CSV export with columns rho, omega, F, F_rho, F_rhorho. */
void write_radiation_csv(const RadiationTable& table, const std::string& path);

} // namespace qlw

#endif
