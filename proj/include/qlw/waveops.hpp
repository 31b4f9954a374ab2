#ifndef QLW_WAVEOPS_HPP
#define QLW_WAVEOPS_HPP

#include <array>
#include <functional>

#include "qlw/grid.hpp"
#include "qlw/initial_data.hpp"
#include "qlw/nullform.hpp"

namespace qlw {

struct SpacetimePoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double t = 0.0;
};

/** Quadrature controls for the disk-integral representations. The radial
 *  direction uses the substitution r = R sin(phi), which removes the
 *  inverse-square-root edge singularity analytically; h_t is the step of the
 *  time-difference stencils. */
struct PoissonParams {
    int n_phi = 128;
    int n_theta = 256;
    double h_t = 1e-3;
};

/** Free evolution of (f^i, g^i) at speed c, via the 2-D disk-integral
 *  representation. Returns (u, du/dt). The quadrature windows track the data
 *  support so the rule stays sharp far along the cone. */
std::array<double, 2> linear_solution(const InitialDataSet& data, int i, double c,
                                      const SpacetimePoint& p, const PoissonParams& params = {});

/** Retarded volume potential
 *  (1/(2 pi c)) int_0^t int_{|x-y|<c(t-s)} F(y,s)/sqrt(c^2(t-s)^2-|x-y|^2) dy ds,
 *  the zero-data solution with forcing F. Nested rule: outer s, inner disk
 *  with the same substitution. */
using SpacetimeSampler = std::function<double(double, double, double)>;
double duhamel(const SpacetimeSampler& F, double c, const SpacetimePoint& p,
               const PoissonParams& params = {}, int n_s = 32);

/** The five commuting generators: translations d/dt, d/dx1, d/dx2,
 *  rotation x1 d2 - x2 d1, scaling t d0 + x1 d1 + x2 d2. */
enum class Generator : int { Dt = 0, Dx1 = 1, Dx2 = 2, Rotation = 3, Scaling = 4 };

/** Applies one generator by 4th-order central differences at every level
 *  where the time stencil fits; spatial margins grow by 2, the stack loses
 *  2 levels per side for the time derivative. */
GridFieldStack apply_gamma_stack(const GridFieldStack& stack, Generator k);
GridField apply_gamma(const GridFieldStack& stack, Generator k);

/** Null-adapted derivative c_i d_alpha + (x_alpha/|x|) d_t for alpha = 1, 2.
 *  Cells with |x| < 2h are masked. */
GridField apply_Z(const GridFieldStack& stack, const SpeedVector& speeds, int i, int alpha);

/** The same operator assembled from its decomposition
 *  ((c_i t - |x|)/t) d_alpha + (x_alpha S -/+ x_{3-alpha} Rotation)/(|x| t),
 *  kept as a cross-check of the identity. Requires t != 0. */
GridField apply_Z_decomposed(const GridFieldStack& stack, const SpeedVector& speeds, int i,
                             int alpha);

/** Slab index of a spacetime point: i when ||x| - c_i t| <= c_* t, else 0.
 *  The slabs are pairwise disjoint for t > 0. */
int region_classify(const SpacetimePoint& p, const SpeedVector& speeds);

/** Weight (1+s+lambda)^{1+mu} (1+|lambda-c_j s|)^{1+nu} with the c_0 = 0
 *  convention for j = 0. */
double weight_z(int j, double mu, double nu, double lambda, double s,
                const SpeedVector& speeds);

enum class NormKind {
    Bracket,    // sup of (1+|x|)^{1/2} (1+||x|-c_i t|)^{15/16} sum |G^a v|
    DblBracket, // cone-distance exponent 1
    Angle,      // sup of (1+|x|+t)^{7/16} sum |G^a v|
    DblAngle,   // exponent 1/2
    L2,         // sum over a of ||G^a v||_{L^2}
    Sup         // sup of sum |G^a v|
};

/** Discrete weighted norm of order k <= 2 of a single-component field given
 *  as a time stack (enough levels for the nested time stencils). Cells where
 *  any stencil was invalid are skipped; reductions run in a fixed traversal
 *  order. */
double weighted_norm(const GridFieldStack& stack, NormKind kind, const SpeedVector& speeds,
                     int i, int k);

} // namespace qlw

#endif
