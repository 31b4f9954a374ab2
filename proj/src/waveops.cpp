#include "qlw/waveops.hpp"

#include <cmath>

#include "qlw/errors.hpp"
#include "qlw/quadrature.hpp"
#include "qlw/weights.hpp"

namespace qlw {

// ---------------------------------------------------------------------------
// Disk integrals int_{B(x,R)} h(y) / sqrt(R^2 - |x-y|^2) dy.
//
// In polar coordinates around x the radial factor r dr / sqrt(R^2 - r^2)
// becomes R sin(phi) dphi under r = R sin(phi), so the edge singularity is
// gone and the integrand is smooth.

namespace {

// Full disk, no support information (used by the retarded potential).
double disk_integral_full(const std::function<double(double, double)>& h, double x1, double x2,
                          double R, const PoissonParams& params) {
    if (!(R > 0.0)) return 0.0;
    const GaussRule& phi_rule = gauss_legendre(params.n_phi);
    const int n_theta = params.n_theta;
    double acc = 0.0;
    for (std::size_t kp = 0; kp < phi_rule.x.size(); ++kp) {
        const double phi = 0.25 * M_PI * (1.0 + phi_rule.x[kp]); // [0, pi/2]
        const double r = R * std::sin(phi);
        double ring = 0.0;
        for (int kt = 0; kt < n_theta; ++kt) {
            const double theta = 2.0 * M_PI * kt / n_theta;
            ring += h(x1 + r * std::cos(theta), x2 + r * std::sin(theta));
        }
        acc += phi_rule.w[kp] * std::sin(phi) * ring;
    }
    // phi half-interval * trapezoid step * R
    return acc * (0.25 * M_PI) * (2.0 * M_PI / n_theta) * R;
}

// Disk integral of a compactly supported field: the radial and angular
// windows are clipped to the part of B(x,R) that can meet the support disk
// B(0,M), which keeps the nodes on the data when R >> M.
double disk_integral_supported(const SupportedField& h, double x1, double x2, double R,
                               const PoissonParams& params) {
    if (!(R > 0.0)) return 0.0;
    const double M = h.support_radius;
    const double d = std::hypot(x1, x2);
    const double r_lo = std::max(0.0, d - M);
    const double r_hi = std::min(R, d + M);
    if (!(r_lo < r_hi)) return 0.0;

    const double phi_lo = std::asin(std::min(1.0, r_lo / R));
    const double phi_hi = (r_hi >= R) ? 0.5 * M_PI : std::asin(r_hi / R);
    if (!(phi_lo < phi_hi)) return 0.0;

    const GaussRule& phi_rule = gauss_legendre(params.n_phi);
    const double phi_mid = 0.5 * (phi_lo + phi_hi), phi_half = 0.5 * (phi_hi - phi_lo);

    const bool full_circle = d <= M;
    const GaussRule& theta_rule = gauss_legendre(params.n_theta);
    double theta0 = 0.0, beta = M_PI;
    if (!full_circle) {
        theta0 = std::atan2(-x2, -x1);          // towards the support
        beta = std::asin(std::min(1.0, M / d)); // half-angle subtended by it
    }

    double acc = 0.0;
    for (std::size_t kp = 0; kp < phi_rule.x.size(); ++kp) {
        const double phi = phi_mid + phi_half * phi_rule.x[kp];
        const double r = R * std::sin(phi);
        double ring = 0.0;
        if (full_circle) {
            const int n_theta = params.n_theta;
            for (int kt = 0; kt < n_theta; ++kt) {
                const double theta = 2.0 * M_PI * kt / n_theta;
                ring += h(x1 + r * std::cos(theta), x2 + r * std::sin(theta));
            }
            ring *= 2.0 * M_PI / n_theta;
        } else {
            for (std::size_t kt = 0; kt < theta_rule.x.size(); ++kt) {
                const double theta = theta0 + beta * theta_rule.x[kt];
                ring += theta_rule.w[kt] * h(x1 + r * std::cos(theta), x2 + r * std::sin(theta));
            }
            ring *= beta;
        }
        acc += phi_rule.w[kp] * std::sin(phi) * ring;
    }
    return acc * phi_half * R;
}

} // namespace

std::array<double, 2> linear_solution(const InitialDataSet& data, int i, double c,
                                      const SpacetimePoint& p, const PoissonParams& params) {
    if (i < 1 || i > data.m) throw DomainError("linear_solution: component index out of range");
    if (!(c > 0.0)) throw DomainError("linear_solution: speed must be positive");
    if (p.t < 0.0) throw DomainError("linear_solution: t must be nonnegative");
    const SupportedField& f = data.f[static_cast<std::size_t>(i - 1)];
    const SupportedField& g = data.g[static_cast<std::size_t>(i - 1)];
    if (p.t == 0.0) return {f(p.x1, p.x2), g(p.x1, p.x2)};

    const double ht = std::min(params.h_t, 0.45 * p.t);
    auto If = [&](double t) { return disk_integral_supported(f, p.x1, p.x2, c * t, params); };
    auto Ig = [&](double t) { return disk_integral_supported(g, p.x1, p.x2, c * t, params); };

    const double fm = If(p.t - ht), f0 = If(p.t), fp = If(p.t + ht);
    const double gm = Ig(p.t - ht), g0 = Ig(p.t), gp = Ig(p.t + ht);

    const double pref = 1.0 / (2.0 * M_PI * c);
    const double u = pref * ((fp - fm) / (2.0 * ht) + g0);
    const double ut = pref * ((fp - 2.0 * f0 + fm) / (ht * ht) + (gp - gm) / (2.0 * ht));
    return {u, ut};
}

double duhamel(const SpacetimeSampler& F, double c, const SpacetimePoint& p,
               const PoissonParams& params, int n_s) {
    if (!(c > 0.0)) throw DomainError("duhamel: speed must be positive");
    if (p.t < 0.0) throw DomainError("duhamel: t must be nonnegative");
    if (p.t == 0.0) return 0.0;
    const GaussRule& s_rule = gauss_legendre(n_s);
    const double val = integrate_gl(
        [&](double s) {
            auto slice = [&](double y1, double y2) { return F(y1, y2, s); };
            return disk_integral_full(slice, p.x1, p.x2, c * (p.t - s), params);
        },
        0.0, p.t, s_rule);
    return val / (2.0 * M_PI * c);
}

// ---------------------------------------------------------------------------
// Generators and null-adapted derivatives, all 4th-order central stencils.

namespace {

constexpr int kStencilMargin = 2;

double dx4(const GridField& f, int ix, int iy, int axis) {
    if (axis == 1)
        return (-f.at(ix + 2, iy) + 8.0 * f.at(ix + 1, iy) - 8.0 * f.at(ix - 1, iy) +
                f.at(ix - 2, iy)) /
               (12.0 * f.h);
    return (-f.at(ix, iy + 2) + 8.0 * f.at(ix, iy + 1) - 8.0 * f.at(ix, iy - 1) +
            f.at(ix, iy - 2)) /
           (12.0 * f.h);
}

double dt4(const GridFieldStack& stack, int lev, int ix, int iy) {
    const auto& L = stack.levels;
    return (-L[lev + 2].at(ix, iy) + 8.0 * L[lev + 1].at(ix, iy) - 8.0 * L[lev - 1].at(ix, iy) +
            L[lev - 2].at(ix, iy)) /
           (12.0 * stack.dt);
}

void require_levels(const GridFieldStack& stack, int needed) {
    if (stack.count() < needed)
        throw DomainError("field stack provides too few time levels for the requested stencil");
}

} // namespace

GridFieldStack apply_gamma_stack(const GridFieldStack& stack, Generator k) {
    require_levels(stack, 5);
    GridFieldStack out;
    out.dt = stack.dt;
    const int n = stack.count();
    for (int lev = kStencilMargin; lev < n - kStencilMargin; ++lev) {
        const GridField& src = stack.levels[static_cast<std::size_t>(lev)];
        GridField dst = GridField::make(src.nx, src.ny, src.h, src.t, src.component);
        dst.margin = src.margin + kStencilMargin;
        for (int iy = dst.margin; iy < src.ny - dst.margin; ++iy)
            for (int ix = dst.margin; ix < src.nx - dst.margin; ++ix) {
                double v = 0.0;
                switch (k) {
                    case Generator::Dt: v = dt4(stack, lev, ix, iy); break;
                    case Generator::Dx1: v = dx4(src, ix, iy, 1); break;
                    case Generator::Dx2: v = dx4(src, ix, iy, 2); break;
                    case Generator::Rotation:
                        v = src.x_of(ix) * dx4(src, ix, iy, 2) - src.y_of(iy) * dx4(src, ix, iy, 1);
                        break;
                    case Generator::Scaling:
                        v = src.t * dt4(stack, lev, ix, iy) + src.x_of(ix) * dx4(src, ix, iy, 1) +
                            src.y_of(iy) * dx4(src, ix, iy, 2);
                        break;
                }
                dst.at(ix, iy) = v;
            }
        out.levels.push_back(std::move(dst));
    }
    return out;
}

GridField apply_gamma(const GridFieldStack& stack, Generator k) {
    GridFieldStack reduced = apply_gamma_stack(stack, k);
    return reduced.levels[static_cast<std::size_t>(reduced.center())];
}

GridField apply_Z(const GridFieldStack& stack, const SpeedVector& speeds, int i, int alpha) {
    require_levels(stack, 5);
    if (alpha != 1 && alpha != 2) throw DomainError("apply_Z: alpha must be 1 or 2");
    const double ci = speeds.c(i);
    const int lev = stack.center();
    const GridField& src = stack.center_field();
    GridField dst = GridField::make(src.nx, src.ny, src.h, src.t, src.component);
    dst.margin = src.margin + kStencilMargin;
    const double rmin = 2.0 * src.h;
    for (int iy = dst.margin; iy < src.ny - dst.margin; ++iy)
        for (int ix = dst.margin; ix < src.nx - dst.margin; ++ix) {
            const double x1 = src.x_of(ix), x2 = src.y_of(iy);
            const double r = std::hypot(x1, x2);
            if (r < rmin) {
                dst.mask(ix, iy);
                continue;
            }
            const double xa = (alpha == 1) ? x1 : x2;
            dst.at(ix, iy) = ci * dx4(src, ix, iy, alpha) + (xa / r) * dt4(stack, lev, ix, iy);
        }
    return dst;
}

GridField apply_Z_decomposed(const GridFieldStack& stack, const SpeedVector& speeds, int i,
                             int alpha) {
    require_levels(stack, 5);
    if (alpha != 1 && alpha != 2) throw DomainError("apply_Z: alpha must be 1 or 2");
    const double ci = speeds.c(i);
    const int lev = stack.center();
    const GridField& src = stack.center_field();
    const double t = src.t;
    if (t == 0.0) throw DomainError("apply_Z_decomposed: t must be nonzero");
    GridField dst = GridField::make(src.nx, src.ny, src.h, src.t, src.component);
    dst.margin = src.margin + kStencilMargin;
    const double rmin = 2.0 * src.h;
    for (int iy = dst.margin; iy < src.ny - dst.margin; ++iy)
        for (int ix = dst.margin; ix < src.nx - dst.margin; ++ix) {
            const double x1 = src.x_of(ix), x2 = src.y_of(iy);
            const double r = std::hypot(x1, x2);
            if (r < rmin) {
                dst.mask(ix, iy);
                continue;
            }
            const double d1 = dx4(src, ix, iy, 1);
            const double d2 = dx4(src, ix, iy, 2);
            const double d0 = dt4(stack, lev, ix, iy);
            const double S = t * d0 + x1 * d1 + x2 * d2;
            const double Om = x1 * d2 - x2 * d1;
            const double radial = (ci * t - r) / t;
            if (alpha == 1)
                dst.at(ix, iy) = radial * d1 + (x1 * S - x2 * Om) / (r * t);
            else
                dst.at(ix, iy) = radial * d2 + (x2 * S + x1 * Om) / (r * t);
        }
    return dst;
}

int region_classify(const SpacetimePoint& p, const SpeedVector& speeds) {
    if (p.t < 0.0) throw DomainError("region_classify: t must be nonnegative");
    if (p.t == 0.0) return 0; // slabs have zero width at t = 0
    const double r = std::hypot(p.x1, p.x2);
    const double half_width = speeds.c_star() * p.t;
    for (int i = 1; i <= speeds.m(); ++i)
        if (std::abs(r - speeds.c(i) * p.t) <= half_width) return i;
    return 0;
}

double weight_z(int j, double mu, double nu, double lambda, double s,
                const SpeedVector& speeds) {
    if (j < 0 || j > speeds.m()) throw DomainError("weight_z: region index out of range 0..m");
    if (lambda < 0.0 || s < 0.0) throw DomainError("weight_z: lambda and s must be nonnegative");
    const double cj = (j == 0) ? 0.0 : speeds.c(j);
    return std::pow(1.0 + s + lambda, 1.0 + mu) * std::pow(1.0 + std::abs(lambda - cj * s), 1.0 + nu);
}

// ---------------------------------------------------------------------------
// Weighted norms over all multi-indices |a| <= k.

double weighted_norm(const GridFieldStack& stack, NormKind kind, const SpeedVector& speeds,
                     int i, int k) {
    if (k < 0 || k > 2)
        throw DomainError("weighted_norm: unsupported order (k <= 2 at this scale)");
    require_levels(stack, 1 + 4 * k);
    const double ci = speeds.c(i);

    // All canonical generator words of length <= k. The generators commute
    // only partially, but the norm sums |G^a v| over the canonical ordered
    // powers, realized here as ordered words g1 <= g2 <= ...
    std::vector<GridField> terms;
    terms.push_back(stack.center_field());
    std::vector<std::pair<GridFieldStack, int>> frontier; // stack + last generator
    if (k >= 1) {
        for (int g = 0; g < 5; ++g) {
            GridFieldStack applied = apply_gamma_stack(stack, static_cast<Generator>(g));
            terms.push_back(applied.levels[static_cast<std::size_t>(applied.center())]);
            if (k >= 2) frontier.emplace_back(std::move(applied), g);
        }
        for (auto& [st, g1] : frontier)
            for (int g2 = g1; g2 < 5; ++g2) {
                GridField f = apply_gamma(st, static_cast<Generator>(g2));
                terms.push_back(std::move(f));
            }
    }

    int margin = 0;
    for (const auto& f : terms) margin = std::max(margin, f.margin);
    const GridField& base = stack.center_field();
    const double t = base.t;

    if (kind == NormKind::L2) {
        double total = 0.0;
        for (const auto& f : terms) {
            double sq = 0.0;
            for (int iy = margin; iy < f.ny - margin; ++iy)
                for (int ix = margin; ix < f.nx - margin; ++ix) {
                    const double v = f.at(ix, iy);
                    sq += v * v;
                }
            total += std::sqrt(sq * f.h * f.h);
        }
        return total;
    }

    double best = 0.0;
    for (int iy = margin; iy < base.ny - margin; ++iy)
        for (int ix = margin; ix < base.nx - margin; ++ix) {
            double agg = 0.0;
            for (const auto& f : terms) agg += std::abs(f.at(ix, iy));
            const double r = std::hypot(base.x_of(ix), base.y_of(iy));
            double w = 1.0;
            switch (kind) {
                case NormKind::Bracket:
                    w = std::pow(1.0 + r, kRadialExponent) *
                        std::pow(1.0 + std::abs(r - ci * t), kConeExponentBracket);
                    break;
                case NormKind::DblBracket:
                    w = std::pow(1.0 + r, kRadialExponent) *
                        std::pow(1.0 + std::abs(r - ci * t), kConeExponentDouble);
                    break;
                case NormKind::Angle:
                    w = std::pow(1.0 + r + t, kAngleExponent);
                    break;
                case NormKind::DblAngle:
                    w = std::pow(1.0 + r + t, kAngleExponentDouble);
                    break;
                case NormKind::Sup:
                    w = 1.0;
                    break;
                case NormKind::L2:
                    break;
            }
            best = std::max(best, w * agg);
        }
    return best;
}

} // namespace qlw
