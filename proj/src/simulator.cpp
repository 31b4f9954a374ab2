#include "qlw/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qlw/errors.hpp"
#include "qlw/weights.hpp"

namespace qlw {

// ---------------------------------------------------------------------------
// Configuration

void SimConfig::validate() const {
    if (coeffs.m() != speeds.m() || data.m != speeds.m())
        throw DomainError("simulator: coefficients, speeds and data disagree on m");
    if (!(epsilon > 0.0)) throw DomainError("simulator: epsilon must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError("simulator: cfl must lie in (0, 1]");
    if (grid.nx < 16) throw DomainError("simulator: grid too small (nx >= 16)");
    if (!(t_max > 0.0)) throw DomainError("simulator: t_max must be positive");
    if (!(output_cadence > 0.0)) throw DomainError("simulator: output cadence must be positive");
    if (blowup_factor <= 1.0 && blowup_threshold == 0.0)
        throw DomainError("simulator: blow-up factor must exceed 1");
    // Waves must never reach the boundary: the domain has to contain the
    // forward cone of the data support.
    const double needed = speeds.c_max() * t_max + data.M;
    if (grid.extent < needed)
        throw DomainError("simulator: extent too small for support containment "
                          "(need extent >= c_m t_max + M)");
    for (const auto& probe : probes)
        if (probe.component < 1 || probe.component > speeds.m())
            throw DomainError("simulator: probe component out of range");
}

double SimConfig::dt() const { return cfl * h() / (std::sqrt(2.0) * speeds.c_max()); }

// ---------------------------------------------------------------------------
// State

GridField WaveState::field(int i) const {
    GridField f = GridField::make(nx, nx, h, t, i);
    f.values = u[static_cast<std::size_t>(i - 1)];
    return f;
}

GridField WaveState::dt_field(int i) const {
    GridField f = GridField::make(nx, nx, h, t, i);
    f.values = dtu[static_cast<std::size_t>(i - 1)];
    return f;
}

namespace {

// Dense per-cell derivative bundle for one component.
struct CellDerivs {
    double ux, uy, uxx, uyy, uxy, dtux, dtuy, lap;
};

inline CellDerivs cell_derivs(const double* u, const double* dtu, int idx, int nx, double h) {
    CellDerivs d;
    const double inv2h = 0.5 / h, invh2 = 1.0 / (h * h);
    d.ux = (u[idx + 1] - u[idx - 1]) * inv2h;
    d.uy = (u[idx + nx] - u[idx - nx]) * inv2h;
    d.uxx = (u[idx + 1] - 2.0 * u[idx] + u[idx - 1]) * invh2;
    d.uyy = (u[idx + nx] - 2.0 * u[idx] + u[idx - nx]) * invh2;
    d.uxy = (u[idx + nx + 1] - u[idx + nx - 1] - u[idx - nx + 1] + u[idx - nx - 1]) *
            (0.25 * invh2);
    d.dtux = (dtu[idx + 1] - dtu[idx - 1]) * inv2h;
    d.dtuy = (dtu[idx + nx] - dtu[idx - nx]) * inv2h;
    d.lap = d.uxx + d.uyy;
    return d;
}

// Solves the small dense system M x = rhs in place; false when singular.
bool solve_small(std::vector<double>& M, std::vector<double>& rhs, int m) {
    for (int col = 0; col < m; ++col) {
        int piv = col;
        double best = std::abs(M[static_cast<std::size_t>(col) * m + col]);
        for (int row = col + 1; row < m; ++row) {
            const double cand = std::abs(M[static_cast<std::size_t>(row) * m + col]);
            if (cand > best) {
                best = cand;
                piv = row;
            }
        }
        if (best < 1e-12) return false;
        if (piv != col) {
            for (int c2 = 0; c2 < m; ++c2)
                std::swap(M[static_cast<std::size_t>(piv) * m + c2],
                          M[static_cast<std::size_t>(col) * m + c2]);
            std::swap(rhs[static_cast<std::size_t>(piv)], rhs[static_cast<std::size_t>(col)]);
        }
        const double inv = 1.0 / M[static_cast<std::size_t>(col) * m + col];
        for (int row = col + 1; row < m; ++row) {
            const double factor = M[static_cast<std::size_t>(row) * m + col] * inv;
            if (factor == 0.0) continue;
            for (int c2 = col; c2 < m; ++c2)
                M[static_cast<std::size_t>(row) * m + c2] -=
                    factor * M[static_cast<std::size_t>(col) * m + c2];
            rhs[static_cast<std::size_t>(row)] -= factor * rhs[static_cast<std::size_t>(col)];
        }
    }
    for (int row = m - 1; row >= 0; --row) {
        double acc = rhs[static_cast<std::size_t>(row)];
        for (int c2 = row + 1; c2 < m; ++c2)
            acc -= M[static_cast<std::size_t>(row) * m + c2] * rhs[static_cast<std::size_t>(c2)];
        rhs[static_cast<std::size_t>(row)] = acc / M[static_cast<std::size_t>(row) * m + row];
    }
    return true;
}

inline double sample_bilinear(const std::vector<double>& v, int nx, double h, double x,
                              double y) {
    const double half = 0.5 * (nx - 1);
    const double fx = x / h + half, fy = y / h + half;
    const int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
    if (ix < 0 || iy < 0 || ix >= nx - 1 || iy >= nx - 1) return 0.0;
    const double ax = fx - ix, ay = fy - iy;
    const std::size_t idx = static_cast<std::size_t>(iy) * nx + ix;
    return (1 - ax) * (1 - ay) * v[idx] + ax * (1 - ay) * v[idx + 1] +
           (1 - ax) * ay * v[idx + nx] + ax * ay * v[idx + nx + 1];
}

} // namespace

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(const SimConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int m = cfg_.speeds.m();
    const int nx = cfg_.grid.nx;
    const double h = cfg_.h();

    // Sparse term lists for the hot kernel; only set entries participate.
    const CoefficientSet& C = cfg_.coeffs;
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int j = 1; j <= m; ++j)
                for (int al = 0; al < 3; ++al)
                    for (int be = 0; be < 3; ++be)
                        for (int ga = 0; ga < 3; ++ga)
                            if (double v = C.a(i, l, j, al, be, ga); v != 0.0)
                                a_terms_.push_back({i, l, al, be, j, ga, v});
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int j = 1; j <= m; ++j)
                for (int k = 1; k <= m; ++k)
                    for (int al = 0; al < 3; ++al)
                        for (int be = 0; be < 3; ++be)
                            for (int ga = 0; ga < 3; ++ga)
                                for (int de = 0; de < 3; ++de)
                                    if (double v = C.c(i, l, j, k, al, be, ga, de); v != 0.0)
                                        c_terms_.push_back({i, l, al, be, j, ga, k, de, v});
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                for (int al = 0; al < 3; ++al)
                    for (int be = 0; be < 3; ++be)
                        if (double v = C.b(i, j, k, al, be); v != 0.0)
                            b_terms_.push_back({i, j, al, k, be, v});
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                for (int l = 1; l <= m; ++l)
                    for (int al = 0; al < 3; ++al)
                        for (int be = 0; be < 3; ++be)
                            for (int ga = 0; ga < 3; ++ga)
                                if (double v = C.d(i, j, k, l, al, be, ga); v != 0.0)
                                    d_terms_.push_back({i, j, al, k, be, l, ga, v});

    // Initial level: u = eps f, du/dt = eps g, then a Taylor start.
    state_.t = 0.0;
    state_.dt = cfg_.dt();
    state_.nx = nx;
    state_.h = h;
    const std::size_t n_cells = static_cast<std::size_t>(nx) * nx;
    state_.u_prev.assign(m, std::vector<double>(n_cells, 0.0));
    state_.u.assign(m, std::vector<double>(n_cells, 0.0));
    state_.dtu.assign(m, std::vector<double>(n_cells, 0.0));
    state_.acc.assign(m, std::vector<double>(n_cells, 0.0));
    next_.assign(m, std::vector<double>(n_cells, 0.0));

    const double eps = cfg_.epsilon;
    for (int comp = 0; comp < m; ++comp) {
        const SupportedField& f = cfg_.data.f[static_cast<std::size_t>(comp)];
        const SupportedField& g = cfg_.data.g[static_cast<std::size_t>(comp)];
        for (int iy = 0; iy < nx; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double x = (ix - 0.5 * (nx - 1)) * h;
                const double y = (iy - 0.5 * (nx - 1)) * h;
                const std::size_t idx = static_cast<std::size_t>(iy) * nx + ix;
                state_.u[static_cast<std::size_t>(comp)][idx] = eps * f(x, y);
                state_.dtu[static_cast<std::size_t>(comp)][idx] = eps * g(x, y);
            }
    }

    // Acceleration at t = 0 from the constrained solve, then
    // u(dt) = u0 + dt u'0 + dt^2/2 u''0.  u_prev keeps u(0).
    state_.u_prev = state_.u;
    {
        WaveState init = state_; // u and dtu at t = 0
        StepInfo info = accel_only(init, cfg_.parallel);
        if (info.singular) throw NumericalError("simulator: singular system in initial data");
        state_.acc = init.acc;
        const double dt = state_.dt;
        for (int comp = 0; comp < m; ++comp) {
            auto& u = state_.u[static_cast<std::size_t>(comp)];
            const auto& du = state_.dtu[static_cast<std::size_t>(comp)];
            const auto& aa = state_.acc[static_cast<std::size_t>(comp)];
            for (std::size_t idx = 0; idx < n_cells; ++idx)
                u[idx] += dt * du[idx] + 0.5 * dt * dt * aa[idx];
        }
        state_.t = dt;
        initial_sup_du_ = info.sup_du;
    }
    threshold_ = cfg_.blowup_threshold > 0.0
                     ? cfg_.blowup_threshold
                     : (initial_sup_du_ > 0.0
                            ? cfg_.blowup_factor * initial_sup_du_
                            : std::numeric_limits<double>::infinity());
}

void Simulator::step() { advance(state_, next_, cfg_.parallel); }

// Assembles and solves the per-cell constrained acceleration for every
// interior cell of `st` at its current level (u, dtu known), writing st.acc.
// Shared by the first step and by both kernels through `advance`.
Simulator::StepInfo Simulator::accel_only(WaveState& st, bool parallel) const {
    if (parallel) return cell_pass(st, nullptr, true);
    return cell_pass_serial(st, nullptr);
}

// One leapfrog update: refresh dtu at the current level, solve cell
// accelerations, write the next level into `scratch`, rotate.
Simulator::StepInfo Simulator::advance(WaveState& st, std::vector<std::vector<double>>& scratch,
                                       bool parallel) const {
    const int m = cfg_.speeds.m();
    const int nx = st.nx;
    const std::size_t n_cells = static_cast<std::size_t>(nx) * nx;
    const double dt = st.dt;

    // dtu(t) = (u - u_prev)/dt + dt/2 * acc(t - dt): second order.
    for (int comp = 0; comp < m; ++comp) {
        auto& du = st.dtu[static_cast<std::size_t>(comp)];
        const auto& u = st.u[static_cast<std::size_t>(comp)];
        const auto& up = st.u_prev[static_cast<std::size_t>(comp)];
        const auto& aa = st.acc[static_cast<std::size_t>(comp)];
#pragma omp parallel for schedule(static) if (parallel && n_cells > 4096)
        for (long long idx = 0; idx < static_cast<long long>(n_cells); ++idx)
            du[static_cast<std::size_t>(idx)] =
                (u[static_cast<std::size_t>(idx)] - up[static_cast<std::size_t>(idx)]) / dt +
                0.5 * dt * aa[static_cast<std::size_t>(idx)];
    }

    StepInfo info = parallel ? cell_pass(st, &scratch, true) : cell_pass_serial(st, &scratch);
    if (info.singular) {
        st.blown = true;
        return info;
    }

    for (int comp = 0; comp < m; ++comp) {
        std::swap(st.u_prev[static_cast<std::size_t>(comp)], st.u[static_cast<std::size_t>(comp)]);
        std::swap(st.u[static_cast<std::size_t>(comp)], scratch[static_cast<std::size_t>(comp)]);
    }
    st.t += dt;
    if (info.nonfinite) st.blown = true;
    return info;
}

// Optimized kernel: sparse compiled terms, OpenMP over rows, per-row maxima
// reduced in a fixed order afterwards.
Simulator::StepInfo Simulator::cell_pass(WaveState& st, std::vector<std::vector<double>>* out,
                                         bool parallel) const {
    const int m = cfg_.speeds.m();
    const int nx = st.nx;
    const double h = st.h, dt = st.dt;

    std::vector<const double*> u_ptr(static_cast<std::size_t>(m)),
        du_ptr(static_cast<std::size_t>(m)), up_ptr(static_cast<std::size_t>(m));
    std::vector<double*> acc_ptr(static_cast<std::size_t>(m)),
        out_ptr(static_cast<std::size_t>(m), nullptr);
    for (int comp = 0; comp < m; ++comp) {
        u_ptr[static_cast<std::size_t>(comp)] = st.u[static_cast<std::size_t>(comp)].data();
        du_ptr[static_cast<std::size_t>(comp)] = st.dtu[static_cast<std::size_t>(comp)].data();
        up_ptr[static_cast<std::size_t>(comp)] = st.u_prev[static_cast<std::size_t>(comp)].data();
        acc_ptr[static_cast<std::size_t>(comp)] = st.acc[static_cast<std::size_t>(comp)].data();
        if (out) out_ptr[static_cast<std::size_t>(comp)] = (*out)[static_cast<std::size_t>(comp)].data();
    }
    std::vector<double> c2(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i) c2[static_cast<std::size_t>(i - 1)] = cfg_.speeds.c(i) * cfg_.speeds.c(i);

    std::vector<double> row_max(static_cast<std::size_t>(nx), 0.0);
    std::vector<std::uint8_t> row_singular(static_cast<std::size_t>(nx), 0),
        row_nonfinite(static_cast<std::size_t>(nx), 0);

#pragma omp parallel if (parallel)
    {
        std::vector<double> v(static_cast<std::size_t>(3 * m));
        std::vector<CellDerivs> D(static_cast<std::size_t>(m));
        std::vector<double> Amat(static_cast<std::size_t>(m) * m * 9);
        std::vector<double> M(static_cast<std::size_t>(m) * m), rhs(static_cast<std::size_t>(m));

#pragma omp for schedule(static)
        for (int iy = 1; iy < nx - 1; ++iy) {
            double local_max = 0.0;
            bool local_singular = false, local_nonfinite = false;
            for (int ix = 1; ix < nx - 1; ++ix) {
                const int idx = iy * nx + ix;
                for (int comp = 0; comp < m; ++comp) {
                    D[static_cast<std::size_t>(comp)] =
                        cell_derivs(u_ptr[static_cast<std::size_t>(comp)],
                                    du_ptr[static_cast<std::size_t>(comp)], idx, nx, h);
                    v[static_cast<std::size_t>(comp * 3 + 0)] =
                        du_ptr[static_cast<std::size_t>(comp)][idx];
                    v[static_cast<std::size_t>(comp * 3 + 1)] = D[static_cast<std::size_t>(comp)].ux;
                    v[static_cast<std::size_t>(comp * 3 + 2)] = D[static_cast<std::size_t>(comp)].uy;
                }
                for (int comp = 0; comp < m; ++comp) {
                    const auto& d = D[static_cast<std::size_t>(comp)];
                    local_max = std::max(
                        local_max,
                        std::max(std::abs(v[static_cast<std::size_t>(comp * 3)]),
                                 std::max(std::abs(d.ux), std::abs(d.uy))));
                }

                // Accumulate the second-order coefficients at this gradient.
                std::fill(Amat.begin(), Amat.end(), 0.0);
                for (const ATerm& tm : a_terms_)
                    Amat[static_cast<std::size_t>(((tm.i - 1) * m + (tm.l - 1)) * 9 +
                                                  tm.al * 3 + tm.be)] +=
                        tm.coef * v[static_cast<std::size_t>((tm.j - 1) * 3 + tm.ga)];
                for (const CTerm& tm : c_terms_)
                    Amat[static_cast<std::size_t>(((tm.i - 1) * m + (tm.l - 1)) * 9 +
                                                  tm.al * 3 + tm.be)] +=
                        tm.coef * v[static_cast<std::size_t>((tm.j - 1) * 3 + tm.ga)] *
                        v[static_cast<std::size_t>((tm.k - 1) * 3 + tm.de)];

                // Assemble (I - A^{00}) acc = c^2 lap + other A-terms + B.
                for (int i = 0; i < m; ++i) {
                    for (int l = 0; l < m; ++l)
                        M[static_cast<std::size_t>(i * m + l)] =
                            (i == l ? 1.0 : 0.0) -
                            Amat[static_cast<std::size_t>((i * m + l) * 9)];
                    double r = c2[static_cast<std::size_t>(i)] *
                               D[static_cast<std::size_t>(i)].lap;
                    for (int l = 0; l < m; ++l) {
                        const auto& d = D[static_cast<std::size_t>(l)];
                        const double* Ail = &Amat[static_cast<std::size_t>((i * m + l) * 9)];
                        // (al,be) != (0,0); derivative values by slot:
                        // 01,02 and 10,20 -> mixed time-space; 11,22 -> pure;
                        // 12,21 -> cross.
                        r += Ail[1] * d.dtux + Ail[2] * d.dtuy;
                        r += Ail[3] * d.dtux + Ail[6] * d.dtuy;
                        r += Ail[4] * d.uxx + Ail[8] * d.uyy;
                        r += Ail[5] * d.uxy + Ail[7] * d.uxy;
                    }
                    rhs[static_cast<std::size_t>(i)] = r;
                }
                for (const BTerm& tm : b_terms_)
                    rhs[static_cast<std::size_t>(tm.i - 1)] +=
                        tm.coef * v[static_cast<std::size_t>((tm.j - 1) * 3 + tm.al)] *
                        v[static_cast<std::size_t>((tm.k - 1) * 3 + tm.be)];
                for (const DTerm& tm : d_terms_)
                    rhs[static_cast<std::size_t>(tm.i - 1)] +=
                        tm.coef * v[static_cast<std::size_t>((tm.j - 1) * 3 + tm.al)] *
                        v[static_cast<std::size_t>((tm.k - 1) * 3 + tm.be)] *
                        v[static_cast<std::size_t>((tm.l - 1) * 3 + tm.ga)];

                bool ok;
                if (m == 1) {
                    const double piv = M[0];
                    ok = std::abs(piv) >= 1e-12;
                    if (ok) rhs[0] /= piv;
                } else {
                    ok = solve_small(M, rhs, m);
                }
                if (!ok) {
                    local_singular = true;
                    continue;
                }
                for (int comp = 0; comp < m; ++comp) {
                    const double a_new = rhs[static_cast<std::size_t>(comp)];
                    acc_ptr[static_cast<std::size_t>(comp)][idx] = a_new;
                    if (out_ptr[static_cast<std::size_t>(comp)]) {
                        const double unew =
                            2.0 * u_ptr[static_cast<std::size_t>(comp)][idx] -
                            up_ptr[static_cast<std::size_t>(comp)][idx] + dt * dt * a_new;
                        out_ptr[static_cast<std::size_t>(comp)][idx] = unew;
                        if (!std::isfinite(unew)) local_nonfinite = true;
                    } else if (!std::isfinite(a_new)) {
                        local_nonfinite = true;
                    }
                }
            }
            row_max[static_cast<std::size_t>(iy)] = local_max;
            row_singular[static_cast<std::size_t>(iy)] = local_singular ? 1 : 0;
            row_nonfinite[static_cast<std::size_t>(iy)] = local_nonfinite ? 1 : 0;
        }
    }

    StepInfo info;
    for (int iy = 0; iy < nx; ++iy) { // fixed order
        info.sup_du = std::max(info.sup_du, row_max[static_cast<std::size_t>(iy)]);
        info.singular = info.singular || row_singular[static_cast<std::size_t>(iy)] != 0;
        info.nonfinite = info.nonfinite || row_nonfinite[static_cast<std::size_t>(iy)] != 0;
    }
    if (out)
        for (int comp = 0; comp < m; ++comp) {
            auto& o = (*out)[static_cast<std::size_t>(comp)];
            const int n = nx;
            for (int ix = 0; ix < n; ++ix) {
                o[static_cast<std::size_t>(ix)] = 0.0;
                o[static_cast<std::size_t>(n - 1) * n + ix] = 0.0;
                o[static_cast<std::size_t>(ix) * n] = 0.0;
                o[static_cast<std::size_t>(ix) * n + (n - 1)] = 0.0;
            }
        }
    if (!std::isfinite(info.sup_du)) info.nonfinite = true;
    return info;
}

// Plain reference kernel: dense coefficient lookups straight from the
// tensors, simple loops, no OpenMP. Kept for testing the optimized kernel.
Simulator::StepInfo Simulator::cell_pass_serial(WaveState& st,
                                                std::vector<std::vector<double>>* out) const {
    const int m = cfg_.speeds.m();
    const int nx = st.nx;
    const double h = st.h, dt = st.dt;
    const CoefficientSet& C = cfg_.coeffs;

    StepInfo info;
    std::vector<double> v(static_cast<std::size_t>(3 * m));
    std::vector<CellDerivs> D(static_cast<std::size_t>(m));
    std::vector<double> M(static_cast<std::size_t>(m) * m), rhs(static_cast<std::size_t>(m));

    for (int iy = 1; iy < nx - 1; ++iy)
        for (int ix = 1; ix < nx - 1; ++ix) {
            const int idx = iy * nx + ix;
            for (int comp = 0; comp < m; ++comp) {
                const double* u = st.u[static_cast<std::size_t>(comp)].data();
                const double* du = st.dtu[static_cast<std::size_t>(comp)].data();
                D[static_cast<std::size_t>(comp)] = cell_derivs(u, du, idx, nx, h);
                v[static_cast<std::size_t>(comp * 3 + 0)] = du[idx];
                v[static_cast<std::size_t>(comp * 3 + 1)] = D[static_cast<std::size_t>(comp)].ux;
                v[static_cast<std::size_t>(comp * 3 + 2)] = D[static_cast<std::size_t>(comp)].uy;
                info.sup_du = std::max(
                    info.sup_du, std::max(std::abs(du[idx]),
                                          std::max(std::abs(D[static_cast<std::size_t>(comp)].ux),
                                                   std::abs(D[static_cast<std::size_t>(comp)].uy))));
            }

            auto Dval = [&](int l, int al, int be) {
                const auto& d = D[static_cast<std::size_t>(l - 1)];
                if (al == 0 && be == 1) return d.dtux;
                if (al == 0 && be == 2) return d.dtuy;
                if (al == 1 && be == 0) return d.dtux;
                if (al == 2 && be == 0) return d.dtuy;
                if (al == 1 && be == 1) return d.uxx;
                if (al == 2 && be == 2) return d.uyy;
                return d.uxy; // (1,2) or (2,1)
            };

            for (int i = 1; i <= m; ++i) {
                for (int l = 1; l <= m; ++l)
                    M[static_cast<std::size_t>((i - 1) * m + (l - 1))] =
                        (i == l ? 1.0 : 0.0) - C.A(i, l, 0, 0, v);
                const double ci = cfg_.speeds.c(i);
                double r = ci * ci * D[static_cast<std::size_t>(i - 1)].lap;
                for (int l = 1; l <= m; ++l)
                    for (int al = 0; al < 3; ++al)
                        for (int be = 0; be < 3; ++be) {
                            if (al == 0 && be == 0) continue;
                            r += C.A(i, l, al, be, v) * Dval(l, al, be);
                        }
                for (int j = 1; j <= m; ++j)
                    for (int k = 1; k <= m; ++k)
                        for (int al = 0; al < 3; ++al)
                            for (int be = 0; be < 3; ++be)
                                r += C.b(i, j, k, al, be) *
                                     v[static_cast<std::size_t>((j - 1) * 3 + al)] *
                                     v[static_cast<std::size_t>((k - 1) * 3 + be)];
                for (int j = 1; j <= m; ++j)
                    for (int k = 1; k <= m; ++k)
                        for (int l = 1; l <= m; ++l)
                            for (int al = 0; al < 3; ++al)
                                for (int be = 0; be < 3; ++be)
                                    for (int ga = 0; ga < 3; ++ga)
                                        r += C.d(i, j, k, l, al, be, ga) *
                                             v[static_cast<std::size_t>((j - 1) * 3 + al)] *
                                             v[static_cast<std::size_t>((k - 1) * 3 + be)] *
                                             v[static_cast<std::size_t>((l - 1) * 3 + ga)];
                rhs[static_cast<std::size_t>(i - 1)] = r;
            }

            if (!solve_small(M, rhs, m)) {
                info.singular = true;
                continue;
            }
            for (int comp = 0; comp < m; ++comp) {
                st.acc[static_cast<std::size_t>(comp)][static_cast<std::size_t>(idx)] =
                    rhs[static_cast<std::size_t>(comp)];
                if (out) {
                    const double unew =
                        2.0 * st.u[static_cast<std::size_t>(comp)][static_cast<std::size_t>(idx)] -
                        st.u_prev[static_cast<std::size_t>(comp)][static_cast<std::size_t>(idx)] +
                        dt * dt * rhs[static_cast<std::size_t>(comp)];
                    (*out)[static_cast<std::size_t>(comp)][static_cast<std::size_t>(idx)] = unew;
                    if (!std::isfinite(unew)) info.nonfinite = true;
                }
            }
        }
    if (out) {
        for (int comp = 0; comp < m; ++comp) {
            auto& o = (*out)[static_cast<std::size_t>(comp)];
            for (int ix = 0; ix < nx; ++ix) {
                o[static_cast<std::size_t>(ix)] = 0.0;
                o[static_cast<std::size_t>(nx - 1) * nx + ix] = 0.0;
                o[static_cast<std::size_t>(ix) * nx] = 0.0;
                o[static_cast<std::size_t>(ix) * nx + (nx - 1)] = 0.0;
            }
        }
    }
    if (!std::isfinite(info.sup_du)) info.nonfinite = true;
    return info;
}

// ---------------------------------------------------------------------------
// Diagnostics. After a step the consistent trio at the sample time is
// (u_prev, dtu, acc); `use_prev_level` selects it.

DiagnosticSample Simulator::diagnostics(const WaveState& st, double t, bool use_prev_level) const {
    const int m = cfg_.speeds.m();
    const int nx = st.nx;
    const double h = st.h;
    DiagnosticSample d;
    d.t = t;
    d.region_max.assign(static_cast<std::size_t>(m) + 1, 0.0);

    const double half = 0.5 * (nx - 1);
    for (int iy = 1; iy < nx - 1; ++iy)
        for (int ix = 1; ix < nx - 1; ++ix) {
            const std::size_t idx = static_cast<std::size_t>(iy) * nx + ix;
            const double x = (ix - half) * h, y = (iy - half) * h;
            const double r = std::hypot(x, y);
            double bracket_sum = 0.0, angle_sum = 0.0, du_aggregate = 0.0;
            for (int comp = 0; comp < m; ++comp) {
                const auto& u = use_prev_level ? st.u_prev[static_cast<std::size_t>(comp)]
                                               : st.u[static_cast<std::size_t>(comp)];
                const auto& du = st.dtu[static_cast<std::size_t>(comp)];
                const double ux = (u[idx + 1] - u[idx - 1]) / (2.0 * h);
                const double uy = (u[idx + nx] - u[idx - nx]) / (2.0 * h);
                const double dut = du[idx];
                const double ci = cfg_.speeds.c(comp + 1);
                const double mag = std::abs(dut) + std::abs(ux) + std::abs(uy);
                d.sup_du = std::max(d.sup_du,
                                    std::max(std::abs(dut), std::max(std::abs(ux), std::abs(uy))));
                d.energy += dut * dut + ci * ci * (ux * ux + uy * uy);
                bracket_sum += std::pow(1.0 + r, kRadialExponent) *
                               std::pow(1.0 + std::abs(r - ci * t), kConeExponentBracket) * mag;
                angle_sum += std::pow(1.0 + r + t, kAngleExponent) * std::abs(u[idx]);
                du_aggregate += mag;
            }
            d.bracket_norm = std::max(d.bracket_norm, bracket_sum);
            d.angle_norm = std::max(d.angle_norm, angle_sum);
            const int region = region_of(r, t);
            d.region_max[static_cast<std::size_t>(region)] =
                std::max(d.region_max[static_cast<std::size_t>(region)], du_aggregate);
        }
    d.energy *= h * h;
    return d;
}

int Simulator::region_of(double r, double t) const {
    if (t <= 0.0) return 0;
    const double half_width = cfg_.speeds.c_star() * t;
    for (int i = 1; i <= cfg_.speeds.m(); ++i)
        if (std::abs(r - cfg_.speeds.c(i) * t) <= half_width) return i;
    return 0;
}

// Re-runs the interval since the last snapshot with a halved time step and
// returns the refined crossing time (or stop_hint if it never crosses).
double Simulator::refine_crossing(const WaveState& snapshot, double stop_hint) const {
    const int m = cfg_.speeds.m();
    const std::size_t n_cells = snapshot.u[0].size();
    WaveState mini = snapshot;
    mini.dt = 0.5 * snapshot.dt;

    // Rebuild the previous level for the halved step from the level pair:
    // u(tau - dt/2) = u - (dt/2) u' + (dt/2)^2/2 u''.
    for (int comp = 0; comp < m; ++comp) {
        const auto& u = snapshot.u[static_cast<std::size_t>(comp)];
        const auto& up = snapshot.u_prev[static_cast<std::size_t>(comp)];
        const auto& aa = snapshot.acc[static_cast<std::size_t>(comp)];
        auto& mini_prev = mini.u_prev[static_cast<std::size_t>(comp)];
        const double dt = snapshot.dt, hdt = mini.dt;
        for (std::size_t idx = 0; idx < n_cells; ++idx) {
            const double dtu = (u[idx] - up[idx]) / dt + 0.5 * dt * aa[idx];
            mini_prev[idx] = u[idx] - hdt * dtu + 0.5 * hdt * hdt * aa[idx];
        }
    }

    std::vector<std::vector<double>> scratch(static_cast<std::size_t>(m),
                                             std::vector<double>(n_cells, 0.0));
    const long max_steps =
        static_cast<long>(std::ceil((stop_hint - mini.t) / mini.dt)) + 16;
    for (long k = 0; k < max_steps; ++k) {
        const StepInfo info = advance(mini, scratch, cfg_.parallel);
        const double t_level = mini.t - mini.dt;
        if (info.singular || info.nonfinite) return t_level;
        if (info.sup_du > threshold_) return t_level;
    }
    return stop_hint;
}

RunResult Simulator::run() {
    RunResult result;
    result.threshold = threshold_;
    result.probe_series.resize(cfg_.probes.size());

    const double dt = state_.dt;
    const long cadence_steps = std::max<long>(1, std::lround(cfg_.output_cadence / dt));
    WaveState snapshot = state_;

    bool crossed100 = false, crossed10000 = false;
    long step_count = 0;
    while (state_.t < cfg_.t_max) {
        const StepInfo info = advance(state_, next_, cfg_.parallel);
        const double t_level = state_.t - dt; // time the StepInfo refers to

        if (initial_sup_du_ > 0.0) {
            if (!crossed100 && info.sup_du > 100.0 * initial_sup_du_) {
                crossed100 = true;
                result.T_at_factor_100 = t_level;
            }
            if (!crossed10000 && info.sup_du > 1e4 * initial_sup_du_) {
                crossed10000 = true;
                result.T_at_factor_10000 = t_level;
            }
        }
        if (info.singular) {
            result.outcome = RunOutcome::Unstable;
            result.T_emp = t_level;
            result.final_state = state_;
            return result;
        }
        if (info.nonfinite) {
            result.outcome = RunOutcome::Blowup;
            result.T_emp = t_level;
            result.final_state = state_;
            return result;
        }
        if (info.sup_du > threshold_) {
            result.outcome = RunOutcome::Blowup;
            result.T_emp = refine_crossing(snapshot, t_level);
            result.final_state = state_;
            return result;
        }

        ++step_count;
        if (step_count % cadence_steps == 0) {
            result.series.push_back(diagnostics(state_, t_level, true));
            for (std::size_t pi = 0; pi < cfg_.probes.size(); ++pi) {
                const ConeProbe& probe = cfg_.probes[pi];
                const double r = cfg_.speeds.c(probe.component) * t_level + probe.lambda;
                if (r <= 0.0) continue;
                const auto& aa = state_.acc[static_cast<std::size_t>(probe.component - 1)];
                const double d2 = sample_bilinear(aa, state_.nx, state_.h,
                                                  r * std::cos(probe.omega),
                                                  r * std::sin(probe.omega));
                result.probe_series[pi].push_back({t_level, r, std::sqrt(r) * d2});
            }
            snapshot = state_;
        }
    }
    result.outcome = RunOutcome::Completed;
    result.T_emp = state_.t;
    result.final_state = state_;
    return result;
}

RunResult run(const SimConfig& cfg) {
    Simulator sim(cfg);
    return sim.run();
}

LifespanMeasurement estimate_lifespan(const SimConfig& cfg, double epsilon) {
    SimConfig local = cfg;
    local.epsilon = epsilon;
    Simulator sim(local);
    RunResult result = sim.run();
    LifespanMeasurement mes;
    mes.outcome = result.outcome;
    if (result.outcome == RunOutcome::Completed) {
        mes.reached_horizon = true;
        mes.T_emp = result.T_emp;
    } else {
        mes.reached_horizon = false;
        mes.T_emp = result.T_emp;
    }
    return mes;
}

ScalingStudy scaling_study(const SimConfig& cfg, const std::vector<double>& eps_list, double H,
                           double tol_scaling, bool parallel_sweep) {
    ScalingStudy study;
    study.H = H;
    study.tol = tol_scaling;
    study.rows.resize(eps_list.size());
    const double inv_H = H > 0.0 ? 1.0 / H : std::numeric_limits<double>::infinity();

    const long long n = static_cast<long long>(eps_list.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel_sweep && n > 1)
    for (long long k = 0; k < n; ++k) {
        const double eps = eps_list[static_cast<std::size_t>(k)];
        ScalingRow row;
        row.epsilon = eps;
        row.inv_H = inv_H;
        const LifespanMeasurement mes = estimate_lifespan(cfg, eps);
        row.reached_horizon = mes.reached_horizon;
        row.T_emp = mes.T_emp;
        row.eps2_log1pT = eps * eps * std::log1p(mes.T_emp);
        // Runs that die within the first few steps carry no information.
        SimConfig probe_cfg = cfg;
        probe_cfg.epsilon = eps;
        row.valid = mes.reached_horizon || mes.T_emp > 3.0 * probe_cfg.dt();
        row.flagged = row.valid && !mes.reached_horizon && H > 0.0 &&
                      row.eps2_log1pT < (1.0 - tol_scaling) * inv_H;
        study.rows[static_cast<std::size_t>(k)] = row;
    }
    return study;
}

void write_scaling_csv(const ScalingStudy& study, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write scaling CSV: " + path);
    out << "epsilon,reached_horizon,T_emp,eps2_log1pT,inv_H,flagged,valid\n";
    char line[256];
    for (const ScalingRow& row : study.rows) {
        std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g,%.17g,%d,%d\n", row.epsilon,
                      row.reached_horizon ? 1 : 0, row.T_emp, row.eps2_log1pT, row.inv_H,
                      row.flagged ? 1 : 0, row.valid ? 1 : 0);
        out << line;
    }
}

} // namespace qlw
