// Timing comparison of the OpenMP kernels against the serial reference
// implementations: the leapfrog update and the radiation-table fill.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qlw/radiation.hpp"
#include "qlw/simulator.hpp"

using namespace qlw;
namespace chrono = std::chrono;

namespace {

double seconds_since(chrono::high_resolution_clock::time_point t0) {
    return chrono::duration<double>(chrono::high_resolution_clock::now() - t0).count();
}

double bench_step(bool parallel, int nx, int steps) {
    CoefficientSet c(1);
    c.set_c(1, 1, 1, 1, 0, 0, 0, 0, 1.0);
    c.set_b(1, 1, 1, 0, 0, 0.2);
    InitialDataSet data = InitialDataSet::single(bump_field(1.0, 1.0), bump_field(0.5, 1.0), 1.0);
    SimConfig cfg(c, SpeedVector({1.0}), data, 0.1, SimGrid{4.0, nx}, 3.0);
    cfg.parallel = parallel;
    Simulator sim(cfg);
    const auto t0 = chrono::high_resolution_clock::now();
    for (int k = 0; k < steps; ++k) sim.step();
    const double dt = seconds_since(t0);
    const double updates = static_cast<double>(nx) * nx * steps;
    std::printf("  step  %-8s nx=%-5d %6.3f s   %8.1f Mcell/s\n",
                parallel ? "parallel" : "serial", nx, dt, updates / dt / 1e6);
    return dt;
}

double bench_table(bool parallel, int n_rho) {
    InitialDataSet data = InitialDataSet::single(
        zero_field(1.0), modulated_bump_field(1.0, 1.0, 2, 0.5), 1.0);
    TableBuildOptions opts;
    opts.parallel = parallel;
    opts.exploit_radial = false;
    const auto t0 = chrono::high_resolution_clock::now();
    RadiationTable table = build_radiation_table(data, 1, -3.0, n_rho, 8, {}, opts);
    const double dt = seconds_since(t0);
    std::printf("  table %-8s n=%dx8   %6.3f s   (decay C0=%.4f)\n",
                parallel ? "parallel" : "serial", n_rho, dt, table.decay_constant[0]);
    return dt;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif
    std::printf("leapfrog update kernel:\n");
    const double ts = bench_step(false, 801, 60);
    const double tp = bench_step(true, 801, 60);
    std::printf("  speedup: %.2fx\n", ts / tp);

    std::printf("radiation table fill:\n");
    const double rs = bench_table(false, 33);
    const double rp = bench_table(true, 33);
    std::printf("  speedup: %.2fx\n", rs / rp);
    return 0;
}
