#ifndef QLW_GRID_HPP
#define QLW_GRID_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qlw {

/** Scalar field on a uniform origin-centered grid. Row-major storage,
 *  index = iy * nx + ix; x = -extent + ix*h, y = -extent + iy*h with
 *  h = 2*extent/(nx-1). `margin` counts boundary rings whose values are
 *  not trustworthy after stencil operations; `valid` (optional) masks
 *  individual cells, e.g. near the polar axis. */
struct GridField {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double t = 0.0;
    int component = 1;
    int margin = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid; // empty means all valid

    static GridField make(int nx, int ny, double h, double t = 0.0, int component = 1);

    double x_of(int ix) const { return (ix - 0.5 * (nx - 1)) * h; }
    double y_of(int iy) const { return (iy - 0.5 * (ny - 1)) * h; }
    double extent() const { return 0.5 * (nx - 1) * h; }

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }

    bool cell_valid(int ix, int iy) const {
        if (ix < margin || iy < margin || ix >= nx - margin || iy >= ny - margin) return false;
        if (valid.empty()) return true;
        return valid[static_cast<std::size_t>(iy) * nx + ix] != 0;
    }
    void mask(int ix, int iy);
};

/** Consecutive time levels of one field, uniformly spaced by dt and centered
 *  so that level (count-1)/2 sits at time t_center. Time stencils act across
 *  levels. */
struct GridFieldStack {
    std::vector<GridField> levels;
    double dt = 0.0;

    int count() const { return static_cast<int>(levels.size()); }
    int center() const { return (count() - 1) / 2; }
    const GridField& center_field() const { return levels[static_cast<std::size_t>(center())]; }
};

/** Samples an analytic function u(x, y, t) into a stack of n_levels fields
 *  centered at t_center (n_levels odd). */
GridFieldStack sample_stack(const std::function<double(double, double, double)>& u, int nx,
                            double extent, double t_center, int n_levels, double dt,
                            int component = 1);

/** Flat binary snapshot: header (nx, ny int64; h, t float64; component int64)
 *  then row-major float64 values. */
void write_field_binary(const GridField& field, const std::string& path);
GridField read_field_binary(const std::string& path);

/** CSV export (x, y, value) for small grids. */
void write_field_csv(const GridField& field, const std::string& path);

} // namespace qlw

#endif
