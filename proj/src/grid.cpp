#include "qlw/grid.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "qlw/errors.hpp"

namespace qlw {

GridField GridField::make(int nx, int ny, double h, double t, int component) {
    if (nx < 2 || ny < 2 || !(h > 0.0)) throw DomainError("grid: need nx, ny >= 2 and h > 0");
    GridField f;
    f.nx = nx;
    f.ny = ny;
    f.h = h;
    f.t = t;
    f.component = component;
    f.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    return f;
}

void GridField::mask(int ix, int iy) {
    if (valid.empty()) valid.assign(values.size(), 1);
    valid[static_cast<std::size_t>(iy) * nx + ix] = 0;
}

GridFieldStack sample_stack(const std::function<double(double, double, double)>& u, int nx,
                            double extent, double t_center, int n_levels, double dt,
                            int component) {
    if (n_levels < 1 || n_levels % 2 == 0)
        throw DomainError("sample_stack: need an odd number of levels");
    const double h = 2.0 * extent / (nx - 1);
    GridFieldStack stack;
    stack.dt = dt;
    const int mid = (n_levels - 1) / 2;
    for (int lev = 0; lev < n_levels; ++lev) {
        const double t = t_center + (lev - mid) * dt;
        GridField f = GridField::make(nx, nx, h, t, component);
        for (int iy = 0; iy < nx; ++iy)
            for (int ix = 0; ix < nx; ++ix) f.at(ix, iy) = u(f.x_of(ix), f.y_of(iy), t);
        stack.levels.push_back(std::move(f));
    }
    return stack;
}

namespace {
struct BinHeader {
    std::int64_t nx, ny;
    double h, t;
    std::int64_t component;
};
} // namespace

void write_field_binary(const GridField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write field snapshot: " + path);
    BinHeader hdr{field.nx, field.ny, field.h, field.t, field.component};
    out.write(reinterpret_cast<const char*>(&hdr), sizeof hdr);
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

GridField read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read field snapshot: " + path);
    BinHeader hdr{};
    in.read(reinterpret_cast<char*>(&hdr), sizeof hdr);
    if (!in || hdr.nx < 2 || hdr.ny < 2) throw DomainError("field snapshot: bad header");
    GridField f = GridField::make(static_cast<int>(hdr.nx), static_cast<int>(hdr.ny), hdr.h,
                                  hdr.t, static_cast<int>(hdr.component));
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw DomainError("field snapshot: truncated data");
    return f;
}

void write_field_csv(const GridField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write field CSV: " + path);
    out << "x,y,value\n";
    char line[128];
    for (int iy = 0; iy < field.ny; ++iy)
        for (int ix = 0; ix < field.nx; ++ix) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", field.x_of(ix),
                          field.y_of(iy), field.at(ix, iy));
            out << line;
        }
}

} // namespace qlw
