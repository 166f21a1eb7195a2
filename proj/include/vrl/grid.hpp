// Uniform Cartesian grids and the scalar/vector moment fields living on them.
#ifndef VRL_GRID_HPP
#define VRL_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vrl/core.hpp"

namespace vrl {

// Node-centered uniform grid: node (i,j,k) sits at origin + h*(i,j,k).
struct UniformGrid {
    Vec3 origin{};
    double h = 1.0;
    int nx = 0, ny = 0, nz = 0;

    static UniformGrid cube(double half_extent, int n) {
        UniformGrid g;
        g.nx = g.ny = g.nz = n;
        // nodes span [-L, L] inclusive in each axis
        g.h = 2.0 * half_extent / static_cast<double>(n - 1);
        g.origin = {-half_extent, -half_extent, -half_extent};
        return g;
    }

    std::size_t size() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * ny + j) * nz + k;
    }
    Vec3 node(int i, int j, int k) const {
        return {origin.x + h * i, origin.y + h * j, origin.z + h * k};
    }
    double cell_volume() const { return h * h * h; }

    bool contains_ball(const Vec3& center, double radius) const {
        return center.x - radius >= origin.x && center.x + radius <= origin.x + h * (nx - 1) &&
               center.y - radius >= origin.y && center.y + radius <= origin.y + h * (ny - 1) &&
               center.z - radius >= origin.z && center.z + radius <= origin.z + h * (nz - 1);
    }

    bool same_geometry(const UniformGrid& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && h == o.h && origin.x == o.origin.x &&
               origin.y == o.origin.y && origin.z == o.origin.z;
    }
};

enum class MomentKind { charge, current, matter, field };

struct ScalarField {
    UniformGrid grid;
    MomentKind kind = MomentKind::charge;
    std::vector<double> v;

    explicit ScalarField(const UniformGrid& g = {}, MomentKind k = MomentKind::charge)
        : grid(g), kind(k), v(g.size(), 0.0) {}

    double& at(int i, int j, int k) { return v[grid.index(i, j, k)]; }
    double at(int i, int j, int k) const { return v[grid.index(i, j, k)]; }

    // midpoint-rule integral over the grid
    double integral() const {
        double s = 0.0;
        for (double q : v) s += q;
        return s * grid.cell_volume();
    }

    ScalarField& operator+=(const ScalarField& o) {
        if (!grid.same_geometry(o.grid)) throw std::invalid_argument("field grids differ");
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
};

struct VectorField {
    UniformGrid grid;
    MomentKind kind = MomentKind::current;
    std::vector<double> vx, vy, vz;

    explicit VectorField(const UniformGrid& g = {}, MomentKind k = MomentKind::current)
        : grid(g), kind(k), vx(g.size(), 0.0), vy(g.size(), 0.0), vz(g.size(), 0.0) {}

    Vec3 at(int i, int j, int k) const {
        const std::size_t n = grid.index(i, j, k);
        return {vx[n], vy[n], vz[n]};
    }
    void add(std::size_t n, const Vec3& val) {
        vx[n] += val.x;
        vy[n] += val.y;
        vz[n] += val.z;
    }

    Vec3 integral() const {
        Vec3 s{};
        for (std::size_t i = 0; i < vx.size(); ++i) s += Vec3{vx[i], vy[i], vz[i]};
        return s * grid.cell_volume();
    }

    VectorField& operator+=(const VectorField& o) {
        if (!grid.same_geometry(o.grid)) throw std::invalid_argument("field grids differ");
        for (std::size_t i = 0; i < vx.size(); ++i) {
            vx[i] += o.vx[i];
            vy[i] += o.vy[i];
            vz[i] += o.vz[i];
        }
        return *this;
    }
};

// 4th-order centered first derivative of a grid function along one axis,
// treating out-of-range neighbors as zero (sources vanish near the boundary).
template <class FieldAt>
double stencil_d1(const FieldAt& f, int i, int j, int k, int axis, double h, int nx, int ny,
                  int nz) {
    auto val = [&](int di) -> double {
        int ii = i, jj = j, kk = k;
        (axis == 0 ? ii : axis == 1 ? jj : kk) += di;
        if (ii < 0 || jj < 0 || kk < 0 || ii >= nx || jj >= ny || kk >= nz) return 0.0;
        return f(ii, jj, kk);
    };
    return (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2)) / (12.0 * h);
}

} // namespace vrl

#endif // VRL_GRID_HPP
