#include "kernels_impl.hpp"

#include <cmath>

namespace sparsetrack::kernels::scalar {

void squared_distances(PointsView pts, double qx, double qy, double qz, double* out) {
    for (std::size_t i = 0; i < pts.n; ++i) {
        const double dx = pts.x[i] - qx;
        const double dy = pts.y[i] - qy;
        const double dz = pts.z[i] - qz;
        out[i] = (dx * dx + dy * dy) + dz * dz;
    }
}

void norms(PointsView pts, double* out) {
    for (std::size_t i = 0; i < pts.n; ++i) {
        const double x = pts.x[i];
        const double y = pts.y[i];
        const double z = pts.z[i];
        out[i] = std::sqrt((x * x + y * y) + z * z);
    }
}

void voxel_coords(PointsView pts, double edge, double* out_x, double* out_y, double* out_z) {
    for (std::size_t i = 0; i < pts.n; ++i) {
        out_x[i] = std::floor(pts.x[i] / edge);
        out_y[i] = std::floor(pts.y[i] / edge);
        out_z[i] = std::floor(pts.z[i] / edge);
    }
}

void mahalanobis(PointsView pts, double cx, double cy, double cz, Sym3 a, double* out) {
    for (std::size_t i = 0; i < pts.n; ++i) {
        const double dx = pts.x[i] - cx;
        const double dy = pts.y[i] - cy;
        const double dz = pts.z[i] - cz;
        const double diag = ((a.a00 * dx) * dx + (a.a11 * dy) * dy) + (a.a22 * dz) * dz;
        const double off = ((a.a01 * dx) * dy + (a.a02 * dx) * dz) + (a.a12 * dy) * dz;
        out[i] = diag + 2.0 * off;
    }
}

}  // namespace sparsetrack::kernels::scalar
