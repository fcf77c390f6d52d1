#pragma once

#include "sparsetrack/kernels.hpp"

namespace sparsetrack::kernels {

namespace scalar {
void squared_distances(PointsView pts, double qx, double qy, double qz, double* out);
void norms(PointsView pts, double* out);
void voxel_coords(PointsView pts, double edge, double* out_x, double* out_y, double* out_z);
void mahalanobis(PointsView pts, double cx, double cy, double cz, Sym3 a, double* out);
}  // namespace scalar

#if defined(SPARSETRACK_HAS_AVX2)
namespace avx2 {
void squared_distances(PointsView pts, double qx, double qy, double qz, double* out);
void norms(PointsView pts, double* out);
void voxel_coords(PointsView pts, double edge, double* out_x, double* out_y, double* out_z);
void mahalanobis(PointsView pts, double cx, double cy, double cz, Sym3 a, double* out);
}  // namespace avx2
#endif

}  // namespace sparsetrack::kernels
