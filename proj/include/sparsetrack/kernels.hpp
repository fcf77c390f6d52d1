#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, on x86-64,
// an AVX2 variant selected at runtime. Both variants perform the same IEEE
// operations in the same order (no FMA), so results are bit-identical.
//
// This header stays free of Eigen so that the AVX2 translation unit never
// instantiates Eigen templates with a different instruction set.

#include <cstddef>
#include <string_view>

namespace sparsetrack::kernels {

/// Structure-of-arrays view over n points.
struct PointsView {
    const double* x = nullptr;
    const double* y = nullptr;
    const double* z = nullptr;
    std::size_t n = 0;
};

/// Packed upper triangle of a symmetric 3x3 matrix: a00 a01 a02 a11 a12 a22.
struct Sym3 {
    double a00, a01, a02, a11, a12, a22;
};

struct KernelTable {
    std::string_view name;
    /// out[i] = |p_i - q|^2
    void (*squared_distances)(PointsView pts, double qx, double qy, double qz, double* out);
    /// out[i] = |p_i|
    void (*norms)(PointsView pts, double* out);
    /// out_*[i] = floor(p_i / edge), per axis
    void (*voxel_coords)(PointsView pts, double edge, double* out_x, double* out_y, double* out_z);
    /// out[i] = (p_i - c)^T A (p_i - c)
    void (*mahalanobis)(PointsView pts, double cx, double cy, double cz, Sym3 a, double* out);
};

enum class Isa { scalar, avx2 };

const KernelTable& scalar_table();

/// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

/// True when the AVX2 variant is compiled in and the running CPU supports it.
bool avx2_available();

/// Kernel table used by the library. Defaults to the best supported ISA.
const KernelTable& active();

/// Override dispatch; forcing avx2 on an unsupported host throws std::runtime_error.
void force_isa(Isa isa);
void reset_isa();
Isa active_isa();

}  // namespace sparsetrack::kernels
