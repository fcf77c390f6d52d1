#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>

// Lane-wise mirrors of kernels_scalar.cpp. Operation order matches the scalar
// loop exactly; tails fall through to the scalar code.

namespace sparsetrack::kernels::avx2 {

void squared_distances(PointsView pts, double qx, double qy, double qz, double* out) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    const __m256d vqz = _mm256_set1_pd(qz);
    std::size_t i = 0;
    for (; i + 4 <= pts.n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(pts.x + i), vqx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(pts.y + i), vqy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pts.z + i), vqz);
        const __m256d xy = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        _mm256_storeu_pd(out + i, _mm256_add_pd(xy, _mm256_mul_pd(dz, dz)));
    }
    PointsView tail{pts.x + i, pts.y + i, pts.z + i, pts.n - i};
    scalar::squared_distances(tail, qx, qy, qz, out + i);
}

void norms(PointsView pts, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= pts.n; i += 4) {
        const __m256d x = _mm256_loadu_pd(pts.x + i);
        const __m256d y = _mm256_loadu_pd(pts.y + i);
        const __m256d z = _mm256_loadu_pd(pts.z + i);
        const __m256d xy = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_add_pd(xy, _mm256_mul_pd(z, z))));
    }
    PointsView tail{pts.x + i, pts.y + i, pts.z + i, pts.n - i};
    scalar::norms(tail, out + i);
}

void voxel_coords(PointsView pts, double edge, double* out_x, double* out_y, double* out_z) {
    const __m256d ve = _mm256_set1_pd(edge);
    std::size_t i = 0;
    for (; i + 4 <= pts.n; i += 4) {
        _mm256_storeu_pd(out_x + i, _mm256_floor_pd(_mm256_div_pd(_mm256_loadu_pd(pts.x + i), ve)));
        _mm256_storeu_pd(out_y + i, _mm256_floor_pd(_mm256_div_pd(_mm256_loadu_pd(pts.y + i), ve)));
        _mm256_storeu_pd(out_z + i, _mm256_floor_pd(_mm256_div_pd(_mm256_loadu_pd(pts.z + i), ve)));
    }
    PointsView tail{pts.x + i, pts.y + i, pts.z + i, pts.n - i};
    scalar::voxel_coords(tail, edge, out_x + i, out_y + i, out_z + i);
}

void mahalanobis(PointsView pts, double cx, double cy, double cz, Sym3 a, double* out) {
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    const __m256d vcz = _mm256_set1_pd(cz);
    const __m256d a00 = _mm256_set1_pd(a.a00);
    const __m256d a01 = _mm256_set1_pd(a.a01);
    const __m256d a02 = _mm256_set1_pd(a.a02);
    const __m256d a11 = _mm256_set1_pd(a.a11);
    const __m256d a12 = _mm256_set1_pd(a.a12);
    const __m256d a22 = _mm256_set1_pd(a.a22);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= pts.n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(pts.x + i), vcx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(pts.y + i), vcy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pts.z + i), vcz);
        __m256d diag = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(a00, dx), dx),
                                     _mm256_mul_pd(_mm256_mul_pd(a11, dy), dy));
        diag = _mm256_add_pd(diag, _mm256_mul_pd(_mm256_mul_pd(a22, dz), dz));
        __m256d off = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(a01, dx), dy),
                                    _mm256_mul_pd(_mm256_mul_pd(a02, dx), dz));
        off = _mm256_add_pd(off, _mm256_mul_pd(_mm256_mul_pd(a12, dy), dz));
        _mm256_storeu_pd(out + i, _mm256_add_pd(diag, _mm256_mul_pd(two, off)));
    }
    PointsView tail{pts.x + i, pts.y + i, pts.z + i, pts.n - i};
    scalar::mahalanobis(tail, cx, cy, cz, a, out + i);
}

}  // namespace sparsetrack::kernels::avx2
