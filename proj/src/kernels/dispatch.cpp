#include "kernels_impl.hpp"

#include <atomic>
#include <stdexcept>

namespace sparsetrack::kernels {

namespace {

constexpr KernelTable kScalar{
    "scalar", scalar::squared_distances, scalar::norms, scalar::voxel_coords, scalar::mahalanobis};

#if defined(SPARSETRACK_HAS_AVX2)
constexpr KernelTable kAvx2{
    "avx2", avx2::squared_distances, avx2::norms, avx2::voxel_coords, avx2::mahalanobis};
#endif

bool cpu_has_avx2() {
#if defined(SPARSETRACK_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* best_table() {
#if defined(SPARSETRACK_HAS_AVX2)
    if (cpu_has_avx2()) return &kAvx2;
#endif
    return &kScalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{best_table()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(SPARSETRACK_HAS_AVX2)
    return &kAvx2;
#else
    return nullptr;
#endif
}

bool avx2_available() { return avx2_table() != nullptr && cpu_has_avx2(); }

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::scalar) {
        current().store(&kScalar);
        return;
    }
    if (!avx2_available()) {
        throw std::runtime_error("AVX2 kernels are not available on this host");
    }
    current().store(avx2_table());
}

void reset_isa() { current().store(best_table()); }

Isa active_isa() { return &active() == &kScalar ? Isa::scalar : Isa::avx2; }

}  // namespace sparsetrack::kernels
