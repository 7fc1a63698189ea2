#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "softloc/kernels.hpp"

namespace softloc::simd {

namespace {

constexpr KernelTable kScalar{Isa::kScalar, detail::dot_scalar, detail::axpy_scalar,
                              detail::relu_scalar, detail::relu_mask_scalar};

#if defined(SOFTLOC_HAVE_AVX2_TU)
constexpr KernelTable kAvx2{Isa::kAvx2, detail::dot_avx2, detail::axpy_avx2, detail::relu_avx2,
                            detail::relu_mask_avx2};
#endif

bool cpu_has_avx2() {
#if defined(SOFTLOC_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  const KernelTable* best = avx2_kernels();
  if (const char* env = std::getenv("SOFTLOC_ISA")) {
    const std::string_view want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && best) return best;
  }
  return best ? best : &kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{pick_default()};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(SOFTLOC_HAVE_AVX2_TU)
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_relaxed); }

bool select_isa(Isa isa) {
  const KernelTable* table = isa == Isa::kScalar ? &kScalar : avx2_kernels();
  if (!table) return false;
  active_slot().store(table, std::memory_order_relaxed);
  return true;
}

void affine(const KernelTable& k, const double* w, const double* bias, const double* x,
            double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = bias[r] + k.dot(w + r * cols, x, cols);
}

void affine_transpose_acc(const KernelTable& k, const double* w, const double* g,
                          double* x_grad, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) k.axpy(g[r], w + r * cols, x_grad, cols);
  }
}

void rank1_acc(const KernelTable& k, const double* g, const double* x, double* w_grad,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) k.axpy(g[r], x, w_grad + r * cols, cols);
  }
}

}  // namespace softloc::simd
