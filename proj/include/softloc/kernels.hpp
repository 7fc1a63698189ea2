#pragma once

// Dense double-precision inner loops used by the classifier. Every kernel
// has a scalar reference implementation; an AVX2+FMA variant is selected at
// runtime when the CPU supports it. Variants agree to rounding (reduction
// order differs), and tests/kernels_test.cpp holds them to that.

#include <cstddef>
#include <string_view>

namespace softloc::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[i] = max(x[i], 0); NaN maps to 0
  void (*relu)(const double* x, double* y, std::size_t n);
  /// grad[i] = pre[i] > 0 ? grad[i] : 0
  void (*relu_mask)(const double* pre, double* grad, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 translation unit was not built or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table used by the model. Defaults to the best supported ISA; the
/// SOFTLOC_ISA environment variable ("scalar" or "avx2") overrides it at
/// first use.
const KernelTable& active_kernels();

/// Forces a variant. Returns false (and changes nothing) if unsupported.
bool select_isa(Isa isa);

// Composite BLAS-2 style helpers built on a kernel table. Matrices are
// row-major with `cols` doubles per row.

/// y = bias + W x
void affine(const KernelTable& k, const double* w, const double* bias, const double* x,
            double* y, std::size_t rows, std::size_t cols);

/// x_grad += W^T g (rows with g[r] == 0 are skipped)
void affine_transpose_acc(const KernelTable& k, const double* w, const double* g,
                          double* x_grad, std::size_t rows, std::size_t cols);

/// W_grad += g x^T (rows with g[r] == 0 are skipped)
void rank1_acc(const KernelTable& k, const double* g, const double* x, double* w_grad,
               std::size_t rows, std::size_t cols);

}  // namespace softloc::simd
