#pragma once

#include <cstddef>

namespace softloc::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void relu_scalar(const double* x, double* y, std::size_t n);
void relu_mask_scalar(const double* pre, double* grad, std::size_t n);

#if defined(SOFTLOC_HAVE_AVX2_TU)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void relu_avx2(const double* x, double* y, std::size_t n);
void relu_mask_avx2(const double* pre, double* grad, std::size_t n);
#endif

}  // namespace softloc::simd::detail
