#pragma once

#include <cstddef>

#ifdef TRAJLAB_USE_CBLAS
#include <cblas.h>
#endif

namespace trajlab::nn {

// Row-major matrix products used by the batched MLP passes. When built with
// TRAJLAB_USE_CBLAS these route through cblas_dgemm (pin the BLAS to one
// thread for reproducibility); the fallback loops compute identical
// quantities with plain dot-product ordering.

// C[m x n] = A[m x k] * B^T, with B stored [n x k].
inline void gemm_nt(const double* a, const double* b, double* c, int m, int n, int k) {
#ifdef TRAJLAB_USE_CBLAS
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, m, n, k, 1.0, a, k, b, k, 0.0, c, n);
#else
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double* ai = a + static_cast<std::size_t>(i) * k;
      const double* bj = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
#endif
}

// C[m x n] = A[m x k] * B, with B stored [k x n].
inline void gemm_nn(const double* a, const double* b, double* c, int m, int n, int k) {
#ifdef TRAJLAB_USE_CBLAS
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0, a, k, b, n, 0.0, c, n);
#else
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) ci[j] = 0.0;
    for (int p = 0; p < k; ++p) {
      const double aip = a[static_cast<std::size_t>(i) * k + p];
      const double* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
#endif
}

// C[m x n] += A^T * B, with A stored [k x m] and B stored [k x n].
inline void gemm_tn_acc(const double* a, const double* b, double* c, int m, int n, int k) {
#ifdef TRAJLAB_USE_CBLAS
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, m, n, k, 1.0, a, m, b, n, 1.0, c, n);
#else
  for (int p = 0; p < k; ++p) {
    const double* ap = a + static_cast<std::size_t>(p) * m;
    const double* bp = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      double* ci = c + static_cast<std::size_t>(i) * n;
      const double api = ap[i];
      for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
#endif
}

}  // namespace trajlab::nn
