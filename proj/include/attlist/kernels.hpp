#pragma once

#include <cstdint>

namespace attlist::core {

// Dense kernels behind the tape primitives. The default entry points
// parallelize over output rows with OpenMP once the work size crosses a
// threshold; every output element is produced by exactly one thread with a
// sequential inner loop, so results are bitwise identical for any thread
// count. The serial:: twins are the reference implementations used by the
// kernel tests and the benchmark.
//
// All matrices are row-major.

namespace serial {

// c[m x n] = a[m x k] * b[k x n]           (+= when accumulate)
void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// c[m x n] = a[m x k] * b[n x k]^T
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// c[m x n] = a[k x m]^T * b[k x n]
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// Row-wise softmax with optional element mask (1 = live, 0 = excluded).
// Masked positions are exactly 0 in the output. Rows are stabilized by
// subtracting the row max over live positions. Rows must have at least one
// live position; callers validate (see row_softmax_check_mask).
void row_softmax(const double* x, const uint8_t* mask, double* y, int m, int n);

// dx[i,j] = y[i,j] * (dy[i,j] - sum_k dy[i,k]*y[i,k]); masked positions 0.
void row_softmax_backward(const double* y, const double* dy, const uint8_t* mask, double* dx,
                          int m, int n, bool accumulate);

}  // namespace serial

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void row_softmax(const double* x, const uint8_t* mask, double* y, int m, int n);
void row_softmax_backward(const double* y, const double* dy, const uint8_t* mask, double* dx,
                          int m, int n, bool accumulate);

// Throws DegenerateInputError if some row of an m x n mask has no live entry.
void row_softmax_check_mask(const uint8_t* mask, int m, int n);

// Thread-count control (no-ops without OpenMP).
int hardware_threads();
void set_threads(int n);

}  // namespace attlist::core
