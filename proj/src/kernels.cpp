#include "attlist/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "attlist/errors.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace attlist::core {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr long long kOmpWorkThreshold = 1 << 17;

inline bool parallel_worthwhile(long long work) {
#if defined(_OPENMP)
    return work >= kOmpWorkThreshold && !omp_in_parallel();
#else
    (void)work;
    return false;
#endif
}

}  // namespace

namespace serial {

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        double* ci = c + static_cast<size_t>(i) * n;
        if (!accumulate) std::fill(ci, ci + n, 0.0);
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        double* ci = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<size_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = accumulate ? ci[j] + acc : acc;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<size_t>(i) * n;
        if (!accumulate) std::fill(ci, ci + n, 0.0);
        for (int p = 0; p < k; ++p) {
            const double api = a[static_cast<size_t>(p) * m + i];
            const double* bp = b + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

namespace detail {

inline void softmax_row(const double* x, const uint8_t* mask, double* y, int n) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        if (!mask || mask[j]) mx = std::max(mx, x[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        if (!mask || mask[j]) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        } else {
            y[j] = 0.0;
        }
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < n; ++j) y[j] *= inv;
}

inline void softmax_row_backward(const double* y, const double* dy, const uint8_t* mask,
                                 double* dx, int n, bool accumulate) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += dy[j] * y[j];
    for (int j = 0; j < n; ++j) {
        const double g = (!mask || mask[j]) ? y[j] * (dy[j] - s) : 0.0;
        dx[j] = accumulate ? dx[j] + g : g;
    }
}

}  // namespace detail

void row_softmax(const double* x, const uint8_t* mask, double* y, int m, int n) {
    for (int i = 0; i < m; ++i) {
        const size_t off = static_cast<size_t>(i) * n;
        detail::softmax_row(x + off, mask ? mask + off : nullptr, y + off, n);
    }
}

void row_softmax_backward(const double* y, const double* dy, const uint8_t* mask, double* dx,
                          int m, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const size_t off = static_cast<size_t>(i) * n;
        detail::softmax_row_backward(y + off, dy + off, mask ? mask + off : nullptr, dx + off, n,
                                     accumulate);
    }
}

}  // namespace serial

void row_softmax_check_mask(const uint8_t* mask, int m, int n) {
    if (!mask) return;
    for (int i = 0; i < m; ++i) {
        bool live = false;
        for (int j = 0; j < n && !live; ++j) live = mask[static_cast<size_t>(i) * n + j] != 0;
        if (!live)
            throw DegenerateInputError("softmax row " + std::to_string(i) +
                                       " is fully masked");
    }
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    const long long work = static_cast<long long>(m) * k * n;
    if (!parallel_worthwhile(work)) {
        serial::matmul(a, b, c, m, k, n, accumulate);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
        serial::matmul(a + static_cast<size_t>(i) * k, b, c + static_cast<size_t>(i) * n, 1, k, n,
                       accumulate);
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    const long long work = static_cast<long long>(m) * k * n;
    if (!parallel_worthwhile(work)) {
        serial::matmul_nt(a, b, c, m, k, n, accumulate);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
        serial::matmul_nt(a + static_cast<size_t>(i) * k, b, c + static_cast<size_t>(i) * n, 1, k,
                          n, accumulate);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    const long long work = static_cast<long long>(m) * k * n;
    if (!parallel_worthwhile(work)) {
        serial::matmul_tn(a, b, c, m, k, n, accumulate);
        return;
    }
    // Parallel over output rows: row i of c reads column i of a.
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<size_t>(i) * n;
        if (!accumulate) std::fill(ci, ci + n, 0.0);
        for (int p = 0; p < k; ++p) {
            const double api = a[static_cast<size_t>(p) * m + i];
            const double* bp = b + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

void row_softmax(const double* x, const uint8_t* mask, double* y, int m, int n) {
    const long long work = static_cast<long long>(m) * n;
    if (!parallel_worthwhile(work)) {
        serial::row_softmax(x, mask, y, m, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const size_t off = static_cast<size_t>(i) * n;
        serial::detail::softmax_row(x + off, mask ? mask + off : nullptr, y + off, n);
    }
}

void row_softmax_backward(const double* y, const double* dy, const uint8_t* mask, double* dx,
                          int m, int n, bool accumulate) {
    const long long work = static_cast<long long>(m) * n;
    if (!parallel_worthwhile(work)) {
        serial::row_softmax_backward(y, dy, mask, dx, m, n, accumulate);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const size_t off = static_cast<size_t>(i) * n;
        serial::detail::softmax_row_backward(y + off, dy + off, mask ? mask + off : nullptr,
                                             dx + off, n, accumulate);
    }
}

int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
#endif
}

void set_threads(int n) {
#if defined(_OPENMP)
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace attlist::core
