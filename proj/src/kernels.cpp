#include "l0path/kernels.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace l0path::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1u << 16;

bool go_parallel(std::size_t work) {
#if defined(_OPENMP)
  return work >= kParallelWork && !omp_in_parallel() &&
         omp_get_max_threads() > 1;
#else
  (void)work;
  return false;
#endif
}

std::size_t column_work(const DataMatrix& x, std::size_t columns) {
  if (x.is_sparse()) {
    return x.cols() ? x.nnz() / x.cols() * columns : 0;
  }
  return x.rows() * columns;
}

}  // namespace

int active_threads() {
#if defined(_OPENMP)
  return omp_in_parallel() ? 1 : omp_get_max_threads();
#else
  return 1;
#endif
}

void column_dots(const DataMatrix& x, std::span<const double> v,
                 std::span<const std::size_t> coords, std::span<double> out) {
  const auto m = static_cast<std::ptrdiff_t>(coords.size());
  const double* vp = v.data();
#pragma omp parallel for schedule(static) if (go_parallel(column_work(x, coords.size())))
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    out[static_cast<std::size_t>(k)] =
        x.dot(coords[static_cast<std::size_t>(k)], vp);
  }
}

void all_column_dots(const DataMatrix& x, std::span<const double> v,
                     std::span<double> out) {
  const auto p = static_cast<std::ptrdiff_t>(x.cols());
  const double* vp = v.data();
#pragma omp parallel for schedule(static) if (go_parallel(column_work(x, x.cols())))
  for (std::ptrdiff_t i = 0; i < p; ++i) {
    out[static_cast<std::size_t>(i)] = x.dot(static_cast<std::size_t>(i), vp);
  }
}

void linear_predictor(const DataMatrix& x, double beta0,
                      const SparseVector& beta, std::span<double> out) {
  if (x.is_sparse()) {
    serial::linear_predictor(x, beta0, beta, out);
    return;
  }
  const std::size_t n = x.rows();
  const std::size_t m = beta.size();
  const auto vals = x.values();
  const auto nn = static_cast<std::ptrdiff_t>(n);
  // Each row accumulates support columns in index order, matching the serial
  // path operation for operation.
#pragma omp parallel for schedule(static) if (go_parallel(n * m))
  for (std::ptrdiff_t rr = 0; rr < nn; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    double s = beta0;
    for (std::size_t k = 0; k < m; ++k) {
      s += vals[beta.indices[k] * n + r] * beta.values[k];
    }
    out[r] = s;
  }
}

namespace serial {

void column_dots(const DataMatrix& x, std::span<const double> v,
                 std::span<const std::size_t> coords, std::span<double> out) {
  for (std::size_t k = 0; k < coords.size(); ++k) {
    out[k] = x.dot(coords[k], v.data());
  }
}

void all_column_dots(const DataMatrix& x, std::span<const double> v,
                     std::span<double> out) {
  for (std::size_t i = 0; i < x.cols(); ++i) out[i] = x.dot(i, v.data());
}

void linear_predictor(const DataMatrix& x, double beta0,
                      const SparseVector& beta, std::span<double> out) {
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = beta0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double b = beta.values[k];
    x.for_each_in_column(beta.indices[k],
                         [&](std::size_t r, double v) { out[r] += v * b; });
  }
}

}  // namespace serial

}  // namespace l0path::kernels
