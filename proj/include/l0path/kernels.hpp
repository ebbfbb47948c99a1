#pragma once

#include <cstddef>
#include <span>

#include "l0path/data.hpp"

// Data-parallel inner loops shared by the solvers. Each output element is
// produced by exactly one serial column kernel, so the OpenMP versions are
// bit-identical to the serial references in `l0path::kernels::serial`.
namespace l0path::kernels {

// out[k] = <x_{coords[k]}, v>
void column_dots(const DataMatrix& x, std::span<const double> v,
                 std::span<const std::size_t> coords, std::span<double> out);

// out[i] = <x_i, v> for every column.
void all_column_dots(const DataMatrix& x, std::span<const double> v,
                     std::span<double> out);

// out = beta0 + X beta, parallel over rows for dense storage.
void linear_predictor(const DataMatrix& x, double beta0,
                      const SparseVector& beta, std::span<double> out);

// Number of threads the parallel kernels would use right now (1 when called
// from inside an enclosing parallel region).
int active_threads();

namespace serial {

void column_dots(const DataMatrix& x, std::span<const double> v,
                 std::span<const std::size_t> coords, std::span<double> out);
void all_column_dots(const DataMatrix& x, std::span<const double> v,
                     std::span<double> out);
void linear_predictor(const DataMatrix& x, double beta0,
                      const SparseVector& beta, std::span<double> out);

}  // namespace serial

}  // namespace l0path::kernels
