#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace l0path {

// Raised for malformed or unusable input data (bad files, ragged rows,
// non-finite values, inconsistent dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sorted index -> value pairs. Indices strictly increasing.
struct SparseVector {
  std::vector<std::size_t> indices;
  std::vector<double> values;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  std::vector<double> to_dense(std::size_t dim) const;
  static SparseVector from_dense(std::span<const double> dense);
};

// n x p feature matrix, stored either dense column-major or as compressed
// sparse columns. Immutable after construction; column statistics are
// computed once by the factory functions.
class DataMatrix {
 public:
  static DataMatrix dense(std::size_t n, std::size_t p,
                          std::vector<double> column_major);
  static DataMatrix sparse(std::size_t n, std::size_t p,
                           std::vector<std::size_t> col_ptr,
                           std::vector<std::size_t> row_idx,
                           std::vector<double> values);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }
  bool is_sparse() const { return sparse_; }
  std::size_t nnz() const { return values_.size(); }

  double col_sq_norm(std::size_t i) const { return col_sq_norms_[i]; }
  double col_mean(std::size_t i) const { return col_means_[i]; }
  std::span<const double> col_sq_norms() const { return col_sq_norms_; }
  std::span<const double> col_means() const { return col_means_; }

  double at(std::size_t row, std::size_t col) const;

  // <x_i, v>. Throws std::out_of_range for a bad column index and
  // DataError when v has the wrong length.
  double column_dot(std::size_t i, std::span<const double> v) const;

  // Unchecked inner kernel used by the solvers. Both storages use the same
  // four-way accumulator split, so equal matrices give bit-equal results.
  double dot(std::size_t i, const double* v) const {
    if (sparse_) {
      double s[4] = {0.0, 0.0, 0.0, 0.0};
      const std::size_t body = n_ - n_ % 4;
      for (std::size_t k = col_ptr_[i]; k < col_ptr_[i + 1]; ++k) {
        const std::size_t r = row_idx_[k];
        s[r < body ? r % 4 : 0] += values_[k] * v[r];
      }
      return (s[0] + s[1]) + (s[2] + s[3]);
    }
    const double* x = values_.data() + i * n_;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t r = 0;
    for (; r + 4 <= n_; r += 4) {
      s0 += x[r] * v[r];
      s1 += x[r + 1] * v[r + 1];
      s2 += x[r + 2] * v[r + 2];
      s3 += x[r + 3] * v[r + 3];
    }
    for (; r < n_; ++r) s0 += x[r] * v[r];
    return (s0 + s1) + (s2 + s3);
  }

  // Calls f(row, value) for every stored entry of column i.
  template <class F>
  void for_each_in_column(std::size_t i, F&& f) const {
    if (sparse_) {
      for (std::size_t k = col_ptr_[i]; k < col_ptr_[i + 1]; ++k) {
        f(row_idx_[k], values_[k]);
      }
    } else {
      const double* x = values_.data() + i * n_;
      for (std::size_t r = 0; r < n_; ++r) f(r, x[r]);
    }
  }

  // v += alpha * x_i
  void add_scaled_column(std::size_t i, double alpha,
                         std::span<double> v) const;

  // X * beta for a sparse coefficient vector.
  std::vector<double> multiply(const SparseVector& beta) const;

  DataMatrix select_rows(std::span<const std::size_t> rows) const;
  DataMatrix select_cols(std::span<const std::size_t> cols) const;
  DataMatrix to_dense() const;
  DataMatrix to_sparse() const;

  // Column-major dense copy of the entries.
  std::vector<double> dense_values() const;

  // Recomputes column statistics from scratch and compares with the cache.
  bool stats_consistent(double rel_tol = 1e-12) const;

  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const std::size_t> row_idx() const { return row_idx_; }
  std::span<const double> values() const { return values_; }

 private:
  DataMatrix() = default;
  void compute_stats();

  std::size_t n_ = 0;
  std::size_t p_ = 0;
  bool sparse_ = false;
  std::vector<double> values_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> row_idx_;
  std::vector<double> col_sq_norms_;
  std::vector<double> col_means_;
};

// Checks y against X (length) and, for classification, the {-1,+1} coding.
void check_response(const DataMatrix& x, std::span<const double> y,
                    bool classification);

struct Dataset {
  DataMatrix x;
  std::vector<double> y;
};

// Reads a comma-separated numeric file. When response_column is set, that
// column becomes y and the remaining columns (in order) become X.
Dataset load_csv(const std::filesystem::path& path, bool has_header,
                 std::optional<std::size_t> response_column);

// Reads a single-column response file. A non-numeric first line is treated
// as a header.
std::vector<double> load_response(const std::filesystem::path& path);

// Reads "%%MatrixMarket matrix coordinate real general" (integer values are
// also accepted). Duplicate entries are summed.
DataMatrix load_matrix_market(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const DataMatrix& x,
               const std::vector<std::string>& header = {});
void write_matrix_market(const std::filesystem::path& path,
                         const DataMatrix& x);

// Parameters of the exponentially-correlated Gaussian design.
struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t p = 1000;
  std::size_t k = 50;
  double rho = 0.3;
  double snr = 5.0;
  std::uint64_t seed = 1;
  bool classification = false;

  void validate() const;
};

struct SyntheticData {
  DataMatrix x;
  std::vector<double> y;
  SparseVector beta_star;
  double sigma = 0.0;
};

// Indices of the k unit entries of beta*: floor(t * p / k), t = 0..k-1.
std::vector<std::size_t> synthetic_support(std::size_t p, std::size_t k);

// Population variance of x^T beta* under Sigma_ij = rho^|i-j|.
double synthetic_signal_variance(const SyntheticSpec& spec);

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace l0path
