#include "l0path/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

namespace l0path {

std::vector<double> SparseVector::to_dense(std::size_t dim) const {
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.at(indices[k]) = values[k];
  }
  return out;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.indices.push_back(i);
      out.values.push_back(dense[i]);
    }
  }
  return out;
}

DataMatrix DataMatrix::dense(std::size_t n, std::size_t p,
                             std::vector<double> column_major) {
  if (n == 0 || p == 0) throw DataError("matrix must have n >= 1 and p >= 1");
  if (column_major.size() != n * p) {
    throw DataError("dense matrix: expected " + std::to_string(n * p) +
                    " values, got " + std::to_string(column_major.size()));
  }
  DataMatrix m;
  m.n_ = n;
  m.p_ = p;
  m.sparse_ = false;
  m.values_ = std::move(column_major);
  m.compute_stats();
  return m;
}

DataMatrix DataMatrix::sparse(std::size_t n, std::size_t p,
                              std::vector<std::size_t> col_ptr,
                              std::vector<std::size_t> row_idx,
                              std::vector<double> values) {
  if (n == 0 || p == 0) throw DataError("matrix must have n >= 1 and p >= 1");
  if (col_ptr.size() != p + 1 || col_ptr.front() != 0) {
    throw DataError("sparse matrix: column pointer array must have p + 1 "
                    "entries starting at 0");
  }
  if (row_idx.size() != values.size() || col_ptr.back() != values.size()) {
    throw DataError("sparse matrix: final column pointer must equal nnz");
  }
  for (std::size_t c = 0; c < p; ++c) {
    if (col_ptr[c + 1] < col_ptr[c]) {
      throw DataError("sparse matrix: column pointers must be nondecreasing");
    }
    for (std::size_t k = col_ptr[c]; k < col_ptr[c + 1]; ++k) {
      if (row_idx[k] >= n) {
        throw DataError("sparse matrix: row index out of range in column " +
                        std::to_string(c));
      }
      if (k > col_ptr[c] && row_idx[k] <= row_idx[k - 1]) {
        throw DataError("sparse matrix: row indices must be strictly "
                        "increasing within column " + std::to_string(c));
      }
    }
  }
  DataMatrix m;
  m.n_ = n;
  m.p_ = p;
  m.sparse_ = true;
  m.col_ptr_ = std::move(col_ptr);
  m.row_idx_ = std::move(row_idx);
  m.values_ = std::move(values);
  m.compute_stats();
  return m;
}

void DataMatrix::compute_stats() {
  col_sq_norms_.assign(p_, 0.0);
  col_means_.assign(p_, 0.0);
  for (std::size_t i = 0; i < p_; ++i) {
    double sq = 0.0;
    double sum = 0.0;
    for_each_in_column(i, [&](std::size_t, double x) {
      if (!std::isfinite(x)) {
        throw DataError("non-finite value in column " + std::to_string(i));
      }
      sq += x * x;
      sum += x;
    });
    col_sq_norms_[i] = sq;
    col_means_[i] = sum / static_cast<double>(n_);
  }
}

bool DataMatrix::stats_consistent(double rel_tol) const {
  for (std::size_t i = 0; i < p_; ++i) {
    double sq = 0.0;
    for_each_in_column(i, [&](std::size_t, double x) { sq += x * x; });
    if (std::abs(sq - col_sq_norms_[i]) >
        rel_tol * std::max(1.0, std::abs(sq))) {
      return false;
    }
  }
  return true;
}

double DataMatrix::at(std::size_t row, std::size_t col) const {
  if (row >= n_ || col >= p_) throw std::out_of_range("DataMatrix::at");
  if (!sparse_) return values_[col * n_ + row];
  auto first = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[col]);
  auto last = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[col + 1]);
  auto it = std::lower_bound(first, last, row);
  if (it == last || *it != row) return 0.0;
  return values_[static_cast<std::size_t>(it - row_idx_.begin())];
}

double DataMatrix::column_dot(std::size_t i, std::span<const double> v) const {
  if (i >= p_) {
    throw std::out_of_range("column index " + std::to_string(i) +
                            " out of range (p = " + std::to_string(p_) + ")");
  }
  if (v.size() != n_) throw DataError("column_dot: vector length mismatch");
  return dot(i, v.data());
}

void DataMatrix::add_scaled_column(std::size_t i, double alpha,
                                   std::span<double> v) const {
  for_each_in_column(i, [&](std::size_t r, double x) { v[r] += alpha * x; });
}

std::vector<double> DataMatrix::multiply(const SparseVector& beta) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t k = 0; k < beta.size(); ++k) {
    if (beta.indices[k] >= p_) throw DataError("coefficient index out of range");
    add_scaled_column(beta.indices[k], beta.values[k], out);
  }
  return out;
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
  if (rows.empty()) throw DataError("select_rows: empty row set");
  for (std::size_t r : rows) {
    if (r >= n_) throw DataError("select_rows: row index out of range");
  }
  if (!sparse_) {
    std::vector<double> out(rows.size() * p_);
    for (std::size_t c = 0; c < p_; ++c) {
      const double* x = values_.data() + c * n_;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        out[c * rows.size() + r] = x[rows[r]];
      }
    }
    return dense(rows.size(), p_, std::move(out));
  }
  // Map old row -> list of new positions (rows may repeat).
  std::vector<std::vector<std::size_t>> where(n_);
  for (std::size_t r = 0; r < rows.size(); ++r) where.at(rows[r]).push_back(r);
  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> val;
  std::vector<std::pair<std::size_t, double>> col;
  for (std::size_t c = 0; c < p_; ++c) {
    col.clear();
    for (std::size_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      for (std::size_t nr : where[row_idx_[k]]) col.emplace_back(nr, values_[k]);
    }
    std::sort(col.begin(), col.end());
    for (auto [r, v] : col) {
      idx.push_back(r);
      val.push_back(v);
    }
    ptr.push_back(idx.size());
  }
  return sparse(rows.size(), p_, std::move(ptr), std::move(idx),
                std::move(val));
}

DataMatrix DataMatrix::select_cols(std::span<const std::size_t> cols) const {
  if (cols.empty()) throw DataError("select_cols: empty column set");
  if (!sparse_) {
    std::vector<double> out;
    out.reserve(cols.size() * n_);
    for (std::size_t c : cols) {
      if (c >= p_) throw std::out_of_range("select_cols");
      out.insert(out.end(), values_.begin() + static_cast<std::ptrdiff_t>(c * n_),
                 values_.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_));
    }
    return dense(n_, cols.size(), std::move(out));
  }
  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t c : cols) {
    if (c >= p_) throw std::out_of_range("select_cols");
    for (std::size_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      idx.push_back(row_idx_[k]);
      val.push_back(values_[k]);
    }
    ptr.push_back(idx.size());
  }
  return sparse(n_, cols.size(), std::move(ptr), std::move(idx),
                std::move(val));
}

std::vector<double> DataMatrix::dense_values() const {
  if (!sparse_) return values_;
  std::vector<double> out(n_ * p_, 0.0);
  for (std::size_t c = 0; c < p_; ++c) {
    for (std::size_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      out[c * n_ + row_idx_[k]] = values_[k];
    }
  }
  return out;
}

DataMatrix DataMatrix::to_dense() const {
  return dense(n_, p_, dense_values());
}

DataMatrix DataMatrix::to_sparse() const {
  if (sparse_) return *this;
  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t c = 0; c < p_; ++c) {
    for (std::size_t r = 0; r < n_; ++r) {
      double x = values_[c * n_ + r];
      if (x != 0.0) {
        idx.push_back(r);
        val.push_back(x);
      }
    }
    ptr.push_back(idx.size());
  }
  return sparse(n_, p_, std::move(ptr), std::move(idx), std::move(val));
}

void check_response(const DataMatrix& x, std::span<const double> y,
                    bool classification) {
  if (y.size() != x.rows()) {
    throw DataError("response length " + std::to_string(y.size()) +
                    " does not match sample count " + std::to_string(x.rows()));
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw DataError("non-finite response at row " + std::to_string(i + 1));
    }
    if (classification && y[i] != 1.0 && y[i] != -1.0) {
      throw DataError("classification response must be -1 or +1 (row " +
                      std::to_string(i + 1) + ")");
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                   value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

Dataset load_csv(const std::filesystem::path& path, bool has_header,
                 std::optional<std::size_t> response_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    auto fields = split_commas(line);
    if (rows.empty()) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw DataError(path.string() + ": ragged row at line " +
                      std::to_string(line_no) + " (" +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(width) + ")");
    }
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto v = parse_double(fields[c]);
      if (!v) {
        throw DataError(path.string() + ": cannot parse '" +
                        std::string(trim(fields[c])) + "' at line " +
                        std::to_string(line_no) + ", column " +
                        std::to_string(c + 1));
      }
      if (!std::isfinite(*v)) {
        throw DataError(path.string() + ": non-finite value '" +
                        std::string(trim(fields[c])) + "' at line " +
                        std::to_string(line_no) + ", column " +
                        std::to_string(c + 1));
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no rows");

  const std::size_t n = rows.size();
  if (response_column && *response_column >= width) {
    throw DataError(path.string() + ": response column " +
                    std::to_string(*response_column) + " out of range (" +
                    std::to_string(width) + " columns)");
  }
  const std::size_t p = response_column ? width - 1 : width;
  if (p == 0) throw DataError(path.string() + ": no feature columns");

  std::vector<double> values(n * p);
  std::vector<double> y;
  if (response_column) y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t c_out = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (response_column && c == *response_column) {
        y[r] = rows[r][c];
      } else {
        values[c_out * n + r] = rows[r][c];
        ++c_out;
      }
    }
  }
  return Dataset{DataMatrix::dense(n, p, std::move(values)), std::move(y)};
}

std::vector<double> load_response(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<double> y;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto fields = split_commas(line);
    if (fields.size() != 1) {
      throw DataError(path.string() + ": expected a single column at line " +
                      std::to_string(line_no));
    }
    auto v = parse_double(fields[0]);
    if (!v) {
      if (first) {
        first = false;
        continue;
      }
      throw DataError(path.string() + ": cannot parse '" +
                      std::string(trim(fields[0])) + "' at line " +
                      std::to_string(line_no));
    }
    first = false;
    if (!std::isfinite(*v)) {
      throw DataError(path.string() + ": non-finite value at line " +
                      std::to_string(line_no));
    }
    y.push_back(*v);
  }
  if (y.empty()) throw DataError(path.string() + ": no rows");
  return y;
}

DataMatrix load_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
      std::transform(s.begin(), s.end(), s.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      return s;
    };
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" ||
        lower(format) != "coordinate" ||
        (lower(field) != "real" && lower(field) != "integer") ||
        lower(symmetry) != "general") {
      throw DataError(path.string() +
                      ": malformed header, expected '%%MatrixMarket matrix "
                      "coordinate real general'");
    }
  }
  std::size_t line_no = 1;
  std::size_t n = 0, p = 0, nnz = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> n >> p >> nnz)) {
      throw DataError(path.string() + ": malformed size line " +
                      std::to_string(line_no));
    }
    have_size = true;
    break;
  }
  if (!have_size) throw DataError(path.string() + ": missing size line");
  if (n == 0 || p == 0) throw DataError(path.string() + ": empty dimensions");

  std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
  entries.reserve(nnz);
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream ss(line);
    long long r = 0, c = 0;
    std::string vs;
    if (!(ss >> r >> c >> vs)) {
      throw DataError(path.string() + ": malformed entry at line " +
                      std::to_string(line_no));
    }
    auto v = parse_double(vs);
    if (!v || !std::isfinite(*v)) {
      throw DataError(path.string() + ": bad value '" + vs + "' at line " +
                      std::to_string(line_no));
    }
    if (r < 1 || c < 1 || static_cast<std::size_t>(r) > n ||
        static_cast<std::size_t>(c) > p) {
      throw DataError(path.string() + ": entry (" + std::to_string(r) + "," +
                      std::to_string(c) + ") at line " +
                      std::to_string(line_no) + " out of bounds for " +
                      std::to_string(n) + "x" + std::to_string(p) + " matrix");
    }
    entries.emplace_back(static_cast<std::size_t>(c - 1),
                         static_cast<std::size_t>(r - 1), *v);
  }
  if (entries.size() != nnz) {
    throw DataError(path.string() + ": header declares " + std::to_string(nnz) +
                    " entries, found " + std::to_string(entries.size()));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) {
                     return std::tie(std::get<0>(a), std::get<1>(a)) <
                            std::tie(std::get<0>(b), std::get<1>(b));
                   });
  std::vector<std::size_t> ptr(p + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto [c, r, v] = entries[k];
    if (!idx.empty() && k > 0 && std::get<0>(entries[k - 1]) == c &&
        std::get<1>(entries[k - 1]) == r) {
      val.back() += v;
      continue;
    }
    idx.push_back(r);
    val.push_back(v);
    ++ptr[c + 1];
  }
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  return DataMatrix::sparse(n, p, std::move(ptr), std::move(idx),
                            std::move(val));
}

void write_csv(const std::filesystem::path& path, const DataMatrix& x,
               const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      out << (c ? "," : "") << header[c];
    }
    out << '\n';
  }
  auto dense = x.dense_values();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (c) out << ',';
      out << dense[c * x.rows() + r];
    }
    out << '\n';
  }
}

void write_matrix_market(const std::filesystem::path& path,
                         const DataMatrix& x) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  DataMatrix s = x.to_sparse();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << s.rows() << ' ' << s.cols() << ' ' << s.nnz() << '\n';
  out << std::setprecision(17);
  auto ptr = s.col_ptr();
  auto idx = s.row_idx();
  auto val = s.values();
  for (std::size_t c = 0; c < s.cols(); ++c) {
    for (std::size_t k = ptr[c]; k < ptr[c + 1]; ++k) {
      out << idx[k] + 1 << ' ' << c + 1 << ' ' << val[k] << '\n';
    }
  }
}

void SyntheticSpec::validate() const {
  if (n == 0 || p == 0 || k == 0) {
    throw std::invalid_argument("n, p and k must be positive");
  }
  if (k > p) throw std::invalid_argument("k must not exceed p");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rho must lie in [0, 1)");
  }
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::invalid_argument("snr must be positive");
  }
}

std::vector<std::size_t> synthetic_support(std::size_t p, std::size_t k) {
  std::vector<std::size_t> out(k);
  for (std::size_t t = 0; t < k; ++t) out[t] = t * p / k;
  return out;
}

double synthetic_signal_variance(const SyntheticSpec& spec) {
  auto support = synthetic_support(spec.p, spec.k);
  double var = 0.0;
  for (std::size_t a : support) {
    for (std::size_t b : support) {
      std::size_t d = a > b ? a - b : b - a;
      var += std::pow(spec.rho, static_cast<double>(d));
    }
  }
  return var;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  const std::size_t p = spec.p;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Row-wise AR(1) across columns gives Cov(x_i, x_j) = rho^|i-j|.
  const double innov = std::sqrt(1.0 - spec.rho * spec.rho);
  std::vector<double> values(n * p);
  for (std::size_t r = 0; r < n; ++r) {
    double prev = normal(rng);
    values[r] = prev;
    for (std::size_t c = 1; c < p; ++c) {
      prev = spec.rho * prev + innov * normal(rng);
      values[c * n + r] = prev;
    }
  }

  SyntheticData out{DataMatrix::dense(n, p, std::move(values)), {}, {}, 0.0};
  out.beta_star.indices = synthetic_support(p, spec.k);
  out.beta_star.values.assign(spec.k, 1.0);
  out.sigma = std::sqrt(synthetic_signal_variance(spec) / spec.snr);

  std::vector<double> signal = out.x.multiply(out.beta_star);
  out.y.resize(n);
  if (!spec.classification) {
    for (std::size_t r = 0; r < n; ++r) {
      out.y[r] = signal[r] + out.sigma * normal(rng);
    }
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
      double prob = 1.0 / (1.0 + std::exp(-signal[r]));
      out.y[r] = unif(rng) < prob ? 1.0 : -1.0;
    }
  }
  return out;
}

}  // namespace l0path
