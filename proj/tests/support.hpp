#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "l0path/data.hpp"
#include "l0path/model.hpp"
#include "l0path/objective.hpp"

namespace testing {

using l0path::DataMatrix;

inline DataMatrix random_dense(std::size_t n, std::size_t p, std::uint64_t seed,
                               double density = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  std::vector<double> v(n * p, 0.0);
  for (double& x : v) {
    if (unif(rng) < density) x = normal(rng);
  }
  return DataMatrix::dense(n, p, std::move(v));
}

// y = X beta + noise with `k` unit coefficients at random positions.
inline std::vector<double> random_response(const DataMatrix& x, std::size_t k,
                                           double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> beta(x.cols(), 0.0);
  for (std::size_t t = 0; t < k && t < x.cols(); ++t) {
    beta[rng() % x.cols()] = normal(rng) > 0 ? 1.0 : -1.0;
  }
  std::vector<double> y = x.multiply(l0path::SparseVector::from_dense(beta));
  for (double& v : y) v += noise * normal(rng);
  return y;
}

inline std::vector<double> random_labels(const DataMatrix& x, std::size_t k,
                                         std::uint64_t seed) {
  std::vector<double> s = random_response(x, k, 1.0, seed);
  std::vector<double> y(s.size());
  for (std::size_t r = 0; r < s.size(); ++r) y[r] = s[r] >= 0.0 ? 1.0 : -1.0;
  // Keep both classes present.
  y[0] = 1.0;
  y[1] = -1.0;
  return y;
}

// Naive objective evaluation straight from the definition.
inline double naive_objective(const DataMatrix& x, const std::vector<double>& y,
                              double b0, const std::vector<double>& beta,
                              l0path::Loss loss, double lambda, double gamma,
                              l0path::PenaltyKind kind) {
  double f = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double eta = b0;
    for (std::size_t c = 0; c < x.cols(); ++c) eta += x.at(r, c) * beta[c];
    f += l0path::sample_loss(loss, y[r], eta);
  }
  for (double b : beta) {
    if (b == 0.0) continue;
    f += lambda;
    if (kind == l0path::PenaltyKind::L0L1) f += gamma * std::abs(b);
    if (kind == l0path::PenaltyKind::L0L2) f += gamma * b * b;
  }
  return f;
}

// Second subset oracle for squared error with intercept, L0 or L0L2:
// supports enumerated from the full set downwards, each restricted problem
// solved by Gaussian elimination with partial pivoting.
struct NaiveSubset {
  double objective = INFINITY;
  std::vector<std::size_t> support;
};

inline bool gauss_solve(std::vector<std::vector<double>> a,
                        std::vector<double> b, std::vector<double>& out) {
  const std::size_t m = b.size();
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < m; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  out.assign(m, 0.0);
  for (std::size_t c = m; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < m; ++k) s -= a[c][k] * out[k];
    out[c] = s / a[c][c];
  }
  return true;
}

inline NaiveSubset naive_subset(const DataMatrix& x, const std::vector<double>& y,
                                double lambda, double gamma,
                                l0path::PenaltyKind kind) {
  const std::size_t p = x.cols();
  const std::size_t n = x.rows();
  NaiveSubset best;
  for (std::size_t mask = (std::size_t{1} << p); mask-- > 0;) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < p; ++i) {
      if ((mask >> i) & 1U) s.push_back(i);
    }
    const std::size_t m = s.size() + 1;
    auto col = [&](std::size_t j, std::size_t r) {
      return j == 0 ? 1.0 : x.at(r, s[j - 1]);
    };
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t r = 0; r < n; ++r) a[j][k] += col(j, r) * col(k, r);
      }
      for (std::size_t r = 0; r < n; ++r) b[j] += col(j, r) * y[r];
      if (j > 0 && kind == l0path::PenaltyKind::L0L2) a[j][j] += 2.0 * gamma;
    }
    std::vector<double> theta;
    if (!gauss_solve(a, b, theta)) continue;
    std::vector<double> beta(p, 0.0);
    for (std::size_t j = 1; j < m; ++j) beta[s[j - 1]] = theta[j];
    const double f =
        naive_objective(x, y, theta[0], beta, l0path::Loss::SquaredError,
                        lambda, gamma, kind);
    if (f < best.objective) {
      best.objective = f;
      best.support = s;
    }
  }
  return best;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("l0path_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace testing
