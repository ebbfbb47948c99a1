#include "l0path/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace l0path::oracle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const DataMatrix& x) {
  MatrixXd m(x.rows(), x.cols());
  const std::vector<double> v = x.dense_values();
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t r = 0; r < x.rows(); ++r) m(r, c) = v[c * x.rows() + r];
  }
  return m;
}

struct Problem {
  MatrixXd x;
  VectorXd y;
  double lambda;
  double gamma;
  PenaltyKind kind;
  bool intercept;
};

// Design [1 | X_S] (or X_S) and its Gram matrix.
struct Restricted {
  MatrixXd d;
  MatrixXd gram;
  VectorXd rhs;
  int offset;
};

Restricted restrict(const Problem& pb, std::span<const std::size_t> support) {
  const int offset = pb.intercept ? 1 : 0;
  const auto m = static_cast<Eigen::Index>(support.size()) + offset;
  Restricted r{MatrixXd(pb.x.rows(), m), {}, {}, offset};
  if (pb.intercept) r.d.col(0).setOnes();
  for (std::size_t j = 0; j < support.size(); ++j) {
    r.d.col(static_cast<Eigen::Index>(j) + offset) =
        pb.x.col(static_cast<Eigen::Index>(support[j]));
  }
  r.gram = r.d.transpose() * r.d;
  r.rhs = r.d.transpose() * pb.y;
  return r;
}

double evaluate(const Problem& pb, const Restricted& r, const VectorXd& theta,
                std::size_t support_size) {
  const VectorXd resid = pb.y - r.d * theta;
  double pen = pb.lambda * static_cast<double>(support_size);
  for (Eigen::Index j = r.offset; j < theta.size(); ++j) {
    if (pb.kind == PenaltyKind::L0L1) pen += pb.gamma * std::abs(theta(j));
    if (pb.kind == PenaltyKind::L0L2) pen += pb.gamma * theta(j) * theta(j);
  }
  return 0.5 * resid.squaredNorm() + pen;
}

VectorXd min_norm_solve(const MatrixXd& a, const VectorXd& b) {
  return a.completeOrthogonalDecomposition().solve(b);
}

std::optional<SubsetSolution> solve_support(
    const Problem& pb, std::span<const std::size_t> support) {
  const Restricted r = restrict(pb, support);
  const auto k = static_cast<Eigen::Index>(support.size());

  auto package = [&](const VectorXd& theta) {
    SubsetSolution s;
    s.objective = evaluate(pb, r, theta, support.size());
    s.support.assign(support.begin(), support.end());
    s.intercept = pb.intercept ? theta(0) : 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double v = theta(j + r.offset);
      if (v != 0.0) {
        s.beta.indices.push_back(support[static_cast<std::size_t>(j)]);
        s.beta.values.push_back(v);
      }
    }
    return s;
  };

  if (pb.kind != PenaltyKind::L0L1 || k == 0) {
    MatrixXd a = r.gram;
    if (pb.kind == PenaltyKind::L0L2) {
      for (Eigen::Index j = 0; j < k; ++j) a(j + r.offset, j + r.offset) += 2.0 * pb.gamma;
    }
    return package(min_norm_solve(a, r.rhs));
  }

  // Each sign pattern fixes the l1 term to a linear one; keep solutions
  // lying strictly inside their orthant.
  auto cod = r.gram.completeOrthogonalDecomposition();
  std::optional<SubsetSolution> best;
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << k); ++pattern) {
    VectorXd rhs = r.rhs;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double s = (pattern >> j) & 1U ? -1.0 : 1.0;
      rhs(j + r.offset) -= pb.gamma * s;
    }
    const VectorXd theta = cod.solve(rhs);
    bool consistent = true;
    for (Eigen::Index j = 0; j < k && consistent; ++j) {
      const double s = (pattern >> j) & 1U ? -1.0 : 1.0;
      consistent = theta(j + r.offset) * s > 0.0;
    }
    if (!consistent) continue;
    SubsetSolution s = package(theta);
    if (!best || s.objective < best->objective) best = std::move(s);
  }
  return best;
}

bool better(const SubsetSolution& a, const SubsetSolution& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  return std::lexicographical_compare(a.support.begin(), a.support.end(),
                                      b.support.begin(), b.support.end());
}

}  // namespace

std::optional<SubsetSolution> fit_support(const DataMatrix& x,
                                          std::span<const double> y,
                                          std::span<const std::size_t> support,
                                          double lambda, double gamma,
                                          PenaltyKind kind,
                                          bool fit_intercept) {
  check_response(x, y, false);
  Problem pb{to_eigen(x), Eigen::Map<const VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())),
             lambda, gamma, kind, fit_intercept};
  return solve_support(pb, support);
}

SubsetSolution brute_force_subset(const DataMatrix& x,
                                  std::span<const double> y, double lambda,
                                  double gamma, PenaltyKind kind,
                                  bool fit_intercept, std::size_t max_p) {
  const std::size_t p = x.cols();
  if (max_p > 20) throw std::invalid_argument("max_p may not exceed 20");
  if (p > max_p) {
    throw std::invalid_argument("brute_force_subset: p = " + std::to_string(p) +
                                " exceeds max_p = " + std::to_string(max_p));
  }
  if (kind == PenaltyKind::L0L1 && p > 10) {
    throw std::invalid_argument("brute_force_subset: L0L1 needs p <= 10");
  }
  if (lambda < 0.0 || gamma < 0.0) {
    throw std::invalid_argument("lambda and gamma must be nonnegative");
  }
  check_response(x, y, false);
  const Problem pb{to_eigen(x),
                   Eigen::Map<const VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())),
                   lambda, gamma, kind, fit_intercept};

  const auto masks = static_cast<std::ptrdiff_t>(std::size_t{1} << p);
  std::optional<SubsetSolution> best;
#pragma omp parallel
  {
    std::optional<SubsetSolution> local;
    std::vector<std::size_t> support;
#pragma omp for schedule(static)
    for (std::ptrdiff_t mask = 0; mask < masks; ++mask) {
      support.clear();
      for (std::size_t i = 0; i < p; ++i) {
        if ((static_cast<std::size_t>(mask) >> i) & 1U) support.push_back(i);
      }
      auto s = solve_support(pb, support);
      if (s && (!local || better(*s, *local))) local = std::move(s);
    }
#pragma omp critical
    {
      if (local && (!best || better(*local, *best))) best = std::move(local);
    }
  }
  return *best;
}

double brute_force_1d(double q, double btilde, double lambda, double gamma,
                      PenaltyKind kind, std::optional<Box> box) {
  if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
  const double range = std::max(10.0, 3.0 * std::abs(btilde));
  const double lo = box ? std::max(box->lo, -range) : -range;
  const double hi = box ? std::min(box->hi, range) : range;

  auto smooth = [&](double b) {
    double v = 0.5 * q * (b - btilde) * (b - btilde);
    if (kind == PenaltyKind::L0L1) v += gamma * std::abs(b);
    if (kind == PenaltyKind::L0L2) v += gamma * b * b;
    return v;
  };
  auto g = [&](double b) { return smooth(b) + (b != 0.0 ? lambda : 0.0); };
  // Derivative of the smooth part away from zero; sign s picks the side.
  auto slope = [&](double b, double s) {
    double d = q * (b - btilde);
    if (kind == PenaltyKind::L0L1) d += gamma * s;
    if (kind == PenaltyKind::L0L2) d += 2.0 * gamma * b;
    return d;
  };

  std::vector<double> candidates{0.0};
  if (lo < 0.0) candidates.push_back(lo);
  if (hi > 0.0) candidates.push_back(hi);

  // Coarse grid.
  const int steps = 2000;
  double grid_best = 0.0;
  for (int t = 0; t <= steps; ++t) {
    const double b = lo + (hi - lo) * t / steps;
    if (g(b) < g(grid_best)) grid_best = b;
  }
  candidates.push_back(grid_best);

  // The smooth part is convex on each side, so bisection on its slope finds
  // the one-sided minimizer.
  auto side = [&](double a, double b, double s) {
    if (slope(a, s) >= 0.0) return a;
    if (slope(b, s) <= 0.0) return b;
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      (slope(mid, s) > 0.0 ? b : a) = mid;
    }
    return std::abs(slope(a, s)) <= std::abs(slope(b, s)) ? a : b;
  };
  if (hi > 0.0) candidates.push_back(side(0.0, hi, 1.0));
  if (lo < 0.0) candidates.push_back(side(lo, 0.0, -1.0));

  double best = 0.0;
  double best_val = g(0.0);
  for (double b : candidates) {
    const double v = g(b);
    if (v < best_val) {
      best_val = v;
      best = b;
    }
  }
  return best;
}

}  // namespace l0path::oracle
