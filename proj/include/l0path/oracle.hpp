#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "l0path/data.hpp"
#include "l0path/objective.hpp"

// Exhaustive reference solvers for small problems. Slow by design; used to
// check the coordinate and path solvers.
namespace l0path::oracle {

struct SubsetSolution {
  double objective = 0.0;
  std::vector<std::size_t> support;
  double intercept = 0.0;
  SparseVector beta;
};

// Global minimizer of the squared-error objective over all 2^p supports.
// Restricted problems are solved through the normal equations with a
// minimum-norm solution when singular. L0L1 enumerates sign patterns and
// needs p <= 10. Ties keep the lexicographically smallest support.
SubsetSolution brute_force_subset(const DataMatrix& x,
                                  std::span<const double> y, double lambda,
                                  double gamma, PenaltyKind kind,
                                  bool fit_intercept = true,
                                  std::size_t max_p = 20);

// Restricted fit on a fixed support (every coefficient free to be nonzero).
// Returns nullopt for L0L1 when no sign pattern is self-consistent.
std::optional<SubsetSolution> fit_support(const DataMatrix& x,
                                          std::span<const double> y,
                                          std::span<const std::size_t> support,
                                          double lambda, double gamma,
                                          PenaltyKind kind, bool fit_intercept);

// Minimizer of (q/2)(b - btilde)^2 + lambda [b != 0] + gamma |b|^{1 or 2}
// over the box by a coarse grid plus derivative bisection on each side of
// zero. Ties with zero resolve to zero.
double brute_force_1d(double q, double btilde, double lambda, double gamma,
                      PenaltyKind kind, std::optional<Box> box = {});

}  // namespace l0path::oracle
