#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "l0path/cdsolver.hpp"
#include "l0path/model.hpp"

namespace l0path {

// Remove `remove` from the support and add `add` at `new_value`.
struct SwapCandidate {
  std::size_t remove = 0;
  std::size_t add = 0;
  double new_value = 0.0;
  // Objective change of the swapped point relative to the current model.
  double objective_delta = 0.0;
};

struct SwapOptions {
  FitOptions fit;
  std::size_t max_swaps = 100;
  // Accepted swaps must lower the objective by more than this.
  double min_improvement = 1e-10;
};

// Best-improving 1-for-1 swap, or nullopt. For squared error the delta is
// exact; for classification losses it is the majorization upper bound, so a
// returned candidate is always a true improvement. Ties go to the smaller
// remove index, then the smaller add index. `candidates` limits the "add"
// side (all columns when empty).
std::optional<SwapCandidate> best_swap(
    const DataMatrix& x, std::span<const double> y, const Model& model,
    Loss loss, const PenaltyConfig& penalty,
    std::span<const std::size_t> candidates = {},
    double min_improvement = 1e-10);

// Alternates best_swap and warm-started coordinate descent until no
// improving swap remains.
Model local_search(const DataMatrix& x, std::span<const double> y,
                   const Model& model, Loss loss, const PenaltyConfig& penalty,
                   const SwapOptions& opts);

}  // namespace l0path
