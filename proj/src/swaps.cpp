#include "l0path/swaps.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "l0path/kernels.hpp"
#include "l0path/path.hpp"

namespace l0path {

std::optional<SwapCandidate> best_swap(const DataMatrix& x,
                                       std::span<const double> y,
                                       const Model& model, Loss loss,
                                       const PenaltyConfig& penalty,
                                       std::span<const std::size_t> candidates,
                                       double min_improvement) {
  if (model.beta.empty()) return std::nullopt;
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();

  std::vector<double> eta(n);
  kernels::linear_predictor(x, model.intercept, model.beta, eta);
  const double base_loss = loss_value(loss, y, eta);

  std::vector<char> in_support(p, 0);
  for (std::size_t i : model.beta.indices) in_support[i] = 1;
  std::vector<std::size_t> adds;
  if (candidates.empty()) {
    for (std::size_t i = 0; i < p; ++i) {
      if (!in_support[i] && x.col_sq_norm(i) > 0.0) adds.push_back(i);
    }
  } else {
    for (std::size_t i : candidates) {
      if (!in_support[i] && x.col_sq_norm(i) > 0.0) adds.push_back(i);
    }
    std::sort(adds.begin(), adds.end());
    adds.erase(std::unique(adds.begin(), adds.end()), adds.end());
  }
  if (adds.empty()) return std::nullopt;

  std::vector<double> q(adds.size());
  for (std::size_t k = 0; k < adds.size(); ++k) {
    q[k] = majorization_constant(loss, x.col_sq_norm(adds[k]));
  }

  std::optional<SwapCandidate> best;
  double best_delta = -min_improvement;
  std::vector<double> eta_minus(n);
  std::vector<double> w_minus(n);
  std::vector<double> dots(adds.size());
  for (std::size_t s = 0; s < model.beta.size(); ++s) {
    const std::size_t j = model.beta.indices[s];
    const double bj = model.beta.values[s];
    std::copy(eta.begin(), eta.end(), eta_minus.begin());
    x.add_scaled_column(j, -bj, eta_minus);
    for (std::size_t r = 0; r < n; ++r) {
      w_minus[r] = sample_loss_derivative(loss, y[r], eta_minus[r]);
    }
    // Objective change from dropping j alone.
    const double drop = loss_value(loss, y, eta_minus) - base_loss -
                        coefficient_penalty(penalty, bj);
    kernels::column_dots(x, w_minus, adds, dots);
    for (std::size_t k = 0; k < adds.size(); ++k) {
      const CoordSubproblem sub{q[k], -dots[k] / q[k]};
      const double v = solve_coord(sub, penalty);
      if (v == 0.0) continue;
      const double delta = drop + coord_objective(sub, penalty, v);
      if (delta < best_delta) {
        best_delta = delta;
        best = SwapCandidate{j, adds[k], v, delta};
      }
    }
  }
  return best;
}

Model local_search(const DataMatrix& x, std::span<const double> y,
                   const Model& model, Loss loss, const PenaltyConfig& penalty,
                   const SwapOptions& opts) {
  Model current = model;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < x.cols(); ++i) valid += x.col_sq_norm(i) > 0.0;
  const bool screened = opts.fit.screening_size < valid;

  for (std::size_t round = 0; round < opts.max_swaps; ++round) {
    std::vector<std::size_t> candidates;
    if (screened) {
      std::vector<double> dots = gradient_dots(x, y, current, loss);
      candidates = screen_from_dots(x, dots, opts.fit.screening_size,
                                    current.beta.indices);
    }
    auto swap = best_swap(x, y, current, loss, penalty, candidates,
                          opts.min_improvement);
    if (!swap) return current;

    std::vector<double> beta = current.beta.to_dense(x.cols());
    beta[swap->remove] = 0.0;
    beta[swap->add] = swap->new_value;
    Model swapped = current;
    swapped.beta = SparseVector::from_dense(beta);
    Model next = fit_fixed(x, y, loss, penalty, swapped, opts.fit);
    next.sweeps += current.sweeps;
    if (!(next.objective < current.objective - opts.min_improvement)) {
      return current;
    }
    current = std::move(next);
  }
  spdlog::warn("local search stopped after max_swaps={} swaps", opts.max_swaps);
  return current;
}

}  // namespace l0path
