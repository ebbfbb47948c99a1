#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "l0path/cdsolver.hpp"
#include "l0path/data.hpp"
#include "l0path/model.hpp"
#include "l0path/objective.hpp"

namespace l0path {

struct PathOptions {
  FitOptions fit;
  // Solutions per gamma (including the empty anchor).
  std::size_t n_lambda = 100;
  // Multiplier applied to the largest entry threshold to pick the next
  // lambda; must lie in (0, 1).
  double scale_down = 0.98;
  bool local_search = false;
  std::size_t max_swaps = 100;
  bool warm_start = true;
  bool cross_gamma_warm_start = false;
  std::optional<Box> box;
  // Explicit lambda grids, bypassing the data-dependent grid. Either one
  // grid shared by every gamma or one per gamma.
  std::vector<std::vector<double>> lambda_grids;
  // Threads for independent gamma chains; 0 uses the OpenMP default.
  int threads = 0;

  void validate() const;
};

struct GammaPath {
  double gamma = 0.0;
  std::vector<Model> models;
  double seconds = 0.0;
};

struct FitPath {
  Loss loss = Loss::SquaredError;
  PenaltyKind kind = PenaltyKind::L0;
  std::size_t n = 0;
  std::size_t p = 0;
  PathOptions options;
  std::vector<GammaPath> paths;  // in gamma_grid order

  std::vector<double> gammas() const;
  std::size_t total_sweeps() const;
};

// 10 (or `count`) log-spaced values from gamma_max down to gamma_min; {0}
// for the pure L0 penalty.
std::vector<double> default_gamma_grid(PenaltyKind kind, std::size_t count = 10,
                                       double gamma_min = 1e-2,
                                       double gamma_max = 1e2);

// Largest lambda at which coordinate i (currently zero, subproblem `sub`)
// would be set nonzero by solve_coord.
double entry_threshold(const CoordSubproblem& sub, double gamma,
                       PenaltyKind kind, std::optional<Box> box = {});

// Squared-error convenience: threshold of zero coordinate i given the
// current residual r = y - eta.
double entry_threshold(const DataMatrix& x, std::size_t i,
                       std::span<const double> residual, double gamma,
                       PenaltyKind kind);

// Largest entry threshold at the null model. Throws DataError for an
// all-zero matrix.
double lambda_max(const DataMatrix& x, std::span<const double> y, Loss loss,
                  double gamma, PenaltyKind kind, bool fit_intercept = true,
                  std::optional<Box> box = {});

// <x_i, dL/deta> at `model` for every column.
std::vector<double> gradient_dots(const DataMatrix& x,
                                  std::span<const double> y,
                                  const Model& model, Loss loss);

// scale_down * min(max_{i outside support} entry threshold, current lambda),
// or nullopt when no excluded coordinate has a positive threshold.
// `dots` are gradient_dots at `current`; computed when empty.
std::optional<double> next_lambda(const DataMatrix& x,
                                  std::span<const double> y,
                                  const Model& current, Loss loss,
                                  PenaltyKind kind, double scale_down,
                                  std::optional<Box> box = {},
                                  std::span<const double> dots = {});

// The k coordinates with the largest |<x_i, r>| / ||x_i||, united with
// `support`, in ascending index order. Zero-norm columns are never chosen.
std::vector<std::size_t> screen(const DataMatrix& x,
                                std::span<const double> residual,
                                std::size_t k,
                                std::span<const std::size_t> support = {});
std::vector<std::size_t> screen_from_dots(
    const DataMatrix& x, std::span<const double> dots, std::size_t k,
    std::span<const std::size_t> support = {});

FitPath fit_path(const DataMatrix& x, std::span<const double> y, Loss loss,
                 PenaltyKind kind, std::span<const double> gamma_grid,
                 const PathOptions& opts);

}  // namespace l0path
