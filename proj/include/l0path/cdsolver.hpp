#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "l0path/data.hpp"
#include "l0path/model.hpp"
#include "l0path/objective.hpp"

namespace l0path {

struct FitOptions {
  // Relative objective change |df| / max(1, |f|) over a sweep.
  double tol = 1e-6;
  // Largest coefficient move in a sweep, relative to max(1, |b|). Both this
  // and `tol` must hold for a sweep to count as converged.
  double coef_tol = 1e-10;
  std::size_t max_sweeps = 500;
  // Path growth stops once a model reaches this support size.
  std::optional<std::size_t> max_support;
  // Candidate-set size for correlation screening; capped at p.
  std::size_t screening_size = 1000;
  bool active_set = true;
  bool greedy_order = true;
  bool intercept = true;

  void validate() const;
};

struct SweepResult {
  bool improved = false;
  double objective_delta = 0.0;
  double max_change = 0.0;
};

// Mutable iterate of coordinate descent at a fixed penalty. Keeps the linear
// predictor eta = b0 + X b and the per-sample loss derivatives w = dL/deta
// in sync with the coefficients; for squared error w is the negated
// residual.
class CDState {
 public:
  CDState(const DataMatrix& x, std::span<const double> y, Loss loss,
          PenaltyConfig penalty, const Model& init, bool fit_intercept);

  const DataMatrix& matrix() const { return *x_; }
  std::span<const double> response() const { return y_; }
  Loss loss() const { return loss_; }
  const PenaltyConfig& penalty() const { return penalty_; }

  std::span<const double> beta() const { return beta_; }
  double intercept() const { return beta0_; }
  std::span<const double> eta() const { return eta_; }
  std::span<const double> gradient() const { return w_; }
  std::vector<double> residual() const;

  // Zero-norm columns have curvature 0 and are never updated.
  double curvature(std::size_t i) const { return q_[i]; }
  bool excluded(std::size_t i) const { return q_[i] == 0.0; }

  // Subproblem for coordinate i given <x_i, w>.
  CoordSubproblem subproblem(std::size_t i, double grad_dot) const {
    return {q_[i], beta_[i] - grad_dot / q_[i]};
  }
  CoordSubproblem subproblem(std::size_t i) const {
    return subproblem(i, x_->dot(i, w_.data()));
  }

  double objective() const;
  SweepResult sweep(std::span<const std::size_t> coords);
  double update_intercept();

  // Sets b_i, keeping eta and w consistent.
  void set_coefficient(std::size_t i, double value);

  // Damped Newton steps on the intercept and the support coordinates that
  // sit strictly inside the box. Steps are projected onto the box, and an
  // L1 coordinate that would change sign stops at zero. The objective never
  // increases. Returns true if the point moved.
  bool polish();

  std::vector<std::size_t> support() const;
  Model to_model() const;

  // max |eta_maintained - eta_recomputed| / max(1, |eta|).
  double consistency_error() const;

  std::size_t sweep_count() const { return sweeps_; }
  const std::vector<double>& objective_history() const { return history_; }
  void record_objective() { history_.push_back(objective()); }

 private:
  void shift_intercept(double delta);

  const DataMatrix* x_;
  std::span<const double> y_;
  Loss loss_;
  PenaltyConfig penalty_;
  bool fit_intercept_;
  std::vector<double> beta_;
  double beta0_ = 0.0;
  std::vector<double> eta_;
  std::vector<double> w_;
  std::vector<double> q_;
  std::size_t sweeps_ = 0;
  std::vector<double> history_;
};

// Optional scratch shared between consecutive fits along a path.
struct FitWorkspace {
  // On input: <x_i, w> at `init` for all p (set dots_valid). On output:
  // the same at the returned model when the final pass computed them.
  std::vector<double> dots;
  bool dots_valid = false;
  // Objective after every sweep of the last fit.
  std::vector<double> objective_history;
};

// Coordinates sorted by |<x_i, r>| / ||x_i|| descending, ties by index.
// Zero-norm columns go last.
std::vector<std::size_t> greedy_order(const DataMatrix& x,
                                      std::span<const double> residual);

// Same ordering over a coordinate subset from precomputed dots.
std::vector<std::size_t> greedy_order(const DataMatrix& x,
                                      std::span<const std::size_t> coords,
                                      std::span<const double> dots);

// Coordinate descent to a coordinate-wise minimum at fixed (lambda, gamma).
Model fit_fixed(const DataMatrix& x, std::span<const double> y, Loss loss,
                const PenaltyConfig& penalty, const Model& init,
                const FitOptions& opts, FitWorkspace* workspace = nullptr);

// Coordinates (over all p) whose exact 1-D update would move b_i by more
// than `tol`.
std::vector<std::size_t> check_stationarity(const DataMatrix& x,
                                            std::span<const double> y,
                                            const Model& model, Loss loss,
                                            const PenaltyConfig& penalty,
                                            double tol = 1e-8);

// Empty-support model with the loss-minimizing intercept.
Model null_model(Loss loss, std::span<const double> y, bool fit_intercept);

}  // namespace l0path
