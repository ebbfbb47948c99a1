#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "l0path/data.hpp"

namespace l0path {

enum class Loss { SquaredError, Logistic, SquaredHinge };
enum class PenaltyKind { L0, L0L1, L0L2 };

std::string_view to_string(Loss loss);
std::string_view to_string(PenaltyKind kind);
// Accepts "squared" / "squared-error", "logistic", "squared-hinge".
Loss parse_loss(std::string_view name);
// Accepts "L0", "L0L1", "L0L2" (case-insensitive).
PenaltyKind parse_penalty(std::string_view name);

inline bool is_classification(Loss loss) { return loss != Loss::SquaredError; }

// Coefficient bounds shared by every coordinate. lo <= 0 <= hi keeps the
// zero vector feasible.
struct Box {
  double lo = -INFINITY;
  double hi = INFINITY;
};

struct PenaltyConfig {
  PenaltyKind kind = PenaltyKind::L0;
  double lambda = 0.0;
  double gamma = 0.0;
  std::optional<Box> box;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// Restriction of the objective to one coefficient:
//   g(b) = (q/2)(b - btilde)^2 + lambda*[b != 0] + gamma*|b|^{1 or 2}
struct CoordSubproblem {
  double q = 1.0;
  double btilde = 0.0;
};

// Per-sample loss L(y, eta) and its first two derivatives in eta. The
// second derivative of the squared hinge is taken as 2 on the active side.
double sample_loss(Loss loss, double y, double eta);
double sample_loss_derivative(Loss loss, double y, double eta);
double sample_loss_curvature(Loss loss, double y, double eta);

// Sum of per-sample losses. Throws DataError on non-finite eta.
double loss_value(Loss loss, std::span<const double> y,
                  std::span<const double> eta);

// lambda * |supp| + gamma * sum |b|^q for the configured penalty.
double penalty_value(const PenaltyConfig& penalty, std::span<const double> beta);
double penalty_value(const PenaltyConfig& penalty, const SparseVector& beta);

// Penalty charged for a single coefficient value b.
double coefficient_penalty(const PenaltyConfig& penalty, double b);

// Full penalized objective. The intercept is not penalized.
double objective_value(const DataMatrix& x, std::span<const double> y,
                       double beta0, const SparseVector& beta, Loss loss,
                       const PenaltyConfig& penalty);

// g(b) - (q/2) btilde^2, i.e. the subproblem value relative to the constant
// part; avoids cancelling the large btilde^2 term.
double coord_objective(const CoordSubproblem& sub, const PenaltyConfig& penalty,
                       double b);

// Minimizer of the continuous part (everything except the lambda charge),
// clipped into the box.
double coord_shrink(const CoordSubproblem& sub, const PenaltyConfig& penalty);

// Exact global minimizer of g over the box; ties between the nonzero
// candidate and 0 resolve to 0.
double solve_coord(const CoordSubproblem& sub, const PenaltyConfig& penalty);

// Decrease of the continuous part of g when moving from 0 to the shrunk
// candidate. solve_coord returns nonzero exactly when this exceeds lambda,
// so it is the coordinate's entry threshold.
double coord_gain(const CoordSubproblem& sub, const PenaltyConfig& penalty);

// Curvature bound used as q for coordinate i. Throws std::domain_error for a
// zero-norm column.
double majorization_constant(Loss loss, double col_sq_norm);

// Loss-minimizing constant for an intercept-only model.
double null_intercept(Loss loss, std::span<const double> y);

}  // namespace l0path
