#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "l0path/data.hpp"
#include "l0path/model.hpp"
#include "l0path/path.hpp"

namespace l0path {

struct CVResult {
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;
  // Fold index of every sample.
  std::vector<std::size_t> fold_of;
  // Full-data path; its lambda grid is reused on every fold.
  FitPath path;
  // [gamma][lambda] mean validation loss across folds and its standard error.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> se;
  std::size_t best_gamma_index = 0;
  std::size_t best_lambda_index = 0;

  double best_gamma() const { return path.paths[best_gamma_index].gamma; }
  double best_lambda() const { return best_model().lambda; }
  const Model& best_model() const {
    return path.paths[best_gamma_index].models[best_lambda_index];
  }
};

// Fold id per sample: a seeded shuffle cut into n_folds contiguous blocks
// whose sizes differ by at most one.
std::vector<std::size_t> make_folds(std::size_t n, std::size_t n_folds,
                                    std::uint64_t seed);

// Mean validation loss of a model: mean squared error for regression, the
// mean per-sample training loss for classification.
double validation_loss(const Model& model, const DataMatrix& x,
                       std::span<const double> y, Loss loss);

CVResult cross_validate(const DataMatrix& x, std::span<const double> y,
                        Loss loss, PenaltyKind kind,
                        std::span<const double> gamma_grid,
                        std::size_t n_folds, std::uint64_t seed,
                        const PathOptions& opts);

struct ValidationRow {
  double gamma = 0.0;
  double lambda = 0.0;
  std::size_t support_size = 0;
  double train_objective = 0.0;
  // Validation MSE (regression) or misclassification rate.
  double metric = 0.0;
};

struct TuneResult {
  Model best;
  std::size_t best_gamma_index = 0;
  std::size_t best_lambda_index = 0;
  std::vector<ValidationRow> table;
  FitPath path;
  // Wall time of the whole tuning run and the mean per-gamma path time.
  double total_seconds = 0.0;
  double mean_path_seconds = 0.0;
};

TuneResult tune_on_validation(const DataMatrix& train_x,
                              std::span<const double> train_y,
                              const DataMatrix& valid_x,
                              std::span<const double> valid_y, Loss loss,
                              PenaltyKind kind,
                              std::span<const double> gamma_grid,
                              const PathOptions& opts);

// ||X b_hat - X b*|| / ||X b*||. Throws std::domain_error when X b* = 0.
double prediction_error(const DataMatrix& x, const SparseVector& beta_hat,
                        const SparseVector& beta_star);

struct SupportMetrics {
  std::size_t false_positives = 0;
  std::size_t true_positives = 0;
  std::size_t support_size = 0;
};

SupportMetrics support_metrics(const SparseVector& beta_hat,
                               const SparseVector& beta_star);

struct Prediction {
  std::vector<double> eta;
  // Classification only.
  std::vector<double> probability;
  std::vector<double> label;
};

Prediction predict(const Model& model, const DataMatrix& x_new, Loss loss);

}  // namespace l0path
