#include "l0path/modelselect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "l0path/kernels.hpp"

namespace l0path {

std::vector<std::size_t> make_folds(std::size_t n, std::size_t n_folds,
                                    std::uint64_t seed) {
  if (n_folds < 2 || n_folds > n) {
    throw std::invalid_argument("n_folds must lie in [2, n]");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t f = 0; f < n_folds; ++f) {
    const std::size_t lo = f * n / n_folds;
    const std::size_t hi = (f + 1) * n / n_folds;
    for (std::size_t k = lo; k < hi; ++k) fold_of[perm[k]] = f;
  }
  return fold_of;
}

double validation_loss(const Model& model, const DataMatrix& x,
                       std::span<const double> y, Loss loss) {
  std::vector<double> eta(x.rows());
  kernels::linear_predictor(x, model.intercept, model.beta, eta);
  const double total = loss_value(loss, y, eta);
  const double n = static_cast<double>(y.size());
  // loss_value uses (1/2)(y - eta)^2 for regression.
  return loss == Loss::SquaredError ? 2.0 * total / n : total / n;
}

namespace {

bool constant_labels(std::span<const double> y,
                     std::span<const std::size_t> rows) {
  for (std::size_t r : rows) {
    if (y[r] != y[rows.front()]) return false;
  }
  return true;
}

std::vector<double> gather(std::span<const double> y,
                           std::span<const std::size_t> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out[k] = y[rows[k]];
  return out;
}

}  // namespace

CVResult cross_validate(const DataMatrix& x, std::span<const double> y,
                        Loss loss, PenaltyKind kind,
                        std::span<const double> gamma_grid,
                        std::size_t n_folds, std::uint64_t seed,
                        const PathOptions& opts) {
  check_response(x, y, is_classification(loss));
  const std::size_t n = x.rows();
  if (n_folds < 2 || n_folds > n) {
    throw std::invalid_argument("n_folds must lie in [2, n]");
  }

  CVResult res;
  res.n_folds = n_folds;
  res.seed = seed;

  auto split = [&](std::uint64_t s) {
    auto fold_of = make_folds(n, n_folds, s);
    std::vector<std::vector<std::size_t>> train(n_folds), valid(n_folds);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t f = 0; f < n_folds; ++f) {
        (fold_of[r] == f ? valid[f] : train[f]).push_back(r);
      }
    }
    return std::tuple{fold_of, train, valid};
  };
  auto [fold_of, train_rows, valid_rows] = split(seed);
  if (is_classification(loss)) {
    auto degenerate = [&](const auto& train) {
      return std::any_of(train.begin(), train.end(), [&](const auto& rows) {
        return constant_labels(y, rows);
      });
    };
    if (degenerate(train_rows)) {
      spdlog::warn("a training fold has constant labels; reshuffling once");
      std::tie(fold_of, train_rows, valid_rows) =
          split(seed ^ 0x9e3779b97f4a7c15ULL);
      if (degenerate(train_rows)) {
        throw DataError("cross-validation folds have constant labels");
      }
    }
  }
  res.fold_of = fold_of;

  res.path = fit_path(x, y, loss, kind, gamma_grid, opts);
  PathOptions fold_opts = opts;
  fold_opts.lambda_grids.clear();
  for (const auto& chain : res.path.paths) {
    std::vector<double> grid;
    for (const auto& m : chain.models) grid.push_back(m.lambda);
    fold_opts.lambda_grids.push_back(std::move(grid));
  }

  const std::size_t chains = res.path.paths.size();
  // losses[fold][gamma][lambda]
  std::vector<std::vector<std::vector<double>>> losses(n_folds);
  std::vector<std::exception_ptr> errors(n_folds);
  const auto folds = static_cast<std::ptrdiff_t>(n_folds);
#pragma omp parallel for schedule(dynamic, 1) if (opts.threads != 1)
  for (std::ptrdiff_t fi = 0; fi < folds; ++fi) {
    const auto f = static_cast<std::size_t>(fi);
    try {
      DataMatrix tx = x.select_rows(train_rows[f]);
      DataMatrix vx = x.select_rows(valid_rows[f]);
      auto ty = gather(y, train_rows[f]);
      auto vy = gather(y, valid_rows[f]);
      FitPath fp = fit_path(tx, ty, loss, kind, gamma_grid, fold_opts);
      losses[f].resize(chains);
      for (std::size_t g = 0; g < chains; ++g) {
        for (const auto& m : fp.paths[g].models) {
          losses[f][g].push_back(validation_loss(m, vx, vy, loss));
        }
      }
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const double k = static_cast<double>(n_folds);
  double best = INFINITY;
  res.mean.resize(chains);
  res.se.resize(chains);
  for (std::size_t g = 0; g < chains; ++g) {
    const std::size_t m = res.path.paths[g].models.size();
    res.mean[g].assign(m, 0.0);
    res.se[g].assign(m, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
      double s = 0.0;
      for (std::size_t f = 0; f < n_folds; ++f) s += losses[f][g][l];
      const double mean = s / k;
      double ss = 0.0;
      for (std::size_t f = 0; f < n_folds; ++f) {
        ss += (losses[f][g][l] - mean) * (losses[f][g][l] - mean);
      }
      res.mean[g][l] = mean;
      res.se[g][l] = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
      // Strict comparison keeps the earliest (largest-lambda) minimizer.
      if (mean < best) {
        best = mean;
        res.best_gamma_index = g;
        res.best_lambda_index = l;
      }
    }
  }
  return res;
}

namespace {

double misclassification(const Model& model, const DataMatrix& x,
                         std::span<const double> y) {
  std::vector<double> eta(x.rows());
  kernels::linear_predictor(x, model.intercept, model.beta, eta);
  double wrong = 0.0;
  for (std::size_t r = 0; r < eta.size(); ++r) {
    const double label = eta[r] >= 0.0 ? 1.0 : -1.0;
    wrong += label != y[r] ? 1.0 : 0.0;
  }
  return wrong / static_cast<double>(eta.size());
}

}  // namespace

TuneResult tune_on_validation(const DataMatrix& train_x,
                              std::span<const double> train_y,
                              const DataMatrix& valid_x,
                              std::span<const double> valid_y, Loss loss,
                              PenaltyKind kind,
                              std::span<const double> gamma_grid,
                              const PathOptions& opts) {
  if (train_x.cols() != valid_x.cols()) {
    throw DataError("training and validation feature counts differ");
  }
  check_response(valid_x, valid_y, is_classification(loss));
  const auto start = std::chrono::steady_clock::now();
  TuneResult res;
  res.path = fit_path(train_x, train_y, loss, kind, gamma_grid, opts);

  double best = INFINITY;
  double path_seconds = 0.0;
  for (std::size_t g = 0; g < res.path.paths.size(); ++g) {
    const auto& chain = res.path.paths[g];
    path_seconds += chain.seconds;
    for (std::size_t l = 0; l < chain.models.size(); ++l) {
      const Model& m = chain.models[l];
      const double metric = is_classification(loss)
                                ? misclassification(m, valid_x, valid_y)
                                : validation_loss(m, valid_x, valid_y, loss);
      res.table.push_back(
          {chain.gamma, m.lambda, m.support_size(), m.objective, metric});
      if (metric < best) {
        best = metric;
        res.best_gamma_index = g;
        res.best_lambda_index = l;
      }
    }
  }
  res.best = res.path.paths[res.best_gamma_index].models[res.best_lambda_index];
  res.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  res.mean_path_seconds =
      path_seconds / static_cast<double>(res.path.paths.size());
  return res;
}

double prediction_error(const DataMatrix& x, const SparseVector& beta_hat,
                        const SparseVector& beta_star) {
  std::vector<double> fit = x.multiply(beta_hat);
  std::vector<double> truth = x.multiply(beta_star);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < fit.size(); ++r) {
    num += (fit[r] - truth[r]) * (fit[r] - truth[r]);
    den += truth[r] * truth[r];
  }
  if (!(den > 0.0)) {
    throw std::domain_error("prediction error undefined: X beta* = 0");
  }
  return std::sqrt(num) / std::sqrt(den);
}

SupportMetrics support_metrics(const SparseVector& beta_hat,
                               const SparseVector& beta_star) {
  SupportMetrics m;
  m.support_size = beta_hat.size();
  for (std::size_t i : beta_hat.indices) {
    const bool truth = std::binary_search(beta_star.indices.begin(),
                                          beta_star.indices.end(), i);
    (truth ? m.true_positives : m.false_positives) += 1;
  }
  return m;
}

Prediction predict(const Model& model, const DataMatrix& x_new, Loss loss) {
  for (std::size_t i : model.beta.indices) {
    if (i >= x_new.cols()) {
      throw DataError("model index " + std::to_string(i) +
                      " exceeds feature count " + std::to_string(x_new.cols()));
    }
  }
  Prediction out;
  out.eta.resize(x_new.rows());
  kernels::linear_predictor(x_new, model.intercept, model.beta, out.eta);
  if (is_classification(loss)) {
    out.probability.resize(out.eta.size());
    out.label.resize(out.eta.size());
    for (std::size_t r = 0; r < out.eta.size(); ++r) {
      out.probability[r] = 1.0 / (1.0 + std::exp(-out.eta[r]));
      out.label[r] = out.eta[r] >= 0.0 ? 1.0 : -1.0;
    }
  }
  return out;
}

}  // namespace l0path
