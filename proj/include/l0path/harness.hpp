#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "l0path/objective.hpp"

namespace l0path {

// Synthetic train/validation benchmark: each repetition draws a training and
// an equally sized validation set, tunes (gamma, lambda) on validation MSE
// and scores the winner against beta*.
struct BenchConfig {
  std::size_t n = 1000;
  std::size_t p = 1000;
  std::size_t k = 50;
  double rho = 0.3;
  double snr = 5.0;
  std::size_t reps = 10;
  std::size_t n_gamma = 100;
  std::size_t n_lambda = 100;
  double gamma_min = 1e-2;
  double gamma_max = 1e2;
  std::uint64_t seed = 1;
  int threads = 0;
  PenaltyKind kind = PenaltyKind::L0L2;
  bool local_search = false;
  std::size_t screening_size = 1000;
  // Paths stop once a model exceeds this many nonzeros.
  std::size_t max_support = 100;
  std::size_t memory_budget_bytes = std::size_t{4} << 30;

  void validate() const;
};

struct BenchRep {
  std::uint64_t train_seed = 0;
  double path_seconds = 0.0;
  double total_seconds = 0.0;
  double pe = 0.0;
  std::size_t fp = 0;
  std::size_t tp = 0;
  std::size_t ss = 0;
  double gamma = 0.0;
  double lambda = 0.0;
};

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
};

MeanSE mean_se(const std::vector<double>& values);

struct BenchResult {
  BenchConfig config;
  std::vector<BenchRep> reps;

  MeanSE path_seconds() const;
  MeanSE total_seconds() const;
  // Prediction error scaled by 100.
  MeanSE pe_x100() const;
  MeanSE fp() const;
  MeanSE tp() const;
  MeanSE ss() const;
};

// Bytes needed for the training and validation matrices.
std::size_t bench_memory_estimate(const BenchConfig& config);

BenchResult run_benchmark(
    const BenchConfig& config,
    const std::function<void(std::size_t, const BenchRep&)>& on_rep = {});

// Formatted cells shared by the console and CSV writers, so both carry the
// same digits. First row is the header.
using Table = std::vector<std::vector<std::string>>;
Table summary_table(const BenchResult& result);
Table repetition_table(const BenchResult& result);

std::string format_console(const Table& table);
std::string format_csv(const Table& table);

// Published single-path times (seconds, other hardware) for p = 1e3, 1e4,
// 1e5. Informational only.
std::optional<double> reference_path_seconds(std::size_t p);

}  // namespace l0path
