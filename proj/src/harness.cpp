#include "l0path/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "l0path/data.hpp"
#include "l0path/modelselect.hpp"
#include "l0path/path.hpp"

namespace l0path {

void BenchConfig::validate() const {
  SyntheticSpec{n, p, k, rho, snr, seed, false}.validate();
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (n_gamma < 1) throw std::invalid_argument("n_gamma must be at least 1");
  if (n_lambda < 1) throw std::invalid_argument("n_lambda must be at least 1");
  if (max_support < 1) throw std::invalid_argument("max_support must be at least 1");
  if (!(gamma_min > 0.0) || !(gamma_max >= gamma_min)) {
    throw std::invalid_argument("need 0 < gamma_min <= gamma_max");
  }
}

MeanSE mean_se(const std::vector<double>& values) {
  MeanSE out;
  if (values.empty()) return out;
  const double m = static_cast<double>(values.size());
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / m;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  }
  return out;
}

namespace {

template <class F>
MeanSE collect(const std::vector<BenchRep>& reps, F field) {
  std::vector<double> v;
  v.reserve(reps.size());
  for (const auto& r : reps) v.push_back(static_cast<double>(field(r)));
  return mean_se(v);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

MeanSE BenchResult::path_seconds() const {
  return collect(reps, [](const BenchRep& r) { return r.path_seconds; });
}
MeanSE BenchResult::total_seconds() const {
  return collect(reps, [](const BenchRep& r) { return r.total_seconds; });
}
MeanSE BenchResult::pe_x100() const {
  return collect(reps, [](const BenchRep& r) { return 100.0 * r.pe; });
}
MeanSE BenchResult::fp() const {
  return collect(reps, [](const BenchRep& r) { return r.fp; });
}
MeanSE BenchResult::tp() const {
  return collect(reps, [](const BenchRep& r) { return r.tp; });
}
MeanSE BenchResult::ss() const {
  return collect(reps, [](const BenchRep& r) { return r.ss; });
}

std::size_t bench_memory_estimate(const BenchConfig& config) {
  return 2 * config.n * config.p * sizeof(double);
}

BenchResult run_benchmark(
    const BenchConfig& config,
    const std::function<void(std::size_t, const BenchRep&)>& on_rep) {
  config.validate();
  const std::size_t need = bench_memory_estimate(config);
  if (need > config.memory_budget_bytes) {
    spdlog::warn("benchmark needs about {:.1f} GiB for data, budget is {:.1f} GiB",
                 static_cast<double>(need) / (1 << 30),
                 static_cast<double>(config.memory_budget_bytes) / (1 << 30));
  }

  PathOptions opts;
  opts.n_lambda = config.n_lambda;
  opts.local_search = config.local_search;
  opts.threads = config.threads;
  opts.fit.screening_size = config.screening_size;
  opts.fit.max_support = config.max_support;
  const auto gammas = default_gamma_grid(config.kind, config.n_gamma,
                                         config.gamma_min, config.gamma_max);

  BenchResult result;
  result.config = config;
  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    SyntheticSpec spec{config.n, config.p, config.k, config.rho, config.snr,
                       config.seed + 2 * rep, false};
    SyntheticData train = generate_synthetic(spec);
    spec.seed += 1;
    SyntheticData valid = generate_synthetic(spec);

    TuneResult tuned = tune_on_validation(train.x, train.y, valid.x, valid.y,
                                          Loss::SquaredError, config.kind,
                                          gammas, opts);
    BenchRep r;
    r.train_seed = config.seed + 2 * rep;
    r.path_seconds = tuned.mean_path_seconds;
    r.pe = prediction_error(train.x, tuned.best.beta, train.beta_star);
    const SupportMetrics sm = support_metrics(tuned.best.beta, train.beta_star);
    r.fp = sm.false_positives;
    r.tp = sm.true_positives;
    r.ss = sm.support_size;
    r.gamma = tuned.best.gamma;
    r.lambda = tuned.best.lambda;
    r.total_seconds = seconds_since(start);
    if (on_rep) on_rep(rep, r);
    result.reps.push_back(r);
  }
  return result;
}

namespace {

std::string num(double v) { return fmt::format("{:.4g}", v); }

}  // namespace

Table summary_table(const BenchResult& result) {
  Table t{{"p", "reps", "metric", "mean", "se"}};
  const std::string p = std::to_string(result.config.p);
  const std::string reps = std::to_string(result.reps.size());
  auto add = [&](const char* name, MeanSE v) {
    t.push_back({p, reps, name, num(v.mean), num(v.se)});
  };
  add("path_seconds", result.path_seconds());
  add("total_seconds", result.total_seconds());
  add("pe_x100", result.pe_x100());
  add("fp", result.fp());
  add("ss", result.ss());
  add("tp", result.tp());
  return t;
}

Table repetition_table(const BenchResult& result) {
  Table t{{"rep", "seed", "path_seconds", "total_seconds", "pe_x100", "fp",
           "ss", "tp", "gamma", "lambda"}};
  for (std::size_t i = 0; i < result.reps.size(); ++i) {
    const BenchRep& r = result.reps[i];
    t.push_back({std::to_string(i), std::to_string(r.train_seed),
                 num(r.path_seconds), num(r.total_seconds), num(100.0 * r.pe),
                 std::to_string(r.fp), std::to_string(r.ss),
                 std::to_string(r.tp), num(r.gamma), num(r.lambda)});
  }
  return t;
}

std::string format_console(const Table& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += fmt::format("{:>{}}", row[c], width[c]);
    }
    out += '\n';
  }
  return out;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

std::optional<double> reference_path_seconds(std::size_t p) {
  switch (p) {
    case 1000: return 0.09;
    case 10000: return 0.49;
    case 100000: return 4.4;
    default: return std::nullopt;
  }
}

}  // namespace l0path
