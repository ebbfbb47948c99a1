#include "cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/fmt/fmt.h>

#include "artifact.hpp"
#include "l0path/data.hpp"
#include "l0path/harness.hpp"
#include "l0path/modelselect.hpp"
#include "l0path/path.hpp"

namespace l0path::cli {

namespace fs = std::filesystem;

namespace {

struct DataArgs {
  std::string x;
  std::string y;
  std::optional<std::size_t> y_col;
  bool header = false;
};

struct FitArgs {
  DataArgs data;
  std::string loss = "squared";
  std::string penalty = "L0";
  double gamma_min = 1e-2;
  double gamma_max = 1e2;
  std::size_t n_gamma = 10;
  std::size_t n_lambda = 100;
  std::optional<std::size_t> max_support;
  bool no_local_search = false;
  std::size_t screen_size = 1000;
  double tol = 1e-6;
  double scale_down = 0.98;
  std::optional<double> box_lo;
  std::optional<double> box_hi;
  bool cross_gamma = false;
  std::string out;
  int threads = 0;
  bool record_timing = false;
  bool quiet = false;
  // Set when any gamma flag was given explicitly.
  CLI::Option* gamma_flags[3] = {nullptr, nullptr, nullptr};
};

bool has_extension(const std::string& file, const char* ext) {
  std::string e = fs::path(file).extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

DataMatrix load_features(const std::string& file, bool header) {
  if (has_extension(file, ".mtx")) return load_matrix_market(file);
  return load_csv(file, header, std::nullopt).x;
}

Dataset load_training(const DataArgs& a) {
  if (a.y.empty() == !a.y_col.has_value()) {
    throw std::invalid_argument("exactly one of --y or --y-col is required");
  }
  if (a.y_col) {
    if (has_extension(a.x, ".mtx")) {
      throw std::invalid_argument("--y-col needs a CSV --x file; use --y");
    }
    return load_csv(a.x, a.header, a.y_col);
  }
  Dataset d{load_features(a.x, a.header), load_response(a.y)};
  return d;
}

void add_data_flags(CLI::App* app, DataArgs& a) {
  app->add_option("--x", a.x, "Feature file (.csv or .mtx)")->required();
  app->add_option("--y", a.y, "Response file (one value per line)");
  app->add_option("--y-col", a.y_col, "Response column inside the --x CSV");
  app->add_flag("--header", a.header, "CSV files start with a header row");
}

void add_fit_flags(CLI::App* app, FitArgs& a) {
  add_data_flags(app, a.data);
  app->add_option("--loss", a.loss, "squared | logistic | squared-hinge")
      ->capture_default_str();
  app->add_option("--penalty", a.penalty, "L0 | L0L1 | L0L2")
      ->capture_default_str();
  a.gamma_flags[0] = app->add_option("--gamma-min", a.gamma_min)->capture_default_str();
  a.gamma_flags[1] = app->add_option("--gamma-max", a.gamma_max)->capture_default_str();
  a.gamma_flags[2] = app->add_option("--n-gamma", a.n_gamma)->capture_default_str();
  app->add_option("--n-lambda", a.n_lambda, "Solutions per gamma")
      ->capture_default_str();
  app->add_option("--max-support", a.max_support,
                  "Stop a path at this support size (default min(n, p))");
  app->add_flag("--no-local-search", a.no_local_search,
                "Coordinate descent only, no swap search");
  app->add_option("--screen-size", a.screen_size, "Screening candidates")
      ->capture_default_str();
  app->add_option("--tol", a.tol, "Relative objective tolerance")
      ->capture_default_str();
  app->add_option("--scale-down", a.scale_down, "Lambda grid factor in (0, 1)")
      ->capture_default_str();
  app->add_option("--box-lo", a.box_lo, "Lower coefficient bound (<= 0)");
  app->add_option("--box-hi", a.box_hi, "Upper coefficient bound (>= 0)");
  app->add_flag("--cross-gamma-warm-start", a.cross_gamma,
                "Warm start each gamma from the previous one");
  app->add_option("--out", a.out, "Model artifact (JSON)")->required();
  app->add_option("--threads", a.threads, "Worker threads (default: all)");
  app->add_flag("--record-timing", a.record_timing,
                "Store per-gamma wall time in the artifact");
  app->add_flag("--quiet", a.quiet, "Skip the per-lambda table");
}

struct FitSetup {
  Loss loss;
  PenaltyKind kind;
  std::vector<double> gammas;
  PathOptions opts;
};

FitSetup fit_setup(const FitArgs& a) {
  FitSetup s{parse_loss(a.loss), parse_penalty(a.penalty), {}, {}};
  if (s.kind == PenaltyKind::L0) {
    for (const CLI::Option* o : a.gamma_flags) {
      if (o->count() > 0) {
        throw std::invalid_argument(o->get_name() +
                                    ": gamma is not used by --penalty L0");
      }
    }
  } else if (!(a.gamma_min > 0.0) || a.gamma_max < a.gamma_min ||
             a.n_gamma < 1) {
    throw std::invalid_argument(
        "--gamma-min/--gamma-max/--n-gamma: need 0 < min <= max and n >= 1");
  }
  s.gammas = default_gamma_grid(s.kind, a.n_gamma, a.gamma_min, a.gamma_max);
  s.opts.n_lambda = a.n_lambda;
  s.opts.fit.max_support = a.max_support;
  s.opts.local_search = !a.no_local_search;
  s.opts.fit.screening_size = a.screen_size;
  s.opts.fit.tol = a.tol;
  s.opts.scale_down = a.scale_down;
  s.opts.cross_gamma_warm_start = a.cross_gamma;
  if (a.box_lo || a.box_hi) {
    s.opts.box = Box{a.box_lo.value_or(-INFINITY), a.box_hi.value_or(INFINITY)};
  }
  if (a.threads < 0) throw std::invalid_argument("--threads must be >= 0");
  s.opts.threads = a.threads > 0 ? a.threads : omp_get_max_threads();
  s.opts.validate();
  return s;
}

Table path_table(const FitPath& fp) {
  Table t{{"gamma", "lambda", "support", "objective"}};
  for (const GammaPath& g : fp.paths) {
    for (const Model& m : g.models) {
      t.push_back({fmt::format("{:.6g}", g.gamma), fmt::format("{:.6g}", m.lambda),
                   std::to_string(m.support_size()),
                   fmt::format("{:.10g}", m.objective)});
    }
  }
  return t;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << text;
  if (!out) throw DataError("failed writing " + file.string());
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const FitSetup s = fit_setup(a);
  Dataset d = load_training(a.data);
  PathArtifact art;
  art.path = fit_path(d.x, d.y, s.loss, s.kind, s.gammas, s.opts);
  art.local_search = s.opts.local_search;
  art.record_timing = a.record_timing;
  write_artifact(a.out, art);
  if (!a.quiet) out << format_console(path_table(art.path));
  out << fmt::format("wrote {} models to {}\n",
                     [&] {
                       std::size_t m = 0;
                       for (const auto& g : art.path.paths) m += g.models.size();
                       return m;
                     }(),
                     a.out);
  return kOk;
}

int cmd_cvfit(const FitArgs& a, std::size_t folds, std::uint64_t seed,
              const std::string& cv_out, std::ostream& out) {
  const FitSetup s = fit_setup(a);
  if (folds < 2) throw std::invalid_argument("--folds must be at least 2");
  Dataset d = load_training(a.data);
  if (folds > d.x.rows()) {
    throw std::invalid_argument("--folds exceeds the number of samples");
  }
  CVResult cv = cross_validate(d.x, d.y, s.loss, s.kind, s.gammas, folds,
                               seed, s.opts);
  PathArtifact art;
  art.path = cv.path;
  art.local_search = s.opts.local_search;
  art.record_timing = a.record_timing;
  art.cv = CVSummary{folds, seed, cv.best_gamma_index, cv.best_lambda_index};
  write_artifact(a.out, art);

  fs::path table = cv_out.empty() ? fs::path(a.out).replace_extension(".cv.csv")
                                  : fs::path(cv_out);
  const std::string csv = cv_table_csv(cv);
  write_text(table, csv);
  if (!a.quiet) out << csv;
  const Model& best = cv.best_model();
  out << fmt::format(
      "selected gamma={} lambda={} support={} cv_loss={} (se {})\n",
      cv.best_gamma(), best.lambda, best.support_size(),
      cv.mean[cv.best_gamma_index][cv.best_lambda_index],
      cv.se[cv.best_gamma_index][cv.best_lambda_index]);
  out << fmt::format("wrote {} and {}\n", a.out, table.string());
  return kOk;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt::format("{}", x);
  return s;
}

bool matches(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

const Model& select_model(const PathArtifact& art, const std::string& sel) {
  const FitPath& fp = art.path;
  if (sel == "best") {
    if (!art.cv) {
      throw std::invalid_argument(
          "--select best needs a cross-validated model (cvfit)");
    }
    return fp.paths[art.cv->best_gamma_index]
        .models[art.cv->best_lambda_index];
  }
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::stringstream ss(sel);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--select: expected key=value, got '" + part + "'");
    }
    const std::string key = part.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(part.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("--select: bad number in '" + part + "'");
    }
    if (key == "gamma") {
      gamma = value;
    } else if (key == "lambda") {
      lambda = value;
    } else {
      throw std::invalid_argument("--select: unknown key '" + key + "'");
    }
  }
  if (!lambda) throw std::invalid_argument("--select: lambda=<value> is required");

  const GammaPath* chain = nullptr;
  if (!gamma) {
    if (fp.paths.size() != 1) {
      throw std::invalid_argument("--select: gamma=<value> is required; available: " +
                                  join(fp.gammas()));
    }
    chain = &fp.paths.front();
  } else {
    for (const GammaPath& g : fp.paths) {
      if (matches(g.gamma, *gamma)) chain = &g;
    }
    if (!chain) {
      throw std::invalid_argument("--select: gamma not in model; available: " +
                                  join(fp.gammas()));
    }
  }
  std::vector<double> lambdas;
  for (const Model& m : chain->models) {
    if (matches(m.lambda, *lambda)) return m;
    lambdas.push_back(m.lambda);
  }
  throw std::invalid_argument("--select: lambda not in model; available: " +
                              join(lambdas));
}

int cmd_predict(const std::string& model_file, const std::string& sel,
                const std::string& x_file, bool header, const std::string& out_file,
                std::ostream& out) {
  const PathArtifact art = read_artifact(model_file);
  const Model& model = select_model(art, sel);
  DataMatrix x = load_features(x_file, header);
  if (x.cols() != art.path.p) {
    throw DataError(fmt::format("{} has {} columns, model expects {}", x_file,
                                x.cols(), art.path.p));
  }
  const Prediction pred = predict(model, x, art.path.loss);
  const bool cls = is_classification(art.path.loss);
  std::string text = cls ? "eta,probability,label\n" : "eta\n";
  for (std::size_t r = 0; r < pred.eta.size(); ++r) {
    text += cls ? fmt::format("{},{},{}\n", pred.eta[r], pred.probability[r],
                              pred.label[r])
                : fmt::format("{}\n", pred.eta[r]);
  }
  if (out_file.empty() || out_file == "-") {
    out << text;
  } else {
    write_text(out_file, text);
  }
  return kOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& prefix, bool sparse,
              std::ostream& out) {
  spec.validate();
  const SyntheticData d = generate_synthetic(spec);
  const std::string x_file = prefix + (sparse ? "_x.mtx" : "_x.csv");
  if (sparse) {
    write_matrix_market(x_file, d.x.to_sparse());
  } else {
    write_csv(x_file, d.x);
  }
  std::string y_text = "y\n";
  for (double v : d.y) y_text += fmt::format("{}\n", v);
  write_text(prefix + "_y.csv", y_text);
  std::string b_text = "index,value\n";
  for (std::size_t t = 0; t < d.beta_star.size(); ++t) {
    b_text += fmt::format("{},{}\n", d.beta_star.indices[t], d.beta_star.values[t]);
  }
  write_text(prefix + "_beta.csv", b_text);

  nlohmann::json manifest{{"n", spec.n},
                          {"p", spec.p},
                          {"k", spec.k},
                          {"rho", spec.rho},
                          {"snr", spec.snr},
                          {"seed", spec.seed},
                          {"classification", spec.classification},
                          {"sigma", d.sigma},
                          {"x", fs::path(x_file).filename().string()},
                          {"y", fs::path(prefix + "_y.csv").filename().string()},
                          {"beta", fs::path(prefix + "_beta.csv").filename().string()}};
  write_text(prefix + "_manifest.json", manifest.dump(1) + "\n");
  out << fmt::format("wrote {}, {}_y.csv, {}_beta.csv, {}_manifest.json (sigma {})\n",
                     x_file, prefix, prefix, prefix, d.sigma);
  return kOk;
}

int cmd_bench(BenchConfig cfg, const std::string& p_text, double budget_gb,
              const std::string& prefix, std::ostream& out) {
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(p_text, &used);
    if (used != p_text.size()) throw std::invalid_argument("trailing text");
  } catch (const std::exception&) {
    throw std::invalid_argument("--p: not a number: " + p_text);
  }
  if (!(p >= 1.0) || p != std::floor(p)) {
    throw std::invalid_argument("--p must be a positive integer");
  }
  cfg.p = static_cast<std::size_t>(p);
  if (!(budget_gb > 0.0)) throw std::invalid_argument("--memory-budget-gb must be positive");
  cfg.memory_budget_bytes = static_cast<std::size_t>(budget_gb * double(1ULL << 30));
  if (cfg.threads < 0) throw std::invalid_argument("--threads must be >= 0");
  if (cfg.threads == 0) cfg.threads = omp_get_max_threads();
  cfg.validate();

  const BenchResult res = run_benchmark(cfg, [&](std::size_t rep, const BenchRep& r) {
    out << fmt::format("rep {}: path {:.3g}s total {:.3g}s PE {:.4g} FP {} SS {}\n",
                       rep, r.path_seconds, r.total_seconds, r.pe, r.fp, r.ss);
    out.flush();
  });
  const Table summary = summary_table(res);
  out << format_console(summary);
  if (auto ref = reference_path_seconds(cfg.p)) {
    out << fmt::format(
        "published path time for this p (different hardware, informational): {}s\n",
        *ref);
  }
  if (!prefix.empty()) {
    write_text(prefix + "_summary.csv", format_csv(summary));
    write_text(prefix + "_reps.csv", format_csv(repetition_table(res)));
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Sparse regression and classification with L0 penalties"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit regularization paths");
  add_fit_flags(fit_cmd, fit);

  FitArgs cvfit;
  std::size_t folds = 5;
  std::uint64_t cv_seed = 1;
  std::string cv_out;
  CLI::App* cv_cmd = app.add_subcommand("cvfit", "Fit paths and cross-validate");
  add_fit_flags(cv_cmd, cvfit);
  cv_cmd->add_option("--folds", folds, "Number of folds")->capture_default_str();
  cv_cmd->add_option("--cv-seed", cv_seed, "Fold shuffle seed")->capture_default_str();
  cv_cmd->add_option("--cv-out", cv_out, "CV table CSV (default <out>.cv.csv)");

  std::string model_file, select = "best", pred_x, pred_out;
  bool pred_header = false;
  CLI::App* pred_cmd = app.add_subcommand("predict", "Predict from a stored model");
  pred_cmd->add_option("--model", model_file, "Model artifact")->required();
  pred_cmd->add_option("--select", select, "best | gamma=G,lambda=L | lambda=L")
      ->capture_default_str();
  pred_cmd->add_option("--x", pred_x, "Feature file (.csv or .mtx)")->required();
  pred_cmd->add_flag("--header", pred_header, "CSV file starts with a header row");
  pred_cmd->add_option("--out", pred_out, "Output CSV (default: stdout)");

  SyntheticSpec spec;
  std::string synth_prefix;
  bool synth_sparse = false;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--n", spec.n)->capture_default_str();
  synth_cmd->add_option("--p", spec.p)->capture_default_str();
  synth_cmd->add_option("--k", spec.k)->capture_default_str();
  synth_cmd->add_option("--rho", spec.rho)->capture_default_str();
  synth_cmd->add_option("--snr", spec.snr)->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed)->capture_default_str();
  synth_cmd->add_flag("--classification", spec.classification,
                      "Draw +-1 labels from a logistic model");
  synth_cmd->add_flag("--sparse", synth_sparse, "Write X as MatrixMarket");
  synth_cmd->add_option("--out-prefix", synth_prefix, "Output file prefix")->required();

  BenchConfig bench;
  std::string bench_p = "1000";
  double budget_gb = 4.0;
  std::string bench_prefix;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Synthetic tuning benchmark");
  bench_cmd->add_option("--p", bench_p, "Feature count (e.g. 1e3, 1e4, 1e5)")
      ->capture_default_str();
  bench_cmd->add_option("--n", bench.n)->capture_default_str();
  bench_cmd->add_option("--k", bench.k)->capture_default_str();
  bench_cmd->add_option("--rho", bench.rho)->capture_default_str();
  bench_cmd->add_option("--snr", bench.snr)->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps)->capture_default_str();
  bench_cmd->add_option("--n-gamma", bench.n_gamma)->capture_default_str();
  bench_cmd->add_option("--n-lambda", bench.n_lambda)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--max-support", bench.max_support)->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (default: all)");
  bench_cmd->add_flag("--local-search", bench.local_search, "Add swap search");
  bench_cmd->add_option("--memory-budget-gb", budget_gb)->capture_default_str();
  bench_cmd->add_option("--out-prefix", bench_prefix,
                        "Write <prefix>_summary.csv and <prefix>_reps.csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*cv_cmd) return cmd_cvfit(cvfit, folds, cv_seed, cv_out, out);
    if (*pred_cmd) {
      return cmd_predict(model_file, select, pred_x, pred_header, pred_out, out);
    }
    if (*synth_cmd) return cmd_synth(spec, synth_prefix, synth_sparse, out);
    if (*bench_cmd) return cmd_bench(bench, bench_p, budget_gb, bench_prefix, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace l0path::cli
