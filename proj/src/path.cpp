#include "l0path/path.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include <spdlog/spdlog.h>

#include "l0path/kernels.hpp"
#include "l0path/swaps.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace l0path {

void PathOptions::validate() const {
  fit.validate();
  if (n_lambda < 1) throw std::invalid_argument("n_lambda must be >= 1");
  if (!(scale_down > 0.0 && scale_down < 1.0)) {
    throw std::invalid_argument("scale_down must lie in (0, 1)");
  }
  if (box && !(box->lo <= 0.0 && 0.0 <= box->hi)) {
    throw std::invalid_argument("box bounds must satisfy lo <= 0 <= hi");
  }
  for (const auto& grid : lambda_grids) {
    for (double l : grid) {
      if (!(l >= 0.0)) throw std::invalid_argument("lambda values must be >= 0");
    }
  }
}

std::vector<double> FitPath::gammas() const {
  std::vector<double> g;
  for (const auto& c : paths) g.push_back(c.gamma);
  return g;
}

std::size_t FitPath::total_sweeps() const {
  std::size_t s = 0;
  for (const auto& c : paths) {
    for (const auto& m : c.models) s += m.sweeps;
  }
  return s;
}

std::vector<double> default_gamma_grid(PenaltyKind kind, std::size_t count,
                                       double gamma_min, double gamma_max) {
  if (kind == PenaltyKind::L0) return {0.0};
  if (count == 0) throw std::invalid_argument("gamma grid needs >= 1 value");
  if (!(gamma_min > 0.0 && gamma_max >= gamma_min)) {
    throw std::invalid_argument("gamma range must satisfy 0 < min <= max");
  }
  if (count == 1) return {gamma_max};
  std::vector<double> g(count);
  const double lo = std::log(gamma_min);
  const double hi = std::log(gamma_max);
  for (std::size_t k = 0; k < count; ++k) {
    g[k] = std::exp(hi - (hi - lo) * static_cast<double>(k) /
                             static_cast<double>(count - 1));
  }
  g.front() = gamma_max;
  g.back() = gamma_min;
  return g;
}

double entry_threshold(const CoordSubproblem& sub, double gamma,
                       PenaltyKind kind, std::optional<Box> box) {
  PenaltyConfig pen{kind, 0.0, gamma, box};
  return coord_gain(sub, pen);
}

double entry_threshold(const DataMatrix& x, std::size_t i,
                       std::span<const double> residual, double gamma,
                       PenaltyKind kind) {
  const double sq = x.col_sq_norm(i);
  if (!(sq > 0.0)) {
    throw std::domain_error("zero-norm column " + std::to_string(i) +
                            " has no entry threshold");
  }
  const double c = x.column_dot(i, residual);
  return entry_threshold({sq, c / sq}, gamma, kind);
}

std::vector<double> gradient_dots(const DataMatrix& x,
                                  std::span<const double> y,
                                  const Model& model, Loss loss) {
  std::vector<double> eta(x.rows());
  kernels::linear_predictor(x, model.intercept, model.beta, eta);
  for (std::size_t r = 0; r < eta.size(); ++r) {
    eta[r] = sample_loss_derivative(loss, y[r], eta[r]);
  }
  std::vector<double> dots(x.cols());
  kernels::all_column_dots(x, eta, dots);
  return dots;
}

namespace {

// Largest entry threshold over zero-valued, nonzero-norm coordinates.
double max_threshold(const DataMatrix& x, std::span<const double> dots,
                     const Model& model, Loss loss, double gamma,
                     PenaltyKind kind, std::optional<Box> box) {
  std::vector<char> in_support(x.cols(), 0);
  for (std::size_t i : model.beta.indices) in_support[i] = 1;
  double best = 0.0;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (in_support[i] || !(x.col_sq_norm(i) > 0.0)) continue;
    const double q = majorization_constant(loss, x.col_sq_norm(i));
    best = std::max(best, entry_threshold({q, -dots[i] / q}, gamma, kind, box));
  }
  return best;
}

}  // namespace

double lambda_max(const DataMatrix& x, std::span<const double> y, Loss loss,
                  double gamma, PenaltyKind kind, bool fit_intercept,
                  std::optional<Box> box) {
  check_response(x, y, is_classification(loss));
  bool any = false;
  for (std::size_t i = 0; i < x.cols(); ++i) any = any || x.col_sq_norm(i) > 0.0;
  if (!any) throw DataError("all columns of the data matrix are zero");
  Model null = null_model(loss, y, fit_intercept);
  auto dots = gradient_dots(x, y, null, loss);
  return max_threshold(x, dots, null, loss, gamma, kind, box);
}

std::optional<double> next_lambda(const DataMatrix& x,
                                  std::span<const double> y,
                                  const Model& current, Loss loss,
                                  PenaltyKind kind, double scale_down,
                                  std::optional<Box> box,
                                  std::span<const double> dots) {
  std::vector<double> local;
  if (dots.empty()) {
    local = gradient_dots(x, y, current, loss);
    dots = local;
  }
  const double top =
      max_threshold(x, dots, current, loss, current.gamma, kind, box);
  if (!(top > 0.0)) return std::nullopt;
  return scale_down * std::min(top, current.lambda);
}

std::vector<std::size_t> screen_from_dots(const DataMatrix& x,
                                          std::span<const double> dots,
                                          std::size_t k,
                                          std::span<const std::size_t> support) {
  if (k < 1) throw std::invalid_argument("screening size must be >= 1");
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (x.col_sq_norm(i) > 0.0) valid.push_back(i);
  }
  std::vector<std::size_t> out;
  if (k >= valid.size()) {
    out = valid;
  } else {
    auto score = [&](std::size_t i) {
      return std::abs(dots[i]) / std::sqrt(x.col_sq_norm(i));
    };
    auto better = [&](std::size_t a, std::size_t b) {
      const double sa = score(a), sb = score(b);
      if (sa != sb) return sa > sb;
      return a < b;
    };
    std::nth_element(valid.begin(),
                     valid.begin() + static_cast<std::ptrdiff_t>(k),
                     valid.end(), better);
    out.assign(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(k));
  }
  out.insert(out.end(), support.begin(), support.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> screen(const DataMatrix& x,
                                std::span<const double> residual,
                                std::size_t k,
                                std::span<const std::size_t> support) {
  if (residual.size() != x.rows()) throw DataError("residual length mismatch");
  std::vector<double> dots(x.cols());
  kernels::all_column_dots(x, residual, dots);
  return screen_from_dots(x, dots, k, support);
}

namespace {

struct ChainContext {
  const DataMatrix& x;
  std::span<const double> y;
  Loss loss;
  PenaltyKind kind;
  const PathOptions& opts;
  std::size_t max_support;
};

Model fit_one(const ChainContext& ctx, const PenaltyConfig& pen,
              const Model& init, FitWorkspace& ws) {
  Model m = fit_fixed(ctx.x, ctx.y, ctx.loss, pen, init, ctx.opts.fit, &ws);
  if (ctx.opts.local_search && !m.beta.empty()) {
    SwapOptions so;
    so.fit = ctx.opts.fit;
    so.max_swaps = ctx.opts.max_swaps;
    Model improved = local_search(ctx.x, ctx.y, m, ctx.loss, pen, so);
    if (improved.objective < m.objective) {
      m = std::move(improved);
      ws.dots_valid = false;
    }
  }
  return m;
}

// Model of `previous` whose lambda is closest to `lambda`.
const Model* closest_lambda(const GammaPath* previous, double lambda) {
  if (!previous || previous->models.empty()) return nullptr;
  const Model* best = &previous->models.front();
  for (const auto& m : previous->models) {
    if (std::abs(m.lambda - lambda) < std::abs(best->lambda - lambda)) best = &m;
  }
  return best;
}

Model pick_init(const ChainContext& ctx, const PenaltyConfig& pen,
                const Model& chain_init, const GammaPath* previous) {
  const Model* other = closest_lambda(previous, pen.lambda);
  if (!other) return chain_init;
  const double a = objective_value(ctx.x, ctx.y, chain_init.intercept,
                                   chain_init.beta, ctx.loss, pen);
  const double b =
      objective_value(ctx.x, ctx.y, other->intercept, other->beta, ctx.loss, pen);
  return b < a ? *other : chain_init;
}

GammaPath run_chain(const ChainContext& ctx, double gamma,
                    std::span<const double> explicit_grid,
                    const GammaPath* previous) {
  const auto start = std::chrono::steady_clock::now();
  GammaPath out;
  out.gamma = gamma;
  const auto& opts = ctx.opts;

  Model null = null_model(ctx.loss, ctx.y, opts.fit.intercept);
  null.gamma = gamma;
  const std::vector<double> null_dots =
      gradient_dots(ctx.x, ctx.y, null, ctx.loss);

  Model cur = null;
  std::vector<double> cur_dots = null_dots;
  FitWorkspace ws;

  // Fits at `pen` from the chain's warm start, reusing the gradient dots
  // already known for that starting point.
  auto advance = [&](const PenaltyConfig& pen) {
    const Model& base = opts.warm_start ? cur : null;
    Model init = pick_init(ctx, pen, base, previous);
    if (init.same_support(base) && init.intercept == base.intercept) {
      ws.dots = opts.warm_start ? cur_dots : null_dots;
      ws.dots_valid = true;
    } else {
      ws.dots_valid = false;
    }
    Model m = fit_one(ctx, pen, init, ws);
    cur_dots = ws.dots_valid ? ws.dots
                             : gradient_dots(ctx.x, ctx.y, m, ctx.loss);
    return m;
  };

  if (!explicit_grid.empty()) {
    for (double lambda : explicit_grid) {
      Model m = advance(PenaltyConfig{ctx.kind, lambda, gamma, opts.box});
      out.models.push_back(m);
      cur = std::move(m);
    }
  } else {
    cur.lambda = max_threshold(ctx.x, null_dots, null, ctx.loss, gamma,
                               ctx.kind, opts.box);
    out.models.push_back(cur);
    std::size_t stalls = 0;
    while (out.models.size() < opts.n_lambda &&
           cur.support_size() < ctx.max_support) {
      auto lambda = next_lambda(ctx.x, ctx.y, cur, ctx.loss, ctx.kind,
                                opts.scale_down, opts.box, cur_dots);
      if (!lambda) break;
      Model m = advance(PenaltyConfig{ctx.kind, *lambda, gamma, opts.box});
      const bool duplicate = m.same_support(out.models.back());
      cur = std::move(m);
      if (duplicate) {
        // Same support as the last recorded model: keep lowering lambda
        // from the new fixed point without recording it.
        if (++stalls > 1000) {
          spdlog::warn("lambda path stalled at gamma={:.6g}", gamma);
          break;
        }
        continue;
      }
      stalls = 0;
      out.models.push_back(cur);
    }
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

}  // namespace

FitPath fit_path(const DataMatrix& x, std::span<const double> y, Loss loss,
                 PenaltyKind kind, std::span<const double> gamma_grid,
                 const PathOptions& opts) {
  opts.validate();
  check_response(x, y, is_classification(loss));
  if (gamma_grid.empty()) throw std::invalid_argument("gamma grid is empty");
  for (double g : gamma_grid) {
    if (kind == PenaltyKind::L0 ? g != 0.0 : !(g > 0.0 && std::isfinite(g))) {
      throw std::invalid_argument(
          kind == PenaltyKind::L0
              ? "gamma grid must be {0} for the pure L0 penalty"
              : "gamma values must be positive");
    }
  }
  if (!opts.lambda_grids.empty() && opts.lambda_grids.size() != 1 &&
      opts.lambda_grids.size() != gamma_grid.size()) {
    throw std::invalid_argument(
        "lambda_grids must hold one grid or one per gamma");
  }
  bool any = false;
  for (std::size_t i = 0; i < x.cols(); ++i) any = any || x.col_sq_norm(i) > 0.0;
  if (!any) throw DataError("all columns of the data matrix are zero");
  std::size_t zero_cols = 0;
  for (std::size_t i = 0; i < x.cols(); ++i) zero_cols += !(x.col_sq_norm(i) > 0.0);
  if (zero_cols > 0) {
    spdlog::warn("{} zero-norm column(s) excluded; their coefficients stay 0",
                 zero_cols);
  }

  FitPath out;
  out.loss = loss;
  out.kind = kind;
  out.n = x.rows();
  out.p = x.cols();
  out.options = opts;
  const std::size_t max_support =
      opts.fit.max_support.value_or(std::min(x.rows(), x.cols()));
  ChainContext ctx{x, y, loss, kind, opts, max_support};

  auto grid_for = [&](std::size_t g) -> std::span<const double> {
    if (opts.lambda_grids.empty()) return {};
    return opts.lambda_grids.size() == 1 ? opts.lambda_grids[0]
                                         : opts.lambda_grids[g];
  };

  const std::size_t chains = gamma_grid.size();
  out.paths.resize(chains);
  if (opts.cross_gamma_warm_start) {
    for (std::size_t g = 0; g < chains; ++g) {
      out.paths[g] = run_chain(ctx, gamma_grid[g], grid_for(g),
                               g > 0 ? &out.paths[g - 1] : nullptr);
    }
    return out;
  }

  std::vector<std::exception_ptr> errors(chains);
  const auto count = static_cast<std::ptrdiff_t>(chains);
#if defined(_OPENMP)
  const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#else
  const int threads = 1;
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (chains > 1 && threads > 1)
  for (std::ptrdiff_t gi = 0; gi < count; ++gi) {
    const auto g = static_cast<std::size_t>(gi);
    try {
      out.paths[g] = run_chain(ctx, gamma_grid[g], grid_for(g), nullptr);
    } catch (...) {
      errors[g] = std::current_exception();
    }
  }
  (void)threads;
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace l0path
