#include "l0path/cdsolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "l0path/kernels.hpp"
#include "l0path/path.hpp"

namespace l0path {

void FitOptions::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(coef_tol > 0.0)) throw std::invalid_argument("coef_tol must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (screening_size < 1) {
    throw std::invalid_argument("screening_size must be >= 1");
  }
}

CDState::CDState(const DataMatrix& x, std::span<const double> y, Loss loss,
                 PenaltyConfig penalty, const Model& init, bool fit_intercept)
    : x_(&x),
      y_(y),
      loss_(loss),
      penalty_(std::move(penalty)),
      fit_intercept_(fit_intercept),
      beta_(x.cols(), 0.0),
      beta0_(fit_intercept ? init.intercept : 0.0),
      eta_(x.rows(), 0.0),
      w_(x.rows(), 0.0),
      q_(x.cols(), 0.0) {
  if (y.size() != x.rows()) throw DataError("response length mismatch");
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (x.col_sq_norm(i) > 0.0) {
      q_[i] = majorization_constant(loss, x.col_sq_norm(i));
    }
  }
  for (std::size_t k = 0; k < init.beta.size(); ++k) {
    std::size_t i = init.beta.indices[k];
    if (i >= x.cols()) throw DataError("initial model index out of range");
    if (!excluded(i)) beta_[i] = init.beta.values[k];
  }
  kernels::linear_predictor(x, beta0_, SparseVector::from_dense(beta_), eta_);
  for (std::size_t r = 0; r < eta_.size(); ++r) {
    w_[r] = sample_loss_derivative(loss_, y_[r], eta_[r]);
  }
}

std::vector<double> CDState::residual() const {
  std::vector<double> r(eta_.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y_[i] - eta_[i];
  return r;
}

double CDState::objective() const {
  double f = loss_value(loss_, y_, eta_) + penalty_value(penalty_, beta_);
  if (!std::isfinite(f)) throw NumericalError("non-finite objective");
  return f;
}

void CDState::set_coefficient(std::size_t i, double value) {
  const double delta = value - beta_[i];
  if (delta == 0.0) return;
  if (loss_ == Loss::SquaredError) {
    // w = eta - y moves with eta.
    x_->for_each_in_column(i, [&](std::size_t r, double xv) {
      eta_[r] += delta * xv;
      w_[r] += delta * xv;
    });
    beta_[i] = value;
    return;
  }
  x_->for_each_in_column(i, [&](std::size_t r, double xv) {
    eta_[r] += delta * xv;
    w_[r] = sample_loss_derivative(loss_, y_[r], eta_[r]);
  });
  beta_[i] = value;
}

SweepResult CDState::sweep(std::span<const std::size_t> coords) {
  SweepResult res;
  const double before = history_.empty() ? objective() : history_.back();
  for (std::size_t i : coords) {
    if (excluded(i)) continue;
    const double old = beta_[i];
    const double v = solve_coord(subproblem(i), penalty_);
    if (v != old) {
      set_coefficient(i, v);
      res.improved = true;
      res.max_change = std::max(
          res.max_change, std::abs(v - old) / std::max(1.0, std::abs(v)));
    }
  }
  if (fit_intercept_) {
    const double old = beta0_;
    update_intercept();
    if (beta0_ != old) {
      res.improved = true;
      res.max_change = std::max(res.max_change, std::abs(beta0_ - old) /
                                                    std::max(1.0, std::abs(beta0_)));
    }
  }
  ++sweeps_;
  const double after = objective();
  history_.push_back(after);
  res.objective_delta = after - before;
  return res;
}

void CDState::shift_intercept(double delta) {
  beta0_ += delta;
  for (std::size_t r = 0; r < eta_.size(); ++r) {
    eta_[r] += delta;
    w_[r] = sample_loss_derivative(loss_, y_[r], eta_[r]);
  }
}

double CDState::update_intercept() {
  if (!fit_intercept_) return beta0_;
  const double n = static_cast<double>(eta_.size());
  if (loss_ == Loss::SquaredError) {
    // mean(y - eta) = -mean(w)
    double s = 0.0;
    for (double v : w_) s += v;
    const double shift = -s / n;
    if (shift != 0.0) shift_intercept(shift);
    return beta0_;
  }
  double grad = 0.0;
  double hess = 0.0;
  for (std::size_t r = 0; r < eta_.size(); ++r) {
    grad += w_[r];
    hess += sample_loss_curvature(loss_, y_[r], eta_[r]);
  }
  if (grad == 0.0) return beta0_;
  if (!(hess > 0.0)) hess = majorization_constant(loss_, n);
  const double base = loss_value(loss_, y_, eta_);
  std::vector<double> trial(eta_.size());
  double step = -grad / hess;
  for (int halvings = 0; halvings < 40; ++halvings, step *= 0.5) {
    for (std::size_t r = 0; r < trial.size(); ++r) trial[r] = eta_[r] + step;
    if (loss_value(loss_, y_, trial) <= base) {
      shift_intercept(step);
      return beta0_;
    }
  }
  return beta0_;
}

bool CDState::polish() {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    if (beta_[i] == 0.0 || excluded(i)) continue;
    if (penalty_.box && (beta_[i] <= penalty_.box->lo || beta_[i] >= penalty_.box->hi)) {
      continue;
    }
    free.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(eta_.size());
  const Eigen::Index off = fit_intercept_ ? 1 : 0;
  const Eigen::Index m = static_cast<Eigen::Index>(free.size()) + off;
  if (m == 0) return false;

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, m);
  if (fit_intercept_) z.col(0).setOnes();
  for (std::size_t k = 0; k < free.size(); ++k) {
    const Eigen::Index col = static_cast<Eigen::Index>(k) + off;
    x_->for_each_in_column(free[k], [&](std::size_t r, double v) {
      z(static_cast<Eigen::Index>(r), col) = v;
    });
  }
  const bool l2 = penalty_.kind == PenaltyKind::L0L2;
  const bool l1 = penalty_.kind == PenaltyKind::L0L1;

  bool moved = false;
  double f = objective();
  std::vector<double> trial_eta(eta_.size());
  std::vector<double> trial_beta = beta_;
  Eigen::VectorXd c(n);
  Eigen::VectorXd delta(m);
  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(w_.data(), n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto rr = static_cast<std::size_t>(r);
      c[r] = sample_loss_curvature(loss_, y_[rr], eta_[rr]);
    }
    Eigen::VectorXd g = z.transpose() * w;
    // Lower triangle of Z^T diag(c) Z.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    if (loss_ == Loss::SquaredError) {
      h.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
    } else {
      const Eigen::MatrixXd zc = c.cwiseSqrt().asDiagonal() * z;
      h.selfadjointView<Eigen::Lower>().rankUpdate(zc.transpose());
    }
    for (std::size_t k = 0; k < free.size(); ++k) {
      const Eigen::Index j = static_cast<Eigen::Index>(k) + off;
      const double b = beta_[free[k]];
      if (l2) {
        g[j] += 2.0 * penalty_.gamma * b;
        h(j, j) += 2.0 * penalty_.gamma;
      } else if (l1) {
        g[j] += penalty_.gamma * (b > 0.0 ? 1.0 : -1.0);
      }
    }
    const Eigen::VectorXd scale = 1.0 + h.diagonal().array().abs();

    // Marquardt damping: raise mu until the projected step is accepted. L1
    // coordinates that would cross zero stop at zero and box coordinates
    // stop at the bound.
    bool accepted = false;
    bool projected = false;
    bool exact = false;
    for (double mu = 1e-12; mu <= 1e8 && !accepted; mu *= 10.0) {
      Eigen::MatrixXd hm = h;
      hm.diagonal() += mu * scale;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hm);
      if (ldlt.info() != Eigen::Success) continue;
      const Eigen::VectorXd d = -ldlt.solve(g);
      if (!d.allFinite()) continue;
      projected = false;
      if (fit_intercept_) delta[0] = d[0];
      for (std::size_t k = 0; k < free.size(); ++k) {
        const Eigen::Index j = static_cast<Eigen::Index>(k) + off;
        const double b = beta_[free[k]];
        double v = b + d[j];
        if (l1 && (v > 0.0) != (b > 0.0)) v = 0.0;
        if (penalty_.box) v = std::clamp(v, penalty_.box->lo, penalty_.box->hi);
        projected = projected || v == 0.0 ||
                    (penalty_.box && (v == penalty_.box->lo || v == penalty_.box->hi));
        trial_beta[free[k]] = v;
        delta[j] = v - b;
      }
      const double slope = g.dot(delta);
      if (!(slope < 0.0)) continue;
      if (mu == 1e-12 && -slope <= 1e-24 * std::max(1.0, std::abs(f))) {
        trial_beta = beta_;
        return moved;
      }
      const Eigen::VectorXd deta = z * delta;
      for (Eigen::Index r = 0; r < n; ++r) {
        trial_eta[static_cast<std::size_t>(r)] = eta_[static_cast<std::size_t>(r)] + deta[r];
      }
      const double ft = loss_value(loss_, y_, trial_eta) + penalty_value(penalty_, trial_beta);
      if (std::isfinite(ft) && (ft <= f + 1e-4 * slope || (mu == 1e-12 && ft <= f))) {
        if (fit_intercept_) beta0_ += delta[0];
        beta_ = trial_beta;
        eta_ = trial_eta;
        for (std::size_t r = 0; r < eta_.size(); ++r) {
          w_[r] = sample_loss_derivative(loss_, y_[r], eta_[r]);
        }
        f = objective();
        moved = true;
        accepted = true;
        exact = mu == 1e-12;
      }
      trial_beta = beta_;
    }
    if (!accepted || projected) break;
    if (loss_ == Loss::SquaredError && exact) break;
  }
  return moved;
}

std::vector<std::size_t> CDState::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    if (beta_[i] != 0.0) s.push_back(i);
  }
  return s;
}

Model CDState::to_model() const {
  Model m;
  m.intercept = beta0_;
  m.beta = SparseVector::from_dense(beta_);
  m.lambda = penalty_.lambda;
  m.gamma = penalty_.gamma;
  m.objective = objective();
  m.sweeps = sweeps_;
  return m;
}

double CDState::consistency_error() const {
  std::vector<double> fresh(eta_.size());
  kernels::serial::linear_predictor(*x_, beta0_, SparseVector::from_dense(beta_),
                                    fresh);
  double worst = 0.0;
  for (std::size_t r = 0; r < fresh.size(); ++r) {
    worst = std::max(worst, std::abs(fresh[r] - eta_[r]) /
                                std::max(1.0, std::abs(fresh[r])));
  }
  return worst;
}

namespace {

std::vector<std::size_t> order_by_score(std::span<const std::size_t> coords,
                                        std::span<const double> score) {
  std::vector<std::size_t> pos(coords.size());
  std::iota(pos.begin(), pos.end(), 0);
  std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return coords[a] < coords[b];
  });
  std::vector<std::size_t> out(coords.size());
  for (std::size_t k = 0; k < pos.size(); ++k) out[k] = coords[pos[k]];
  return out;
}

}  // namespace

std::vector<std::size_t> greedy_order(const DataMatrix& x,
                                      std::span<const std::size_t> coords,
                                      std::span<const double> dots) {
  std::vector<double> score(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double sq = x.col_sq_norm(coords[k]);
    score[k] = sq > 0.0 ? std::abs(dots[coords[k]]) / std::sqrt(sq) : -1.0;
  }
  return order_by_score(coords, score);
}

std::vector<std::size_t> greedy_order(const DataMatrix& x,
                                      std::span<const double> residual) {
  if (residual.size() != x.rows()) throw DataError("residual length mismatch");
  std::vector<double> dots(x.cols());
  kernels::all_column_dots(x, residual, dots);
  std::vector<std::size_t> all(x.cols());
  std::iota(all.begin(), all.end(), 0);
  return greedy_order(x, all, dots);
}

namespace {

bool sweep_converged(const SweepResult& r, double objective,
                     const FitOptions& opts) {
  return std::abs(r.objective_delta) / std::max(1.0, std::abs(objective)) <
             opts.tol &&
         r.max_change <= opts.coef_tol;
}

std::vector<std::size_t> restrict_to_support(std::span<const std::size_t> order,
                                             std::span<const double> beta) {
  std::vector<std::size_t> out;
  for (std::size_t i : order) {
    if (beta[i] != 0.0) out.push_back(i);
  }
  return out;
}

// Runs the active-set schedule over `order`. Returns false if the sweep
// budget ran out.
bool run_active_set(CDState& st, std::span<const std::size_t> order,
                    const FitOptions& opts) {
  auto budget_left = [&] { return st.sweep_count() < opts.max_sweeps; };
  if (!opts.active_set) {
    while (budget_left()) {
      auto r = st.sweep(order);
      if (sweep_converged(r, st.objective_history().back(), opts)) return true;
    }
    return false;
  }
  for (int k = 0; k < 2 && budget_left(); ++k) st.sweep(order);
  while (budget_left()) {
    auto active = restrict_to_support(order, st.beta());
    // Newton polish when coordinate descent is slow: classification losses
    // periodically, squared error when the sweeps still needed at the current
    // contraction rate cost more than one polish (about |support| sweeps).
    const bool smooth = st.loss() == Loss::SquaredError;
    double last_drop = 0.0;
    for (std::size_t inner = 1; budget_left(); ++inner) {
      auto r = st.sweep(active);
      const double f = st.objective_history().back();
      if (sweep_converged(r, f, opts)) break;
      const double drop = -r.objective_delta;
      bool slow = inner % 25 == 0;
      if (smooth && inner >= 3 && drop > 0.0 && drop < last_drop) {
        const double target = opts.tol * std::max(1.0, std::abs(f));
        const double rate = drop / last_drop;
        const double remaining = std::log(target / drop) / std::log(rate);
        slow = slow || remaining > static_cast<double>(active.size());
      }
      if (!smooth) slow = inner % 10 == 1;
      last_drop = drop;
      if (slow && st.polish()) last_drop = 0.0;
    }
    if (!budget_left()) return false;
    auto before = st.support();
    auto r = st.sweep(order);
    if (st.support() == before &&
        sweep_converged(r, st.objective_history().back(), opts)) {
      return true;
    }
  }
  return false;
}

}  // namespace

Model fit_fixed(const DataMatrix& x, std::span<const double> y, Loss loss,
                const PenaltyConfig& penalty, const Model& init,
                const FitOptions& opts, FitWorkspace* workspace) {
  penalty.validate();
  opts.validate();
  check_response(x, y, is_classification(loss));

  const std::size_t p = x.cols();
  CDState st(x, y, loss, penalty, init, opts.intercept);
  st.record_objective();

  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < p; ++i) {
    if (!st.excluded(i)) valid.push_back(i);
  }

  std::vector<double> local_dots;
  std::vector<double>& dots = workspace ? workspace->dots : local_dots;
  const bool need_dots = opts.greedy_order || opts.screening_size < valid.size();
  if (need_dots && !(workspace && workspace->dots_valid && dots.size() == p)) {
    dots.resize(p);
    kernels::all_column_dots(x, st.gradient(), dots);
  }
  if (workspace) workspace->dots_valid = false;

  const bool screening = opts.screening_size < valid.size();
  std::vector<std::size_t> candidates =
      screening ? screen_from_dots(x, dots, opts.screening_size, st.support())
                : valid;
  std::vector<std::size_t> order =
      opts.greedy_order ? greedy_order(x, candidates, dots) : candidates;

  bool converged = false;
  while (true) {
    converged = run_active_set(st, order, opts);
    if (!screening || !converged) break;

    // Screening must not change the fixed point: add every coordinate
    // outside the candidate set that the exact update would move.
    dots.resize(p);
    kernels::all_column_dots(x, st.gradient(), dots);
    std::vector<char> in_set(p, 0);
    for (std::size_t i : order) in_set[i] = 1;
    std::vector<std::size_t> added;
    for (std::size_t i : valid) {
      if (in_set[i]) continue;
      if (solve_coord(st.subproblem(i, dots[i]), penalty) != 0.0) {
        added.push_back(i);
      }
    }
    if (added.empty()) {
      if (workspace) workspace->dots_valid = true;
      break;
    }
    auto extra = greedy_order(x, added, dots);
    order.insert(order.end(), extra.begin(), extra.end());
  }

  if (workspace && !workspace->dots_valid) {
    dots.resize(p);
    kernels::all_column_dots(x, st.gradient(), dots);
    workspace->dots_valid = true;
  }
  Model m = st.to_model();
  if (!converged) {
    m.termination = Termination::MaxSweeps;
    spdlog::warn("coordinate descent hit max_sweeps={} at lambda={:.6g} "
                 "gamma={:.6g} without converging",
                 opts.max_sweeps, penalty.lambda, penalty.gamma);
  }
  if (workspace) workspace->objective_history = st.objective_history();
  return m;
}

std::vector<std::size_t> check_stationarity(const DataMatrix& x,
                                            std::span<const double> y,
                                            const Model& model, Loss loss,
                                            const PenaltyConfig& penalty,
                                            double tol) {
  std::vector<double> eta(x.rows());
  kernels::serial::linear_predictor(x, model.intercept, model.beta, eta);
  std::vector<double> w(x.rows());
  for (std::size_t r = 0; r < w.size(); ++r) {
    w[r] = sample_loss_derivative(loss, y[r], eta[r]);
  }
  std::vector<double> beta = model.beta.to_dense(x.cols());
  std::vector<double> dots(x.cols());
  kernels::all_column_dots(x, w, dots);
  std::vector<std::size_t> violations;
  for (std::size_t i = 0; i < x.cols(); ++i) {
    if (!(x.col_sq_norm(i) > 0.0)) {
      if (beta[i] != 0.0) violations.push_back(i);
      continue;
    }
    const double q = majorization_constant(loss, x.col_sq_norm(i));
    const double v = solve_coord({q, beta[i] - dots[i] / q}, penalty);
    if (std::abs(v - beta[i]) > tol) violations.push_back(i);
  }
  return violations;
}

Model null_model(Loss loss, std::span<const double> y, bool fit_intercept) {
  Model m;
  m.intercept = fit_intercept ? null_intercept(loss, y) : 0.0;
  std::vector<double> eta(y.size(), m.intercept);
  m.objective = loss_value(loss, y, eta);
  return m;
}

}  // namespace l0path
