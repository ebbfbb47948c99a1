#include "l0path/objective.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace l0path {

std::string_view to_string(Loss loss) {
  switch (loss) {
    case Loss::SquaredError: return "squared";
    case Loss::Logistic: return "logistic";
    case Loss::SquaredHinge: return "squared-hinge";
  }
  return "?";
}

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L0: return "L0";
    case PenaltyKind::L0L1: return "L0L1";
    case PenaltyKind::L0L2: return "L0L2";
  }
  return "?";
}

Loss parse_loss(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "squared" || s == "squared-error" || s == "squarederror") {
    return Loss::SquaredError;
  }
  if (s == "logistic") return Loss::Logistic;
  if (s == "squared-hinge" || s == "squaredhinge") return Loss::SquaredHinge;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

PenaltyKind parse_penalty(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (s == "L0") return PenaltyKind::L0;
  if (s == "L0L1") return PenaltyKind::L0L1;
  if (s == "L0L2") return PenaltyKind::L0L2;
  throw std::invalid_argument("unknown penalty '" + std::string(name) + "'");
}

void PenaltyConfig::validate() const {
  if (!(lambda >= 0.0) || std::isnan(lambda)) {
    throw std::invalid_argument("lambda must be >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be finite and >= 0");
  }
  if (kind == PenaltyKind::L0 && gamma != 0.0) {
    throw std::invalid_argument("gamma must be 0 for the pure L0 penalty");
  }
  if (box && !(box->lo <= 0.0 && 0.0 <= box->hi)) {
    throw std::invalid_argument("box bounds must satisfy lo <= 0 <= hi");
  }
}

double sample_loss(Loss loss, double y, double eta) {
  switch (loss) {
    case Loss::SquaredError: {
      double d = y - eta;
      return 0.5 * d * d;
    }
    case Loss::Logistic: {
      double z = y * eta;
      return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
    }
    case Loss::SquaredHinge: {
      double m = 1.0 - y * eta;
      return m > 0.0 ? m * m : 0.0;
    }
  }
  return 0.0;
}

double sample_loss_derivative(Loss loss, double y, double eta) {
  switch (loss) {
    case Loss::SquaredError:
      return eta - y;
    case Loss::Logistic: {
      // -y * sigmoid(-y eta)
      double z = y * eta;
      double s = z > 0.0 ? std::exp(-z) / (1.0 + std::exp(-z))
                         : 1.0 / (1.0 + std::exp(z));
      return -y * s;
    }
    case Loss::SquaredHinge: {
      double m = 1.0 - y * eta;
      return m > 0.0 ? -2.0 * y * m : 0.0;
    }
  }
  return 0.0;
}

double sample_loss_curvature(Loss loss, double y, double eta) {
  switch (loss) {
    case Loss::SquaredError:
      return 1.0;
    case Loss::Logistic: {
      double e = std::exp(-std::abs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Loss::SquaredHinge:
      return 1.0 - y * eta > 0.0 ? 2.0 : 0.0;
  }
  return 0.0;
}

double loss_value(Loss loss, std::span<const double> y,
                  std::span<const double> eta) {
  if (y.size() != eta.size()) throw DataError("loss_value: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(eta[i])) {
      throw DataError("non-finite linear predictor at sample " +
                      std::to_string(i));
    }
    total += sample_loss(loss, y[i], eta[i]);
  }
  return total;
}

namespace {

double lq_term(PenaltyKind kind, double b) {
  switch (kind) {
    case PenaltyKind::L0: return 0.0;
    case PenaltyKind::L0L1: return std::abs(b);
    case PenaltyKind::L0L2: return b * b;
  }
  return 0.0;
}

}  // namespace

double penalty_value(const PenaltyConfig& penalty,
                     std::span<const double> beta) {
  double count = 0.0;
  double lq = 0.0;
  for (double b : beta) {
    if (b != 0.0) {
      count += 1.0;
      lq += lq_term(penalty.kind, b);
    }
  }
  return penalty.lambda * count + penalty.gamma * lq;
}

double coefficient_penalty(const PenaltyConfig& penalty, double b) {
  if (b == 0.0) return 0.0;
  return penalty.lambda + penalty.gamma * lq_term(penalty.kind, b);
}

double penalty_value(const PenaltyConfig& penalty, const SparseVector& beta) {
  return penalty_value(penalty, std::span<const double>(beta.values));
}

double objective_value(const DataMatrix& x, std::span<const double> y,
                       double beta0, const SparseVector& beta, Loss loss,
                       const PenaltyConfig& penalty) {
  if (y.size() != x.rows()) throw DataError("objective_value: length mismatch");
  std::vector<double> eta = x.multiply(beta);
  for (double& e : eta) e += beta0;
  return loss_value(loss, y, eta) + penalty_value(penalty, beta);
}

double coord_objective(const CoordSubproblem& sub, const PenaltyConfig& penalty,
                       double b) {
  if (b == 0.0) return 0.0;
  return 0.5 * sub.q * (b * b - 2.0 * b * sub.btilde) + penalty.lambda +
         penalty.gamma * lq_term(penalty.kind, b);
}

double coord_shrink(const CoordSubproblem& sub, const PenaltyConfig& penalty) {
  double v = sub.btilde;
  switch (penalty.kind) {
    case PenaltyKind::L0:
      break;
    case PenaltyKind::L0L1: {
      double mag = std::abs(sub.btilde) - penalty.gamma / sub.q;
      v = mag > 0.0 ? std::copysign(mag, sub.btilde) : 0.0;
      break;
    }
    case PenaltyKind::L0L2:
      v = sub.q * sub.btilde / (sub.q + 2.0 * penalty.gamma);
      break;
  }
  if (penalty.box) v = std::clamp(v, penalty.box->lo, penalty.box->hi);
  return v;
}

namespace {

// g(v) - (q/2) btilde^2 without the lambda charge.
double smooth_part(const CoordSubproblem& sub, const PenaltyConfig& penalty,
                   double v) {
  return 0.5 * sub.q * (v * v - 2.0 * v * sub.btilde) +
         penalty.gamma * lq_term(penalty.kind, v);
}

}  // namespace

double solve_coord(const CoordSubproblem& sub, const PenaltyConfig& penalty) {
  double v = coord_shrink(sub, penalty);
  if (v == 0.0) return 0.0;
  return -smooth_part(sub, penalty, v) > penalty.lambda ? v : 0.0;
}

double coord_gain(const CoordSubproblem& sub, const PenaltyConfig& penalty) {
  double v = coord_shrink(sub, penalty);
  if (v == 0.0) return 0.0;
  return std::max(0.0, -smooth_part(sub, penalty, v));
}

double majorization_constant(Loss loss, double col_sq_norm) {
  if (!(col_sq_norm > 0.0)) {
    throw std::domain_error("zero-norm column has no coordinate subproblem");
  }
  switch (loss) {
    case Loss::SquaredError: return col_sq_norm;
    case Loss::Logistic: return 0.25 * col_sq_norm;
    case Loss::SquaredHinge: return 2.0 * col_sq_norm;
  }
  return col_sq_norm;
}

double null_intercept(Loss loss, std::span<const double> y) {
  if (y.empty()) throw DataError("empty response");
  const double n = static_cast<double>(y.size());
  if (loss == Loss::SquaredError) {
    double s = 0.0;
    for (double v : y) s += v;
    return s / n;
  }
  double pos = 0.0;
  for (double v : y) pos += v > 0.0 ? 1.0 : 0.0;
  double neg = n - pos;
  if (loss == Loss::Logistic) {
    if (pos == 0.0 || neg == 0.0) {
      throw DataError("logistic intercept is unbounded for constant labels");
    }
    return std::log(pos / neg);
  }
  return (pos - neg) / n;
}

}  // namespace l0path
