#include <doctest.h>

#include <cmath>
#include <random>

#include "l0path/objective.hpp"
#include "support.hpp"

using namespace l0path;

namespace {

PenaltyConfig pen(PenaltyKind kind, double lambda, double gamma,
                  std::optional<Box> box = {}) {
  return PenaltyConfig{kind, lambda, gamma, box};
}

double g(const CoordSubproblem& s, const PenaltyConfig& p, double b) {
  double v = 0.5 * s.q * (b - s.btilde) * (b - s.btilde);
  if (b != 0.0) v += p.lambda;
  if (p.kind == PenaltyKind::L0L1) v += p.gamma * std::abs(b);
  if (p.kind == PenaltyKind::L0L2) v += p.gamma * b * b;
  return v;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("loss values") {
  std::vector<double> y{1, -2, 3};
  CHECK(loss_value(Loss::SquaredError, y, y) == 0.0);
  std::vector<double> lab{1, -1, 1, -1};
  std::vector<double> zero(4, 0.0);
  CHECK(loss_value(Loss::Logistic, lab, zero) == doctest::Approx(4 * std::log(2.0)));
  CHECK(loss_value(Loss::SquaredHinge, lab, zero) == doctest::Approx(4.0));
  std::vector<double> bad{0, NAN, 0, 0};
  CHECK_THROWS_AS(loss_value(Loss::Logistic, lab, bad), DataError);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> eta(5);
  std::vector<double> yl(5);
  for (int t = 0; t < 5; ++t) {
    eta[t] = 3 * nd(rng);
    yl[t] = nd(rng) > 0 ? 1 : -1;
  }
  double lg = 0, hg = 0, sq = 0;
  for (int t = 0; t < 5; ++t) {
    lg += std::log(1 + std::exp(-yl[t] * eta[t]));
    hg += std::pow(std::max(0.0, 1 - yl[t] * eta[t]), 2);
    sq += 0.5 * (yl[t] - eta[t]) * (yl[t] - eta[t]);
  }
  CHECK(loss_value(Loss::Logistic, yl, eta) == doctest::Approx(lg).epsilon(1e-12));
  CHECK(loss_value(Loss::SquaredHinge, yl, eta) == doctest::Approx(hg).epsilon(1e-12));
  CHECK(loss_value(Loss::SquaredError, yl, eta) == doctest::Approx(sq).epsilon(1e-12));
}

TEST_CASE("logistic loss is stable for large margins") {
  CHECK(sample_loss(Loss::Logistic, 1.0, 800.0) == doctest::Approx(0.0));
  CHECK(sample_loss(Loss::Logistic, 1.0, -800.0) == doctest::Approx(800.0));
  CHECK(std::isfinite(sample_loss_derivative(Loss::Logistic, -1.0, 800.0)));
}

TEST_CASE("loss derivatives match finite differences") {
  for (Loss loss : {Loss::SquaredError, Loss::Logistic, Loss::SquaredHinge}) {
    for (double y : {-1.0, 1.0}) {
      for (double eta : {-2.3, -0.4, 0.3, 0.7, 1.9}) {
        const double h = 1e-6;
        const double fd = (sample_loss(loss, y, eta + h) - sample_loss(loss, y, eta - h)) / (2 * h);
        CHECK(sample_loss_derivative(loss, y, eta) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("objective value") {
  // p = 3, beta = (1, 0, -2), lambda 0.7, gamma 0.1, L0L2.
  auto x = DataMatrix::dense(2, 3, {1, 0, 0, 1, 1, 1});
  std::vector<double> y{0.5, -1};
  SparseVector b{{0, 2}, {1.0, -2.0}};
  const double eta0 = 0.25 + 1 - 2;
  const double eta1 = 0.25 - 2;
  const double loss = 0.5 * (0.5 - eta0) * (0.5 - eta0) + 0.5 * (-1 - eta1) * (-1 - eta1);
  CHECK(objective_value(x, y, 0.25, b, Loss::SquaredError, pen(PenaltyKind::L0L2, 0.7, 0.1)) ==
        doctest::Approx(loss + 0.7 * 2 + 0.1 * 5));
  CHECK(objective_value(x, y, 0.25, b, Loss::SquaredError, pen(PenaltyKind::L0L1, 0.7, 0.1)) ==
        doctest::Approx(loss + 0.7 * 2 + 0.1 * 3));
  CHECK(objective_value(x, y, 0.0, SparseVector{}, Loss::SquaredError, pen(PenaltyKind::L0, 1, 0)) ==
        doctest::Approx(0.5 * (0.25 + 1)));
}

TEST_CASE("solve_coord closed-form examples") {
  CHECK(solve_coord({1, 2}, pen(PenaltyKind::L0, 0.5, 0)) == 2.0);
  CHECK(solve_coord({1, 1}, pen(PenaltyKind::L0, 0.5, 0)) == 0.0);
  CHECK(solve_coord({1, -1.0000001}, pen(PenaltyKind::L0, 0.5, 0)) == -1.0000001);
  CHECK(solve_coord({2.5, 0.731}, pen(PenaltyKind::L0, 0, 0)) == 0.731);
  CHECK(solve_coord({1, 5}, pen(PenaltyKind::L0, 0.01, 0, Box{-1, 1})) == 1.0);
  CHECK(solve_coord({1, -5}, pen(PenaltyKind::L0, 0.01, 0, Box{0, 1})) == 0.0);
  // L0L1: soft threshold then compare.
  CHECK(solve_coord({2, 3}, pen(PenaltyKind::L0L1, 0.1, 1)) == doctest::Approx(2.5));
  CHECK(solve_coord({2, 0.4}, pen(PenaltyKind::L0L1, 0, 1)) == 0.0);
  // L0L2: q b / (q + 2 gamma).
  CHECK(solve_coord({2, 3}, pen(PenaltyKind::L0L2, 0.1, 1)) == doctest::Approx(1.5));
}

TEST_CASE("solve_coord is the minimum over candidates") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 2000; ++t) {
    const PenaltyKind kind = static_cast<PenaltyKind>(t % 3);
    CoordSubproblem s{0.1 + 5 * u(rng), 8 * (u(rng) - 0.5)};
    std::optional<Box> box;
    if (t % 4 == 0) box = Box{-2 * u(rng), 2 * u(rng)};
    PenaltyConfig p = pen(kind, 3 * u(rng), kind == PenaltyKind::L0 ? 0 : 2 * u(rng), box);
    const double b = solve_coord(s, p);
    const double v = coord_shrink(s, p);
    CHECK(g(s, p, b) <= g(s, p, 0.0) + 1e-12);
    CHECK(g(s, p, b) <= g(s, p, v) + 1e-12);
    if (box) CHECK((b == 0.0 || (b >= box->lo && b <= box->hi)));
    // Monotone in lambda.
    if (b == 0.0) {
      PenaltyConfig bigger = p;
      bigger.lambda *= 1.5;
      CHECK(solve_coord(s, bigger) == 0.0);
    }
    // coord_objective is g relative to (q/2) btilde^2.
    CHECK(coord_objective(s, p, b) + 0.5 * s.q * s.btilde * s.btilde ==
          doctest::Approx(g(s, p, b)).epsilon(1e-10));
    // Nonzero exactly when the gain beats lambda.
    CHECK((b != 0.0) == (coord_gain(s, p) > p.lambda));
  }
}

TEST_CASE("majorization constants") {
  CHECK(majorization_constant(Loss::SquaredError, 3) == 3);
  CHECK(majorization_constant(Loss::Logistic, 4) == 1);
  CHECK(majorization_constant(Loss::SquaredHinge, 1) == 2);
  CHECK_THROWS_AS(majorization_constant(Loss::Logistic, 0), std::domain_error);
}

TEST_CASE("penalty validation") {
  CHECK_THROWS_AS(pen(PenaltyKind::L0, 1, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(pen(PenaltyKind::L0L2, -1, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(pen(PenaltyKind::L0L2, 1, -0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(pen(PenaltyKind::L0L2, 1, 0.5, Box{0.1, 1}).validate(), std::invalid_argument);
  CHECK_NOTHROW(pen(PenaltyKind::L0L1, 1, 0.5, Box{-1, 0}).validate());
}

TEST_CASE("names parse") {
  CHECK(parse_loss("squared") == Loss::SquaredError);
  CHECK(parse_loss("logistic") == Loss::Logistic);
  CHECK(parse_loss("squared-hinge") == Loss::SquaredHinge);
  CHECK(parse_penalty("l0l2") == PenaltyKind::L0L2);
  CHECK_THROWS_AS(parse_loss("huber"), std::invalid_argument);
  CHECK_THROWS_AS(parse_penalty("L1"), std::invalid_argument);
  CHECK(parse_loss(to_string(Loss::SquaredHinge)) == Loss::SquaredHinge);
}

TEST_CASE("null intercepts") {
  CHECK(null_intercept(Loss::SquaredError, std::vector<double>{1, 2, 3}) == 2.0);
  CHECK(null_intercept(Loss::Logistic, std::vector<double>{1, -1, 1, -1}) == doctest::Approx(0.0));
  CHECK(null_intercept(Loss::Logistic, std::vector<double>{1, 1, 1, -1}) ==
        doctest::Approx(std::log(3.0)));
}

}
