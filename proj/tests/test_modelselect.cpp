#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "l0path/modelselect.hpp"
#include "support.hpp"

using namespace l0path;

TEST_SUITE("modelselect") {

TEST_CASE("folds partition the samples") {
  for (std::size_t n : {10, 11, 37, 100}) {
    for (std::size_t k : {std::size_t{2}, std::size_t{5}, n}) {
      auto fold_of = make_folds(n, k, 42);
      std::vector<std::size_t> sizes(k, 0);
      for (std::size_t f : fold_of) {
        REQUIRE(f < k);
        ++sizes[f];
      }
      auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      CHECK(*hi - *lo <= 1);
      CHECK(make_folds(n, k, 42) == fold_of);
    }
  }
  CHECK(make_folds(50, 5, 1) != make_folds(50, 5, 2));
  CHECK_THROWS_AS(make_folds(10, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_folds(10, 11, 1), std::invalid_argument);
}

TEST_CASE("leave-one-out cross-validation") {
  auto x = testing::random_dense(10, 4, 1);
  auto y = testing::random_response(x, 2, 0.3, 2);
  PathOptions o;
  o.n_lambda = 5;
  CVResult cv = cross_validate(x, y, Loss::SquaredError, PenaltyKind::L0,
                               std::vector<double>{0.0}, 10, 7, o);
  auto sorted = cv.fold_of;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t r = 0; r < 10; ++r) CHECK(sorted[r] == r);
  CHECK(cv.mean.size() == 1);
  CHECK(cv.mean[0].size() == cv.path.paths[0].models.size());
  for (double m : cv.mean[0]) CHECK(std::isfinite(m));
  CHECK_THROWS_AS(cross_validate(x, y, Loss::SquaredError, PenaltyKind::L0,
                                 std::vector<double>{0.0}, 1, 7, o),
                  std::invalid_argument);
}

TEST_CASE("cross-validation statistics match a direct recomputation") {
  auto x = testing::random_dense(40, 8, 3);
  auto y = testing::random_response(x, 3, 0.5, 4);
  PathOptions o;
  o.n_lambda = 6;
  CVResult cv = cross_validate(x, y, Loss::SquaredError, PenaltyKind::L0L2,
                               std::vector<double>{0.5, 0.05}, 4, 11, o);
  for (std::size_t g = 0; g < 2; ++g) {
    const auto& chain = cv.path.paths[g];
    for (std::size_t l = 0; l < chain.models.size(); ++l) {
      std::vector<double> fold_losses;
      for (std::size_t f = 0; f < 4; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t r = 0; r < 40; ++r) (cv.fold_of[r] == f ? va : tr).push_back(r);
        std::vector<double> ty, vy;
        for (auto r : tr) ty.push_back(y[r]);
        for (auto r : va) vy.push_back(y[r]);
        PathOptions fo = o;
        fo.lambda_grids = {};
        for (const auto& c : cv.path.paths) {
          fo.lambda_grids.emplace_back();
          for (const auto& m : c.models) fo.lambda_grids.back().push_back(m.lambda);
        }
        FitPath fp = fit_path(x.select_rows(tr), ty, Loss::SquaredError, PenaltyKind::L0L2,
                              std::vector<double>{0.5, 0.05}, fo);
        const Model& m = fp.paths[g].models[l];
        DataMatrix vx = x.select_rows(va);
        double mse = 0.0;
        for (std::size_t r = 0; r < va.size(); ++r) {
          double eta = m.intercept;
          for (std::size_t j = 0; j < m.beta.size(); ++j) eta += vx.at(r, m.beta.indices[j]) * m.beta.values[j];
          mse += (vy[r] - eta) * (vy[r] - eta);
        }
        fold_losses.push_back(mse / double(va.size()));
      }
      double mean = 0.0;
      for (double v : fold_losses) mean += v / 4.0;
      double ss = 0.0;
      for (double v : fold_losses) ss += (v - mean) * (v - mean);
      CHECK(cv.mean[g][l] == doctest::Approx(mean).epsilon(1e-10));
      CHECK(cv.se[g][l] == doctest::Approx(std::sqrt(ss / 3.0) / 2.0).epsilon(1e-8));
      CHECK(cv.mean[g][l] >= cv.mean[cv.best_gamma_index][cv.best_lambda_index]);
    }
  }
  CVResult again = cross_validate(x, y, Loss::SquaredError, PenaltyKind::L0L2,
                                  std::vector<double>{0.5, 0.05}, 4, 11, o);
  CHECK(again.mean == cv.mean);
  CHECK(again.best_lambda_index == cv.best_lambda_index);
}

TEST_CASE("pure-noise responses select small models") {
  int small = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto x = testing::random_dense(200, 100, seed);
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> normal;
    std::vector<double> y(200);
    for (double& v : y) v = normal(rng);
    PathOptions o;
    o.n_lambda = 30;
    CVResult cv = cross_validate(x, y, Loss::SquaredError, PenaltyKind::L0,
                                 std::vector<double>{0.0}, 5, seed, o);
    if (cv.best_model().support_size() <= 5) ++small;
  }
  CHECK(small >= 8);
}

TEST_CASE("classification cross-validation") {
  auto x = testing::random_dense(60, 10, 5);
  auto y = testing::random_labels(x, 3, 6);
  PathOptions o;
  o.n_lambda = 8;
  CVResult cv = cross_validate(x, y, Loss::Logistic, PenaltyKind::L0L2,
                               std::vector<double>{0.1}, 3, 1, o);
  for (double m : cv.mean[0]) CHECK(std::isfinite(m));

  std::vector<double> one_neg(60, 1.0);
  one_neg[0] = -1.0;
  CHECK_THROWS_AS(cross_validate(x, one_neg, Loss::Logistic, PenaltyKind::L0L2,
                                 std::vector<double>{0.1}, 3, 1, o),
                  DataError);
}

TEST_CASE("tuning on the training set overfits") {
  auto x = testing::random_dense(50, 20, 7);
  auto y = testing::random_response(x, 3, 1.0, 8);
  PathOptions o;
  o.n_lambda = 100;
  TuneResult t = tune_on_validation(x, y, x, y, Loss::SquaredError, PenaltyKind::L0,
                                    std::vector<double>{0.0}, o);
  const auto& models = t.path.paths[0].models;
  CHECK(t.best_lambda_index == models.size() - 1);
  CHECK(t.best.support_size() == models.back().support_size());
  CHECK(t.table.size() == models.size());
  for (const auto& row : t.table) CHECK(row.metric >= t.table[t.best_lambda_index].metric);

  PathOptions single;
  single.lambda_grids = {{1e6}};
  TuneResult s = tune_on_validation(x, y, x, y, Loss::SquaredError, PenaltyKind::L0,
                                    std::vector<double>{0.0}, single);
  CHECK(s.table.size() == 1);
  CHECK(s.best.beta.empty());

  auto narrow = testing::random_dense(50, 19, 7);
  CHECK_THROWS_AS(tune_on_validation(x, y, narrow, y, Loss::SquaredError, PenaltyKind::L0,
                                     std::vector<double>{0.0}, o),
                  DataError);
}

TEST_CASE("prediction error") {
  auto x = testing::random_dense(30, 6, 9);
  SparseVector star{{1, 4}, {1.0, -2.0}};
  CHECK(prediction_error(x, star, star) == 0.0);
  CHECK(prediction_error(x, SparseVector{}, star) == doctest::Approx(1.0));
  CHECK(prediction_error(x, SparseVector{{1, 4}, {2.0, -4.0}}, star) == doctest::Approx(1.0));
  CHECK(prediction_error(x, SparseVector{{1, 4}, {0.25, -0.5}}, star) == doctest::Approx(0.75));
  CHECK_THROWS_AS(prediction_error(x, star, SparseVector{}), std::domain_error);
}

TEST_CASE("support metrics") {
  SparseVector star{{0, 3, 5}, {1, 1, 1}};
  auto same = support_metrics(star, star);
  CHECK(same.false_positives == 0);
  CHECK(same.true_positives == 3);
  CHECK(same.support_size == 3);
  auto disjoint = support_metrics(SparseVector{{1, 2, 4}, {1, 1, 1}}, star);
  CHECK(disjoint.false_positives == 3);
  CHECK(disjoint.support_size == 3);
  auto mixed = support_metrics(SparseVector{{0, 1, 5, 7}, {1, 1, 1, 1}}, star);
  CHECK(mixed.false_positives + mixed.true_positives == mixed.support_size);
  CHECK(mixed.true_positives == 2);
}

TEST_CASE("predict") {
  auto eye = DataMatrix::dense(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Model m;
  m.intercept = 0.5;
  CHECK(predict(m, eye, Loss::SquaredError).eta == std::vector<double>{0.5, 0.5, 0.5});
  m.beta = SparseVector{{2}, {3.0}};
  CHECK(predict(m, eye, Loss::SquaredError).eta == std::vector<double>{0.5, 0.5, 3.5});
  CHECK(predict(m, eye, Loss::SquaredError).probability.empty());

  Model zero;
  Prediction p = predict(zero, eye, Loss::Logistic);
  CHECK(p.probability[0] == 0.5);
  CHECK(p.label[0] == 1.0);
  m.intercept = -5.0;
  p = predict(m, eye, Loss::Logistic);
  CHECK(p.label[0] == -1.0);
  CHECK(p.label[2] == -1.0);
  CHECK(p.probability[0] == doctest::Approx(1.0 / (1.0 + std::exp(5.0))));

  m.beta = SparseVector{{5}, {1.0}};
  CHECK_THROWS_AS(predict(m, eye, Loss::SquaredError), DataError);
}

}
