#include <doctest.h>

#include <cmath>

#include "l0path/data.hpp"
#include "support.hpp"

using namespace l0path;

TEST_SUITE("data") {

TEST_CASE("dense and sparse factories agree on statistics") {
  // 3x2: [[1,0],[0,2],[3,0]]
  auto d = DataMatrix::dense(3, 2, {1, 0, 3, 0, 2, 0});
  auto s = DataMatrix::sparse(3, 2, {0, 2, 3}, {0, 2, 1}, {1, 3, 2});
  CHECK(d.col_sq_norm(0) == 10.0);
  CHECK(d.col_sq_norm(1) == 4.0);
  CHECK(s.col_sq_norm(0) == 10.0);
  CHECK(s.col_mean(1) == doctest::Approx(2.0 / 3.0));
  CHECK(d.stats_consistent());
  CHECK(s.stats_consistent());
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c) CHECK(d.at(r, c) == s.at(r, c));
  }
}

TEST_CASE("sparse invariants are enforced") {
  CHECK_THROWS_AS(DataMatrix::sparse(3, 2, {0, 2}, {0, 1}, {1, 1}), DataError);
  CHECK_THROWS_AS(DataMatrix::sparse(3, 2, {0, 2, 1}, {0, 1}, {1, 1}), DataError);
  CHECK_THROWS_AS(DataMatrix::sparse(3, 1, {0, 2}, {1, 1}, {1, 1}), DataError);
  CHECK_THROWS_AS(DataMatrix::sparse(3, 1, {0, 1}, {3}, {1}), DataError);
  CHECK_THROWS_AS(DataMatrix::dense(0, 1, {}), DataError);
  CHECK_THROWS_AS(DataMatrix::dense(2, 2, {1, 2, 3}), DataError);
}

TEST_CASE("column statistics match recomputation on random matrices") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto x = testing::random_dense(17, 9, seed, 0.4);
    auto s = x.to_sparse();
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double ss = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) ss += x.at(r, c) * x.at(r, c);
      CHECK(x.col_sq_norm(c) == doctest::Approx(ss).epsilon(1e-12));
      CHECK(s.col_sq_norm(c) == doctest::Approx(ss).epsilon(1e-12));
    }
  }
}

TEST_CASE("dot, multiply and row selection") {
  auto x = testing::random_dense(12, 5, 3, 0.5);
  auto s = x.to_sparse();
  std::vector<double> v(12);
  for (std::size_t r = 0; r < 12; ++r) v[r] = 0.5 * r - 2.0;
  for (std::size_t c = 0; c < 5; ++c) {
    double ref = 0.0;
    for (std::size_t r = 0; r < 12; ++r) ref += x.at(r, c) * v[r];
    CHECK(x.column_dot(c, v) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(s.column_dot(c, v) == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK_THROWS_AS(x.column_dot(0, std::vector<double>(3)), DataError);

  SparseVector b{{1, 4}, {2.0, -1.0}};
  auto xb = x.multiply(b);
  auto sb = s.multiply(b);
  for (std::size_t r = 0; r < 12; ++r) {
    CHECK(xb[r] == doctest::Approx(2 * x.at(r, 1) - x.at(r, 4)));
    CHECK(sb[r] == doctest::Approx(xb[r]).epsilon(1e-14));
  }

  std::vector<std::size_t> rows{5, 0, 7};
  auto xs = x.select_rows(rows);
  auto ss = s.select_rows(rows);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(xs.at(k, c) == x.at(rows[k], c));
      CHECK(ss.at(k, c) == x.at(rows[k], c));
    }
  }
  CHECK_THROWS_AS(x.select_rows(std::vector<std::size_t>{12}), DataError);
}

TEST_CASE("sparse vector conversions drop zeros") {
  std::vector<double> d{0, 1.5, 0, -2, 0};
  auto sv = SparseVector::from_dense(d);
  CHECK(sv.indices == std::vector<std::size_t>{1, 3});
  CHECK(sv.values == std::vector<double>{1.5, -2});
  CHECK(sv.to_dense(5) == d);
}

TEST_CASE("load_csv extracts the response column") {
  auto dir = testing::temp_dir("csv");
  testing::write_file(dir / "a.csv", "1,2\n3,4\n5,6\n");
  Dataset ds = load_csv(dir / "a.csv", false, 1);
  CHECK(ds.x.rows() == 3);
  CHECK(ds.x.cols() == 1);
  CHECK(ds.x.at(0, 0) == 1.0);
  CHECK(ds.x.at(1, 0) == 3.0);
  CHECK(ds.x.at(2, 0) == 5.0);
  CHECK(ds.y == std::vector<double>{2, 4, 6});

  testing::write_file(dir / "h.csv", "a,b,c\n1,2,3\n");
  Dataset h = load_csv(dir / "h.csv", true, 0);
  CHECK(h.y == std::vector<double>{1});
  CHECK(h.x.cols() == 2);
}

TEST_CASE("load_csv rejects bad files with locations") {
  auto dir = testing::temp_dir("csv_bad");
  testing::write_file(dir / "empty.csv", "");
  CHECK_THROWS_WITH_AS(load_csv(dir / "empty.csv", false, 0),
                       doctest::Contains("no rows"), DataError);
  testing::write_file(dir / "nan.csv", "1,2\n3,NaN\n");
  CHECK_THROWS_WITH_AS(load_csv(dir / "nan.csv", false, 0),
                       doctest::Contains("line 2, column 2"), DataError);
  testing::write_file(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_WITH_AS(load_csv(dir / "ragged.csv", false, 0),
                       doctest::Contains("ragged"), DataError);
  testing::write_file(dir / "text.csv", "1,x\n");
  CHECK_THROWS_WITH_AS(load_csv(dir / "text.csv", false, 0),
                       doctest::Contains("column 2"), DataError);
  CHECK_THROWS_AS(load_csv(dir / "missing.csv", false, 0), DataError);
}

TEST_CASE("matrix market reader") {
  auto dir = testing::temp_dir("mtx");
  testing::write_file(dir / "a.mtx",
                      "%%MatrixMarket matrix coordinate real general\n"
                      "% comment\n"
                      "3 2 4\n"
                      "1 1 1.5\n"
                      "3 2 2\n"
                      "1 1 0.5\n"
                      "2 2 -1\n");
  DataMatrix m = load_matrix_market(dir / "a.mtx");
  CHECK(m.is_sparse());
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.at(0, 0) == 2.0);
  CHECK(m.at(2, 1) == 2.0);
  CHECK(m.at(1, 1) == -1.0);
  CHECK(m.at(1, 0) == 0.0);

  testing::write_file(dir / "hdr.mtx", "%%MatrixMarket matrix array real general\n1 1\n1\n");
  CHECK_THROWS_AS(load_matrix_market(dir / "hdr.mtx"), DataError);
  testing::write_file(dir / "oob.mtx",
                      "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  CHECK_THROWS_AS(load_matrix_market(dir / "oob.mtx"), DataError);

  write_matrix_market(dir / "rt.mtx", m);
  DataMatrix back = load_matrix_market(dir / "rt.mtx");
  CHECK(back.dense_values() == m.dense_values());
}

TEST_CASE("csv round trip is exact") {
  auto dir = testing::temp_dir("csv_rt");
  auto x = testing::random_dense(6, 4, 11);
  write_csv(dir / "x.csv", x);
  Dataset back = load_csv(dir / "x.csv", false, std::nullopt);
  CHECK(back.x.dense_values() == x.dense_values());
}

TEST_CASE("check_response validates length and labels") {
  auto x = DataMatrix::dense(3, 1, {1, 2, 3});
  CHECK_NOTHROW(check_response(x, std::vector<double>{1, -1, 1}, true));
  CHECK_THROWS_AS(check_response(x, std::vector<double>{1, 0, 1}, true), DataError);
  CHECK_THROWS_AS(check_response(x, std::vector<double>{1, 2}, false), DataError);
  CHECK_THROWS_AS(check_response(x, std::vector<double>{1, NAN, 2}, false), DataError);
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.n = 400;
  spec.p = 60;
  spec.k = 6;
  spec.rho = 0.5;
  spec.seed = 4;
  SyntheticData d = generate_synthetic(spec);
  CHECK(d.beta_star.indices == std::vector<std::size_t>{0, 10, 20, 30, 40, 50});
  CHECK(d.beta_star.size() == spec.k);

  SUBCASE("deterministic under a seed") {
    SyntheticData again = generate_synthetic(spec);
    CHECK(again.x.dense_values() == d.x.dense_values());
    CHECK(again.y == d.y);
  }
  SUBCASE("sigma follows the signal-to-noise ratio") {
    // Var(x^T b*) = sum_{s,t} rho^|s-t| over the support.
    double var = 0.0;
    for (std::size_t a : d.beta_star.indices) {
      for (std::size_t b : d.beta_star.indices) {
        var += std::pow(spec.rho, std::abs(double(a) - double(b)));
      }
    }
    CHECK(synthetic_signal_variance(spec) == doctest::Approx(var));
    CHECK(d.sigma == doctest::Approx(std::sqrt(var / spec.snr)));
  }
  SUBCASE("adjacent columns have correlation near rho") {
    auto corr = [&](std::size_t a, std::size_t b) {
      double sab = 0, saa = 0, sbb = 0;
      for (std::size_t r = 0; r < spec.n; ++r) {
        sab += d.x.at(r, a) * d.x.at(r, b);
        saa += d.x.at(r, a) * d.x.at(r, a);
        sbb += d.x.at(r, b) * d.x.at(r, b);
      }
      return sab / std::sqrt(saa * sbb);
    };
    double c1 = 0.0;
    double c5 = 0.0;
    for (std::size_t i = 0; i + 5 < spec.p; ++i) {
      c1 += corr(i, i + 1);
      c5 += corr(i, i + 5);
    }
    c1 /= double(spec.p - 5);
    c5 /= double(spec.p - 5);
    CHECK(c1 == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(c5) < 0.08);
  }
  SUBCASE("rho = 0 gives uncorrelated columns") {
    SyntheticSpec s0 = spec;
    s0.rho = 0.0;
    SyntheticData z = generate_synthetic(s0);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < s0.p; ++i) {
      double sab = 0, saa = 0, sbb = 0;
      for (std::size_t r = 0; r < s0.n; ++r) {
        sab += z.x.at(r, i) * z.x.at(r, i + 1);
        saa += z.x.at(r, i) * z.x.at(r, i);
        sbb += z.x.at(r, i + 1) * z.x.at(r, i + 1);
      }
      worst = std::max(worst, std::abs(sab / std::sqrt(saa * sbb)));
    }
    // 4.5 standard errors at n = 400.
    CHECK(worst < 4.5 / std::sqrt(400.0));
  }
  SUBCASE("classification labels are +-1") {
    SyntheticSpec sc = spec;
    sc.classification = true;
    SyntheticData c = generate_synthetic(sc);
    for (double v : c.y) CHECK((v == 1.0 || v == -1.0));
  }
  CHECK_THROWS_AS(generate_synthetic({10, 5, 6, 0.3, 5, 1, false}), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic({10, 5, 2, 1.0, 5, 1, false}), std::invalid_argument);
}

}
