#include <cmath>
#include <stdexcept>

#include "assist/rng.hpp"
#include "assist/types.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace assist;
using assist::testing::from_rows;

TEST_CASE("rescale_responses on already normalized input") {
  auto [vals, scale] = rescale_responses({-1.0, 1.0});
  CHECK(vals[0] == -1.0);
  CHECK(vals[1] == 1.0);
  CHECK(scale.shift == 0.0);
  CHECK(scale.span == 1.0);
}

TEST_CASE("rescale_responses midrange/half-range arithmetic") {
  auto [vals, scale] = rescale_responses({0.0, 10.0});
  CHECK(scale.shift == 5.0);
  CHECK(scale.span == 5.0);
  CHECK(vals[0] == -1.0);
  CHECK(vals[1] == 1.0);
}

TEST_CASE("rescale_responses constant input degenerates to span 1") {
  auto [vals, scale] = rescale_responses({3.0, 3.0, 3.0});
  CHECK(scale.shift == 3.0);
  CHECK(scale.span == 1.0);
  for (double v : vals) CHECK(v == 0.0);
}

TEST_CASE("rescale_responses rejects non-finite input") {
  CHECK_THROWS_AS(rescale_responses({1.0, std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(rescale_responses({}), std::invalid_argument);
}

TEST_CASE("response scale round trip is the identity") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_index(12));
    std::vector<double> raw(n);
    for (double& y : raw) y = rng.uniform(-50.0, 50.0);
    auto [vals, scale] = rescale_responses(raw);
    for (int i = 0; i < n; ++i) {
      double back = scale.to_raw(vals[i]);
      CHECK(std::abs(back - raw[i]) <=
            1e-12 * std::max(1.0, std::abs(raw[i])));
    }
  }
}

TEST_CASE("level grid structure") {
  for (int H = 1; H <= 50; ++H) {
    LevelGrid grid(H);
    REQUIRE(grid.levels.size() == static_cast<std::size_t>(2 * H + 1));
    CHECK(grid.levels.front() == -1.0);
    CHECK(grid.levels.back() == 1.0);
    CHECK(grid.levels[H] == 0.0);
    for (std::size_t k = 1; k < grid.levels.size(); ++k) {
      CHECK(grid.levels[k] > grid.levels[k - 1]);
      CHECK(std::abs(grid.levels[k] - grid.levels[k - 1] - 1.0 / H) <= 1e-12);
    }
    for (int k = 0; k <= 2 * H; ++k) {
      CHECK(level_index(grid.levels[k], H) == k);
    }
  }
  CHECK_THROWS_AS(LevelGrid(0), std::invalid_argument);
}

TEST_CASE("coefficient_matrix outer products") {
  TraceFunction tf;
  tf.u = from_rows({{1.0}, {0.0}});
  tf.v = from_rows({{2.0}, {0.0}});
  DenseMatrix B = coefficient_matrix(tf);
  CHECK(B(0, 0) == 2.0);
  CHECK(B(0, 1) == 0.0);
  CHECK(B(1, 0) == 0.0);
  CHECK(B(1, 1) == 0.0);

  tf.u = DenseMatrix(2, 1, 0.0);
  tf.v = from_rows({{2.0}, {1.0}});
  B = coefficient_matrix(tf);
  for (double x : B.values) CHECK(x == 0.0);

  tf.u = from_rows({{1.0, 0.0}, {0.0, 1.0}});
  tf.v = from_rows({{1.0, 0.0}, {0.0, 1.0}});
  B = coefficient_matrix(tf);
  CHECK(B(0, 0) == 1.0);
  CHECK(B(1, 1) == 1.0);
  CHECK(B(0, 1) == 0.0);
  CHECK(B(1, 0) == 0.0);
}

TEST_CASE("trace function validation enforces support and intercept bounds") {
  TraceFunction tf;
  tf.u = from_rows({{1.0}, {1.0}});
  tf.v = from_rows({{1.0}, {0.0}});
  tf.rank_budget = 1;
  tf.s1 = 2;
  tf.s2 = 1;
  CHECK_NOTHROW(validate_trace_function(tf, 2, 2, 0));

  tf.s1 = 1;  // two nonzero rows now exceed the budget
  CHECK_THROWS_AS(validate_trace_function(tf, 2, 2, 0), std::invalid_argument);

  tf.s1 = 2;
  tf.intercept = frobenius_norm(coefficient_matrix(tf)) + 1.5;
  CHECK_THROWS_AS(validate_trace_function(tf, 2, 2, 0), std::invalid_argument);
}

TEST_CASE("default hyperparameters follow the data size") {
  Hyperparams hp = default_hyperparams(400);
  CHECK(hp.H == 20);
  CHECK(hp.lambda == doctest::Approx(1.0 / 400).epsilon(1e-15));
  CHECK(hp.rho0 == 1.0);
  CHECK(hp.rho_growth == doctest::Approx(1.1));
  CHECK(hp.max_admm_iters == 100);
  CHECK(hp.max_inner_iters == 500);
  CHECK(hp.n_starts == 5);

  hp = default_hyperparams(25);
  CHECK(hp.H == 5);
  CHECK(hp.lambda == doctest::Approx(0.04));

  hp = default_hyperparams(2);
  CHECK(hp.H == 1);
  CHECK(hp.lambda == doctest::Approx(0.1));

  // Completion preset: H ~ sqrt(n_obs / (d r)).
  CHECK(completion_resolution(1600, 40, 2) == 4);
  CHECK(completion_resolution(3, 40, 2) == 1);
}

TEST_CASE("hyperparameter feasibility checks") {
  Hyperparams hp;
  hp.r = 2;
  hp.s1 = 2;
  hp.s2 = 2;
  CHECK_NOTHROW(check_feasible(hp, 4, 4));
  CHECK_THROWS_AS(check_feasible(hp, 1, 4), std::invalid_argument);
  hp.r = 3;  // r > min(s1, s2)
  CHECK_THROWS_AS(check_feasible(hp, 4, 4), std::invalid_argument);
}

TEST_CASE("dataset validation catches shape drift") {
  Rng rng(3);
  Dataset data = assist::testing::random_dataset(rng, 4, 2, 3);
  CHECK_NOTHROW(data.validate());
  data.samples[2].predictor = DenseMatrix(3, 2, 0.0);
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
}
