#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "assist/completion.hpp"
#include "assist/loss.hpp"
#include "assist/model.hpp"
#include "assist/rng.hpp"
#include "assist/simgen.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace assist;
using assist::testing::from_rows;
using assist::testing::random_matrix;

namespace {

bool same_bits(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         std::memcmp(a.values.data(), b.values.data(),
                     a.values.size() * sizeof(double)) == 0;
}

double inner(const DenseMatrix& x, const DenseMatrix& b) {
  double t = 0.0;
  for (std::size_t k = 0; k < x.values.size(); ++k) {
    t += x.values[k] * b.values[k];
  }
  return t;
}

// 1x1 truth whose empirical CDF has four knots, so every probability is
// hand-computable: p = 1/8 below 0.2, 7/8 above 0.8, interpolated between.
RegressionTruth hand_truth(LinkKind link) {
  RegressionTruth t;
  t.link = link;
  t.B = from_rows({{1.0}});
  t.calibration = {0.2, 0.4, 0.6, 0.8};
  return t;
}

DenseMatrix scalar_predictor(double x) { return from_rows({{x}}); }

// 1x1 model whose every level satisfies phi(X) = X(0,0), mapping the sign
// average through a {0,1} response scale: x > 0 predicts 1, else 0.
SignSeriesModel threshold_model(int H) {
  SignSeriesModel model;
  model.grid = LevelGrid(H);
  model.scale = ResponseScale{0.5, 0.5};
  model.d1 = 1;
  model.d2 = 1;
  model.p = 0;
  for (double level : model.grid.levels) {
    TraceFunction tf;
    tf.u = from_rows({{1.0}});
    tf.v = from_rows({{1.0}});
    tf.rank_budget = 1;
    tf.s1 = 1;
    tf.s2 = 1;
    tf.level = level;
    model.classifiers.push_back(tf);
  }
  return model;
}

FinitePoint deterministic_point(double mass, double y) {
  FinitePoint pt;
  pt.mass = mass;
  pt.y_dist = {{y, 1.0}};
  return pt;
}

}  // namespace

TEST_CASE("link values are exact at both branches") {
  CHECK(link_value(LinkKind::smooth, 0.0) == 0.0);
  CHECK(link_value(LinkKind::smooth, 2.0) == std::tanh(1.0));
  CHECK(link_value(LinkKind::smooth, -3.0) == std::tanh(-1.5));
  // mathematically inside (-1, 1); saturates to the bound in doubles
  CHECK(std::abs(link_value(LinkKind::smooth, 50.0)) <= 1.0);
  CHECK(std::abs(link_value(LinkKind::smooth, -50.0)) <= 1.0);
  CHECK(std::abs(link_value(LinkKind::smooth, 10.0)) < 1.0);

  CHECK(link_value(LinkKind::step, 0.5) == 0.6);
  CHECK(link_value(LinkKind::step, 1e-300) == 0.6);
  CHECK(link_value(LinkKind::step, -0.3) == -0.6);
  CHECK(link_value(LinkKind::step, 0.0) == -0.6);
}

TEST_CASE("normal quantile inverts the normal CDF to high accuracy") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));

  const double sqrt2 = std::sqrt(2.0);
  for (double p : {1e-8, 1e-4, 0.025, 0.2, 0.5, 0.7, 0.9, 0.999, 1.0 - 1e-9}) {
    double x = normal_quantile(p);
    double cdf = 0.5 * std::erfc(-x / sqrt2);
    CHECK(cdf == doctest::Approx(p).epsilon(1e-12));
  }
  // symmetry where 1 - p is exactly representable relative to the density
  for (double p : {1e-4, 0.025, 0.2, 0.4}) {
    CHECK(normal_quantile(1.0 - p) ==
          doctest::Approx(-normal_quantile(p)).epsilon(1e-10).scale(1.0));
  }

  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(2.0), std::invalid_argument);
}

TEST_CASE("hand-built truth evaluates the calibrated link exactly") {
  RegressionTruth step = hand_truth(LinkKind::step);
  // below every calibration draw: p = 0.5/4, z = 2p - 1 = -0.75
  CHECK(step.z_of(scalar_predictor(0.1)) == -0.75);
  CHECK(step.f(scalar_predictor(0.1)) == -0.6);
  // above every draw: p = 1 - 0.5/4
  CHECK(step.z_of(scalar_predictor(0.9)) == 0.75);
  CHECK(step.f(scalar_predictor(0.9)) == 0.6);
  // midpoint between the two central knots: p = 1/2, and z <= 0 maps low
  CHECK(step.z_of(scalar_predictor(0.5)) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(step.f(scalar_predictor(0.5)) == -0.6);
  // quarter of the way from 0.4 to 0.6: p = 0.375 + 0.25 * 0.25
  CHECK(step.z_of(scalar_predictor(0.45)) ==
        doctest::Approx(-0.125).epsilon(1e-12));

  RegressionTruth smooth = hand_truth(LinkKind::smooth);
  CHECK(std::abs(smooth.f(scalar_predictor(0.5))) < 1e-9);
  double prev = -2.0;
  for (double x = 0.05; x < 1.0; x += 0.05) {
    double fx = smooth.f(scalar_predictor(x));
    CHECK(fx >= prev);
    CHECK(std::abs(fx) < 1.0);
    prev = fx;
  }
}

TEST_CASE("regression generator validates its arguments") {
  CHECK_THROWS_AS(gen_regression(4, 3, 2, 10, ResponseKind::continuous,
                                 LinkKind::smooth, 0.1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_regression(4, 2, 5, 10, ResponseKind::continuous,
                                 LinkKind::smooth, 0.1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_regression(4, 0, 2, 10, ResponseKind::continuous,
                                 LinkKind::smooth, 0.1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_regression(4, 1, 2, 0, ResponseKind::continuous,
                                 LinkKind::smooth, 0.1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_regression(4, 1, 2, 10, ResponseKind::continuous,
                                 LinkKind::smooth, -0.1, 1),
                  std::invalid_argument);
}

TEST_CASE("generated regression data is deterministic, supported, in range") {
  RegressionSim sim = gen_regression(5, 2, 3, 12, ResponseKind::continuous,
                                     LinkKind::smooth, 0.1, 99);
  RegressionSim again = gen_regression(5, 2, 3, 12, ResponseKind::continuous,
                                       LinkKind::smooth, 0.1, 99);
  RegressionSim other = gen_regression(5, 2, 3, 12, ResponseKind::continuous,
                                       LinkKind::smooth, 0.1, 100);

  CHECK(sim.data.n() == 12);
  CHECK(sim.data.d1 == 5);
  CHECK(sim.data.d2 == 5);
  CHECK(sim.data.p == 0);
  CHECK(same_bits(sim.truth.B, again.truth.B));
  CHECK(sim.truth.calibration == again.truth.calibration);
  CHECK(sim.truth.calibration.size() == 100000);
  CHECK(std::is_sorted(sim.truth.calibration.begin(),
                       sim.truth.calibration.end()));

  bool any_differs = false;
  for (int i = 0; i < 12; ++i) {
    CHECK(same_bits(sim.data.samples[i].predictor,
                    again.data.samples[i].predictor));
    CHECK(sim.data.samples[i].response == again.data.samples[i].response);
    if (sim.data.samples[i].response != other.data.samples[i].response) {
      any_differs = true;
    }
    for (double x : sim.data.samples[i].predictor.values) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
  CHECK(any_differs);

  // coefficient support is the top-left 3x3 block
  bool block_nonzero = false;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i >= 3 || j >= 3) {
        CHECK(sim.truth.B(i, j) == 0.0);
      } else if (sim.truth.B(i, j) != 0.0) {
        block_nonzero = true;
      }
    }
  }
  CHECK(block_nonzero);
}

TEST_CASE("noiseless continuous responses equal the evaluable truth") {
  RegressionSim sim = gen_regression(4, 1, 2, 10, ResponseKind::continuous,
                                     LinkKind::smooth, 0.0, 7);
  for (const Sample& s : sim.data.samples) {
    double fx = sim.truth.f(s.predictor);
    CHECK(std::abs(fx) < 1.0);
    CHECK(sim.data.scale.to_raw(s.response) ==
          doctest::Approx(fx).epsilon(1e-12));
  }
}

TEST_CASE("binary responses are raw zero-one draws") {
  RegressionSim sim = gen_regression(4, 1, 2, 40, ResponseKind::binary,
                                     LinkKind::step, 0.0, 11);
  int ones = 0;
  for (const Sample& s : sim.data.samples) {
    double raw = sim.data.scale.to_raw(s.response);
    CHECK((raw == 0.0 || raw == 1.0));
    ones += raw == 1.0 ? 1 : 0;
  }
  CHECK(ones > 0);
  CHECK(ones < 40);
}

TEST_CASE("truth is monotone in the trace inner product") {
  RegressionSim sim = gen_regression(5, 2, 3, 1, ResponseKind::continuous,
                                     LinkKind::smooth, 0.0, 42);
  Rng rng(17);
  std::vector<DenseMatrix> draws;
  for (int k = 0; k < 20; ++k) draws.push_back(random_matrix(rng, 5, 5, 0, 1));
  std::sort(draws.begin(), draws.end(),
            [&](const DenseMatrix& a, const DenseMatrix& b) {
              return inner(a, sim.truth.B) < inner(b, sim.truth.B);
            });
  double prev = -2.0;
  for (const DenseMatrix& x : draws) {
    double fx = sim.truth.f(x);
    CHECK(fx >= prev);
    prev = fx;
  }

  RegressionSim step_sim = gen_regression(5, 2, 3, 1, ResponseKind::continuous,
                                          LinkKind::step, 0.0, 42);
  for (const DenseMatrix& x : draws) {
    double fx = step_sim.truth.f(x);
    CHECK((fx == 0.6 || fx == -0.6));
  }
}

TEST_CASE("network snapshots have binary labels and pattern-shaped means") {
  Dataset cross = gen_network_latent(8, NetworkPattern::cross, 0.0, 15, 5, 6);
  CHECK(cross.n() == 15);
  CHECK(cross.d1 == 8);
  CHECK(cross.d2 == 8);
  int ones = 0;
  for (const Sample& s : cross.samples) {
    double raw = cross.scale.to_raw(s.response);
    CHECK((raw == 0.0 || raw == 1.0));
    ones += raw == 1.0 ? 1 : 0;
    // noise-free cells outside both bands are exactly zero
    CHECK(s.predictor(0, 0) == 0.0);
    CHECK(s.predictor(7, 6) == 0.0);
    // the horizontal band claims the overlap, so its rows are constant
    CHECK(s.predictor(3, 0) == s.predictor(3, 7));
    CHECK(s.predictor(3, 3) == s.predictor(3, 0));
    // two distinct row patterns: exact rank at most two
    CHECK(numerical_rank(s.predictor, 1e-10) <= 2);
  }
  CHECK(ones > 0);
  CHECK(ones < 15);

  Dataset block = gen_network_latent(8, NetworkPattern::block, 0.0, 10, 8, 9);
  for (const Sample& s : block.samples) {
    CHECK(s.predictor(0, 7) == 0.0);
    CHECK(s.predictor(7, 0) == 0.0);
    CHECK(numerical_rank(s.predictor, 1e-10) <= 2);
  }

  // noisy star / circle snapshots: smoke shape plus bitwise determinism
  for (NetworkPattern pattern :
       {NetworkPattern::star, NetworkPattern::circle}) {
    Dataset a = gen_network_latent(9, pattern, 0.3, 3, 12, 13);
    Dataset b = gen_network_latent(9, pattern, 0.3, 3, 12, 13);
    Dataset c = gen_network_latent(9, pattern, 0.3, 3, 99, 13);
    bool differs = false;
    for (int i = 0; i < 3; ++i) {
      CHECK(same_bits(a.samples[i].predictor, b.samples[i].predictor));
      CHECK(a.samples[i].response == b.samples[i].response);
      if (!same_bits(a.samples[i].predictor, c.samples[i].predictor)) {
        differs = true;
      }
    }
    CHECK(differs);
  }

  CHECK_THROWS_AS(gen_network_latent(7, NetworkPattern::cross, 0.1, 5, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_network_latent(8, NetworkPattern::cross, -0.1, 5, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_network_latent(8, NetworkPattern::cross, 0.1, 0, 1, 2),
                  std::invalid_argument);
}

TEST_CASE("fixture matrices match their closed forms") {
  DenseMatrix banded = gen_banded(3);
  CHECK(same_bits(banded, from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}})));

  DenseMatrix eye = gen_identity(4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(eye(i, j) == (i == j ? 1.0 : 0.0));
    }
  }

  DenseMatrix graphon = gen_max_graphon(10);
  CHECK(graphon(0, 0) == std::log1p(0.1));
  CHECK(graphon(9, 0) == std::log1p(1.0));
  CHECK(graphon(0, 9) == std::log1p(1.0));
  CHECK(graphon(4, 7) == std::log1p(0.8));
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      CHECK(graphon(i, j) == graphon(j, i));
    }
  }

  DenseMatrix zero(3, 3, 0.0);
  DenseMatrix half = gen_monotone_transform(zero, 2.0);
  for (double v : half.values) CHECK(v == 0.5);
  DenseMatrix squashed = gen_monotone_transform(banded, 1.5);
  CHECK(squashed(0, 1) > squashed(0, 0));
  CHECK(squashed(0, 2) > squashed(0, 1));
  for (double v : squashed.values) {
    CHECK(v >= 0.5);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(gen_monotone_transform(zero, 0.0), std::invalid_argument);
}

TEST_CASE("block-constant fixture keeps balanced shuffled blocks") {
  std::vector<double> means = {0.1, 0.2, 0.3, 0.4};
  DenseMatrix m = gen_sbm(6, 2, means, 21);
  DenseMatrix again = gen_sbm(6, 2, means, 21);
  CHECK(same_bits(m, again));

  for (double v : m.values) {
    CHECK((v == 0.1 || v == 0.2 || v == 0.3 || v == 0.4));
  }
  // two row groups of three identical rows each
  std::set<std::vector<double>> distinct_rows;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> row(6);
    for (int j = 0; j < 6; ++j) row[j] = m(i, j);
    distinct_rows.insert(row);
  }
  CHECK(distinct_rows.size() == 2);
  CHECK(numerical_rank(m, 1e-10) <= 2);

  DenseMatrix flat = gen_sbm(5, 1, {0.7}, 3);
  for (double v : flat.values) CHECK(v == 0.7);

  CHECK_THROWS_AS(gen_sbm(5, 0, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_sbm(3, 4, std::vector<double>(16, 0.0), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_sbm(4, 2, {0.1, 0.2}, 1), std::invalid_argument);
}

TEST_CASE("max graphon is numerically full rank yet sign-flat at rank two") {
  DenseMatrix m = gen_max_graphon(10);
  CHECK(numerical_rank(m, 1e-12) == 10);

  // every level's sign matrix is a corner square against a constant field
  auto [unit, scale] = rescale_responses(m.values);
  for (double level : LevelGrid(5).levels) {
    DenseMatrix s(10, 10);
    for (std::size_t k = 0; k < unit.size(); ++k) {
      s.values[k] = unit[k] - level > 0.0 ? 1.0 : -1.0;
    }
    CHECK(numerical_rank(s, 1e-10) <= 2);
  }
}

TEST_CASE("numerical rank thresholds the singular value tail") {
  Rng rng(31);
  DenseMatrix u = random_matrix(rng, 6, 2);
  DenseMatrix v = random_matrix(rng, 5, 2);
  DenseMatrix prod(6, 5);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 5; ++j) {
      prod(i, j) = u(i, 0) * v(j, 0) + u(i, 1) * v(j, 1);
    }
  }
  CHECK(numerical_rank(prod, 1e-8) == 2);

  CHECK(numerical_rank(DenseMatrix(4, 4, 0.0), 0.01) == 0);
  CHECK(numerical_rank(gen_identity(5), 0.01) == 5);

  DenseMatrix diag = from_rows(
      {{10.0, 0.0, 0.0}, {0.0, 10.0, 0.0}, {0.0, 0.0, 1e-4}});
  CHECK(numerical_rank(diag, 0.01) == 2);
  CHECK(numerical_rank(diag, 1e-9) == 3);

  CHECK_THROWS_AS(numerical_rank(diag, 0.0), std::invalid_argument);
}

TEST_CASE("finite predictor spaces validate masses and distributions") {
  FinitePoint pt;
  pt.mass = 0.4;
  pt.y_dist = {{1.0, 0.25}, {-1.0, 0.75}};
  CHECK(pt.conditional_mean() == doctest::Approx(-0.5).epsilon(1e-15));

  FinitePredictorSpace good;
  good.points = {deterministic_point(0.4, 0.5), deterministic_point(0.6, -1.0)};
  CHECK_NOTHROW(good.validate());

  FinitePredictorSpace empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  FinitePredictorSpace bad_mass = good;
  bad_mass.points[0].mass = 0.3;
  CHECK_THROWS_AS(bad_mass.validate(), std::invalid_argument);

  FinitePredictorSpace bad_prob = good;
  bad_prob.points[0].y_dist = {{0.5, 0.7}, {0.1, 0.7}};
  CHECK_THROWS_AS(bad_prob.validate(), std::invalid_argument);

  FinitePredictorSpace no_dist = good;
  no_dist.points[1].y_dist.clear();
  CHECK_THROWS_AS(no_dist.validate(), std::invalid_argument);
}

TEST_CASE("level risk is zero at aligned signs and grows by flipped mass") {
  FinitePredictorSpace space;
  space.points = {deterministic_point(0.3, 0.5),
                  deterministic_point(0.5, -0.25),
                  deterministic_point(0.2, 0.75)};

  CHECK(brute_force_level_risk(space, 0.0, {1, -1, 1}) == 0.0);
  CHECK(brute_force_level_risk(space, 0.0, {-1, -1, 1}) == 0.3 * 0.5);

  // every response sits below level one, so the all-low assignment is free
  CHECK(brute_force_level_risk(space, 1.0, {-1, -1, -1}) == 0.0);
  double all_high = brute_force_level_risk(space, 1.0, {1, 1, 1});
  CHECK(all_high ==
        doctest::Approx(0.3 * 0.5 + 0.5 * 1.25 + 0.2 * 0.25).epsilon(1e-14));

  CHECK_THROWS_AS(brute_force_level_risk(space, 0.0, {1, -1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(brute_force_level_risk(space, 0.0, {1, 0, -1}),
                  std::invalid_argument);
}

TEST_CASE("exhaustive sign search is minimized by the conditional-mean rule") {
  Rng rng(77);
  for (int trial = 0; trial < 12; ++trial) {
    int m = 2 + static_cast<int>(rng.uniform_index(4));
    FinitePredictorSpace space;
    double mass_total = 0.0;
    for (int k = 0; k < m; ++k) {
      FinitePoint pt;
      pt.mass = rng.uniform(0.05, 1.0);
      mass_total += pt.mass;
      int support = 1 + static_cast<int>(rng.uniform_index(3));
      double p_total = 0.0;
      for (int s = 0; s < support; ++s) {
        double p = rng.uniform(0.05, 1.0);
        pt.y_dist.push_back({rng.uniform(-1.0, 1.0), p});
        p_total += p;
      }
      for (auto& value_prob : pt.y_dist) value_prob.second /= p_total;
      space.points.push_back(std::move(pt));
    }
    for (FinitePoint& pt : space.points) pt.mass /= mass_total;
    space.validate();

    for (double level : LevelGrid(2).levels) {
      double best = std::numeric_limits<double>::infinity();
      for (int bits = 0; bits < (1 << m); ++bits) {
        std::vector<int> signs(m);
        for (int k = 0; k < m; ++k) signs[k] = (bits >> k) & 1 ? 1 : -1;
        best = std::min(best, brute_force_level_risk(space, level, signs));
      }
      std::vector<int> rule(m);
      for (int k = 0; k < m; ++k) {
        rule[k] = sgn(space.points[k].conditional_mean() - level);
      }
      double rule_risk = brute_force_level_risk(space, level, rule);
      CHECK(rule_risk <= best + 1e-12);
      CHECK(best <= rule_risk);
    }
  }
}

TEST_CASE("hard imputation reproduces exactly low-rank structure") {
  // rank-one raw matrix with a wide value range
  DenseMatrix m(4, 3);
  std::vector<double> ucol = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> vcol = {0.5, -0.25, 1.0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = ucol[i] * vcol[j];
  }

  ObservedMatrix full = sample_observed(m, 1.0, 2);
  DenseMatrix back = svd_impute_baseline(full, 1, 3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(back(i, j) == doctest::Approx(m(i, j)).epsilon(1e-8).scale(1.0));
    }
  }

  // full-dimensional truncation changes nothing
  DenseMatrix identity_fit = svd_impute_baseline(full, 3, 0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(identity_fit(i, j) ==
            doctest::Approx(m(i, j)).epsilon(1e-12).scale(1.0));
    }
  }

  // a single missing entry of a rank-one matrix is recovered by iteration
  std::vector<ObservedEntry> holes;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == 2 && j == 1) continue;
      holes.push_back({i, j, m(i, j)});
    }
  }
  ObservedMatrix partial = make_observed(4, 3, holes);
  DenseMatrix recovered = svd_impute_baseline(partial, 1, 80);
  CHECK(recovered(2, 1) == doctest::Approx(m(2, 1)).epsilon(1e-6).scale(1.0));

  ObservedMatrix none;
  none.d1 = 2;
  none.d2 = 2;
  none.scale = ResponseScale{0.0, 1.0};
  CHECK_THROWS_AS(svd_impute_baseline(none, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(svd_impute_baseline(full, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(svd_impute_baseline(full, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(svd_impute_baseline(full, 1, -1), std::invalid_argument);
}

TEST_CASE("soft imputation interpolates between exact and all-zero fits") {
  DenseMatrix m(3, 3);
  Rng rng(41);
  for (double& x : m.values) x = rng.uniform(-2.0, 2.0);
  ObservedMatrix full = sample_observed(m, 1.0, 4);

  DenseMatrix exact = soft_impute_baseline(full, 0.0, 0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(exact(i, j) == doctest::Approx(m(i, j)).epsilon(1e-8).scale(1.0));
    }
  }

  // a threshold above every singular value zeroes the final fit
  DenseMatrix crushed = soft_impute_baseline(full, 1e6, 2);
  for (double v : crushed.values) CHECK(v == 0.0);

  CHECK_THROWS_AS(soft_impute_baseline(full, -0.5, 2), std::invalid_argument);
}

TEST_CASE("duplicate observations are reset to their entry mean") {
  std::vector<ObservedEntry> raw = {
      {0, 0, 0.4}, {0, 0, 0.6}, {0, 1, 1.0}, {1, 0, -1.0}, {1, 1, 0.0}};
  ObservedMatrix obs = make_observed(2, 2, raw);
  DenseMatrix fit = svd_impute_baseline(obs, 2, 0);
  CHECK(fit(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(fit(1, 1) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
}

TEST_CASE("observation sampling is exact in count, values, and seed") {
  DenseMatrix truth = gen_banded(4);

  ObservedMatrix half = sample_observed(truth, 0.5, 9);
  CHECK(half.entries.size() == 8);
  for (std::size_t k = 0; k < half.entries.size(); ++k) {
    const ObservedEntry& e = half.entries[k];
    CHECK(half.scale.to_raw(e.y) ==
          doctest::Approx(truth(e.i, e.j)).epsilon(1e-12).scale(1.0));
    if (k > 0) {
      const ObservedEntry& prev = half.entries[k - 1];
      CHECK(prev.i * 4 + prev.j < e.i * 4 + e.j);
    }
  }

  ObservedMatrix again = sample_observed(truth, 0.5, 9);
  REQUIRE(again.entries.size() == half.entries.size());
  for (std::size_t k = 0; k < half.entries.size(); ++k) {
    CHECK(again.entries[k].i == half.entries[k].i);
    CHECK(again.entries[k].j == half.entries[k].j);
    CHECK(again.entries[k].y == half.entries[k].y);
  }
  ObservedMatrix other = sample_observed(truth, 0.5, 10);
  bool differs = false;
  for (std::size_t k = 0; k < other.entries.size(); ++k) {
    if (other.entries[k].i != half.entries[k].i ||
        other.entries[k].j != half.entries[k].j) {
      differs = true;
    }
  }
  CHECK(differs);

  ObservedMatrix everything = sample_observed(truth, 1.0, 1);
  CHECK(everything.entries.size() == 16);
  for (int k = 0; k < 16; ++k) {
    CHECK(everything.entries[k].i == k / 4);
    CHECK(everything.entries[k].j == k % 4);
  }

  // rounding picks the nearest count, and tiny fractions keep one entry
  CHECK(sample_observed(gen_banded(3), 0.3, 2).entries.size() == 3);
  CHECK(sample_observed(truth, 0.001, 2).entries.size() == 1);

  CHECK_THROWS_AS(sample_observed(truth, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_observed(truth, 1.5, 1), std::invalid_argument);
}

TEST_CASE("Monte Carlo L1 error measures function distance") {
  PointFunction corner = [](const DenseMatrix& x) {
    return 2.0 * x(0, 0) - 1.0;
  };
  PointFunction shifted = [&](const DenseMatrix& x) {
    return corner(x) + 0.05;
  };
  PointFunction flat = [](const DenseMatrix&) { return 0.0; };

  CHECK(l1_error(corner, corner, 1, 1, 1000, 5) == 0.0);
  CHECK(l1_error(shifted, corner, 2, 2, 1000, 5) ==
        doctest::Approx(0.05).epsilon(1e-12));
  // E|2U - 1| = 1/2 for U uniform on [0, 1]
  CHECK(l1_error(flat, corner, 1, 1, 100000, 6) ==
        doctest::Approx(0.5).epsilon(0.04));
  CHECK_THROWS_AS(l1_error(flat, corner, 1, 1, 0, 5), std::invalid_argument);
}

TEST_CASE("model L1 error matches the generic path and rejects covariates") {
  SignSeriesModel model = threshold_model(2);
  RegressionTruth truth = hand_truth(LinkKind::step);

  double via_model = l1_error(model, truth, 500, 9);
  double via_functions = l1_error(
      [&](const DenseMatrix& x) { return predict(model, x, {}); },
      [&](const DenseMatrix& x) { return truth.f(x); }, 1, 1, 500, 9);
  CHECK(via_model == via_functions);

  SignSeriesModel with_covariates = model;
  with_covariates.p = 1;
  CHECK_THROWS_AS(l1_error(with_covariates, truth, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("misclassification at one half counts threshold disagreements") {
  SignSeriesModel model = threshold_model(1);
  // predictions: x > 0 maps to 1, x <= 0 maps to 0
  std::vector<DenseMatrix> preds = {scalar_predictor(0.7),
                                    scalar_predictor(-0.7),
                                    scalar_predictor(0.4)};
  Dataset test = make_dataset(preds, {}, {1.0, 1.0, 0.0});
  CHECK(misclassification_at_half(model, test) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  Dataset agree = make_dataset({scalar_predictor(0.9)}, {}, {1.0});
  CHECK(misclassification_at_half(model, agree) == 0.0);

  Dataset empty;
  CHECK_THROWS_AS(misclassification_at_half(model, empty),
                  std::invalid_argument);
}
