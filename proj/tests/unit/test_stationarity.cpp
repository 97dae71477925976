#include <doctest.h>

#include <cmath>

#include "nonstat/errors.hpp"
#include "nonstat/linalg.hpp"
#include "nonstat/rng.hpp"
#include "nonstat/ssa.hpp"
#include "nonstat/stationarity.hpp"
#include "nonstat/synthgen.hpp"

#include "exact_moments.hpp"

using namespace nonstat;

TEST_CASE("chi squared survival function matches reference values") {
  struct Row {
    double x;
    int k;
    double sf;
  };
  // Reference values from an independent implementation of the regularized
  // incomplete gamma function.
  const Row rows[] = {
      {0.5, 1, 0.47950012218695337},
      {1.0, 1, 0.31731050786291115},
      {2.706, 1, 0.099971378125258831},
      {3.841, 1, 0.050013683763956804},
      {3.841458820694124, 1, 0.049999999999999892},
      {5.0, 2, 0.0820849986238988},
      {10.0, 4, 0.040427681994512792},
      {100.0, 80, 0.064570368921133006},
      {810.0, 810, 0.49339204276001036},
      {900.0, 810, 0.014828098471533109},
      {0.01, 10, 0.99999999999997402},
      {250.0, 200, 0.0093791316688260976},
  };
  for (const Row& r : rows)
    CHECK(chi2_sf(r.x, r.k) == doctest::Approx(r.sf).epsilon(1e-10));
  CHECK(chi2_sf(0.0, 5) == 1.0);
  CHECK(chi2_sf(1e4, 3) < 1e-100);
  CHECK_THROWS_AS(chi2_sf(-1.0, 2), DomainError);
  CHECK_THROWS_AS(chi2_sf(1.0, 0), DomainError);
}

TEST_CASE("chi squared quantile example near the usual 5 percent cut") {
  CHECK(chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
}

TEST_CASE("degrees of freedom of the test") {
  CHECK(dof(200, 1) == 400);
  CHECK(dof(2, 2) == 10);
  CHECK(dof(30, 6) == 810);
  CHECK_THROWS_AS(dof(0, 3), DomainError);
  CHECK_THROWS_AS(dof(5, 0), DomainError);
}

TEST_CASE("likelihood ratio statistic of a worked example") {
  EpochStats stats;
  GaussianParams g;
  g.mean = Eigen::VectorXd::Zero(1);
  g.cov = Eigen::MatrixXd::Constant(1, 1, 2.0);
  stats.epochs.push_back(g);
  stats.counts.push_back(100);
  // 100 (-log 2 + 0 + 2) - 100
  CHECK(lr_statistic(stats) ==
        doctest::Approx(100.0 * (1.0 - std::log(2.0))).epsilon(1e-12));
  // epoch-count constant instead: subtract d * n_epochs = 1
  CHECK(lr_statistic(stats, LrConstant::EpochCount) ==
        doctest::Approx(100.0 * (2.0 - std::log(2.0)) - 1.0).epsilon(1e-12));
}

TEST_CASE("statistic is zero for exactly standardized epochs") {
  Rng rng(23);
  const int n_epochs = 5, len = 40, D = 3;
  TimeSeries ts;
  ts.data.resize(n_epochs * len, D);
  for (int e = 0; e < n_epochs; ++e) {
    Eigen::MatrixXd block = rng.normal_matrix(len, D);
    block.rowwise() -= block.colwise().mean();
    const Eigen::MatrixXd cov =
        block.transpose() * block / static_cast<double>(len - 1);
    ts.data.middleRows(e * len, len) = block * sym_inverse_sqrt(cov);
  }
  const EpochStats stats = epoch_moments(ts, partition_epochs(ts, n_epochs));
  CHECK(std::abs(lr_statistic(stats)) < 1e-8);
  const LrTestResult res = lr_test(stats);
  CHECK(res.dof == dof(n_epochs, D));
  CHECK(res.p_value > 0.999999);
}

TEST_CASE("statistic is nonnegative after average epoch whitening") {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    synth::CpdSpec spec;
    spec.D = 4;
    spec.d_s = 2;
    spec.d_n = 2;
    spec.n_epochs = 10;
    spec.epoch_len = 50;
    spec.seed = 100 + trial;
    auto [ts, truth] = synth::gen_cpd_dataset(spec);
    const EpochPartition part = partition_epochs(ts, spec.n_epochs);
    const TimeSeries white = apply(whitening_transform(ts, part), ts);
    const EpochStats stats = epoch_moments(white, part);
    CHECK(lr_statistic(stats) >= -1e-9);
  }
}

TEST_CASE("dimension selection finds the stationary subspace size") {
  // Exact in-sample moments: two mixed-in directions are perfectly
  // stationary, so the d_s = 2 statistic is numerically zero while any third
  // direction must carry a drifting moment and be rejected outright.
  Rng rng(2024);
  auto [ts, mixing] = testutil::exact_split_series(rng);

  ssa::Config cfg;
  cfg.restarts = 3;
  cfg.max_iterations = 300;
  cfg.gradient_tolerance = 1e-7;
  cfg.seed = 5;
  const DsSelection sel = select_ds(ts, 6, 0.05, cfg);
  REQUIRE(sel.per_ds.size() == 3);
  CHECK(sel.chosen_ds == 2);
  CHECK(sel.per_ds[0].p_value > 0.99);
  CHECK(sel.per_ds[1].p_value > 0.99);
  CHECK(sel.per_ds[2].p_value < 1e-8);
}

TEST_CASE("dimension selection works on sampled data") {
  synth::CpdSpec spec;
  spec.D = 4;
  spec.d_s = 2;
  spec.d_n = 2;
  spec.q = 5.0;
  spec.n_epochs = 80;
  spec.epoch_len = 150;
  spec.seed = 9;
  auto [ts, truth] = synth::gen_cpd_dataset(spec);

  ssa::Config cfg;
  cfg.restarts = 3;
  cfg.max_iterations = 250;
  cfg.gradient_tolerance = 1e-5;
  cfg.seed = 17;
  const DsSelection sel = select_ds(ts, spec.n_epochs, 0.05, cfg);
  REQUIRE(sel.per_ds.size() == 3);
  CHECK(sel.chosen_ds == 2);
  // the accepted dimension passes, one more fails
  CHECK(sel.per_ds[1].p_value >= 0.05);
  CHECK(sel.per_ds[2].p_value < 0.05);
}

TEST_CASE("dimension selection validates its arguments") {
  TimeSeries ts;
  Rng rng(4);
  ts.data = rng.normal_matrix(300, 3);
  ssa::Config cfg;
  CHECK_THROWS_AS(select_ds(ts, 5, 0.0, cfg), DomainError);
  CHECK_THROWS_AS(select_ds(ts, 5, 1.0, cfg), DomainError);
  TimeSeries flat;
  flat.data = rng.normal_matrix(300, 1);
  CHECK_THROWS_AS(select_ds(flat, 5, 0.05, cfg), InvalidDimension);
}

TEST_CASE("held out nonstationarity score flags a strongly moving source") {
  // One source with a drifting mean among otherwise stationary sources.
  Rng rng(31);
  const int T = 2000, D = 4;
  TimeSeries ts;
  ts.data = rng.normal_matrix(T, D);
  for (int t = 0; t < T; ++t)
    ts.data(t, 0) += 3.0 * std::sin(t * 2.0 * 3.141592653589793 / 500.0);
  ts.data = ts.data * random_orthogonal(D, rng).transpose();

  ssa::Config cfg;
  cfg.restarts = 2;
  cfg.max_iterations = 150;
  cfg.gradient_tolerance = 1e-5;
  cfg.seed = 9;
  const double score = bnise(ts, 2, 8, cfg);
  CHECK(score >= 5.0);
}

TEST_CASE("held out nonstationarity score stays small on stationary data") {
  Rng rng(37);
  TimeSeries ts;
  ts.data = rng.normal_matrix(2000, 4);
  ssa::Config cfg;
  cfg.restarts = 2;
  cfg.max_iterations = 150;
  cfg.gradient_tolerance = 1e-5;
  cfg.seed = 9;
  const double score = bnise(ts, 2, 8, cfg);
  CHECK(std::abs(score) < 5.0);
}

TEST_CASE("held out score validates arguments") {
  Rng rng(4);
  TimeSeries ts;
  ts.data = rng.normal_matrix(400, 3);
  ssa::Config cfg;
  CHECK_THROWS_AS(bnise(ts, 0, 5, cfg), InvalidDimension);
  CHECK_THROWS_AS(bnise(ts, 3, 5, cfg), InvalidDimension);
  CHECK_THROWS_AS(bnise(ts, 1, 1, cfg), InvalidArgument);
}
