#include <doctest.h>

#include <cmath>

#include "nonstat/errors.hpp"
#include "nonstat/eval.hpp"
#include "nonstat/rng.hpp"
#include "nonstat/ssa.hpp"
#include "nonstat/stats.hpp"
#include "nonstat/synthgen.hpp"

#include "exact_moments.hpp"

using namespace nonstat;

namespace {

EpochStats single_epoch_stats(double mean, double var) {
  EpochStats stats;
  GaussianParams g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.cov = Eigen::MatrixXd::Constant(1, 1, var);
  stats.epochs.push_back(g);
  stats.counts.push_back(100);
  return stats;
}

}  // namespace

TEST_CASE("projected loss of a worked example") {
  const EpochStats stats = single_epoch_stats(0.5, 1.0);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(1, 1);
  CHECK(ssa::ssa_loss(B, stats) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("loss vanishes exactly at the null") {
  EpochStats stats;
  for (int e = 0; e < 4; ++e) {
    GaussianParams g;
    g.mean = Eigen::VectorXd::Zero(3);
    g.cov = Eigen::MatrixXd::Identity(3, 3);
    stats.epochs.push_back(g);
    stats.counts.push_back(50);
  }
  Rng rng(3);
  const Eigen::MatrixXd R = random_orthogonal(3, rng);
  CHECK(ssa::ssa_loss(R.topRows(2), stats) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("loss gradient agrees with finite differences") {
  Rng rng(41);
  EpochStats stats;
  for (int e = 0; e < 3; ++e) {
    GaussianParams g;
    g.mean = 0.3 * rng.normal_vector(4);
    const Eigen::MatrixXd a = rng.normal_matrix(4, 4);
    g.cov = a * a.transpose() / 4.0 + Eigen::MatrixXd::Identity(4, 4);
    stats.epochs.push_back(g);
    stats.counts.push_back(60);
  }
  Eigen::MatrixXd B = rng.normal_matrix(2, 4);
  const Eigen::MatrixXd G = ssa::ssa_loss_gradient(B, stats);
  const double h = 1e-6;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) {
      Eigen::MatrixXd Bp = B, Bm = B;
      Bp(r, c) += h;
      Bm(r, c) -= h;
      const double fd =
          (ssa::ssa_loss(Bp, stats) - ssa::ssa_loss(Bm, stats)) / (2.0 * h);
      CHECK(G(r, c) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("stationary projection recovers the true subspace exactly") {
  // Sample moments equal the population moments by construction, so the loss
  // minimum sits exactly on the mixed-in stationary pair and the optimizer
  // must land there up to its own tolerance, not up to sampling noise.
  Rng rng(2024);
  auto [ts, mixing] = testutil::exact_split_series(rng);

  ssa::Config cfg;
  cfg.restarts = 3;
  cfg.seed = 7;
  const ssa::Solution sol = ssa::find_stationary(ts, 2, 6, cfg);
  REQUIRE(sol.projection.d == 2);
  CHECK(sol.projection.kind == ssa::Kind::Stationary);

  // Identical projected moments give a loss of exactly zero at the optimum.
  CHECK(sol.loss < 1e-8);

  // The estimated projection acts on whitened data; its data-space rows must
  // span the same subspace as the true stationary extractor's rows.
  const Eigen::MatrixXd data_basis = sol.projection.basis() * sol.whitening.W;
  const double angle =
      eval::subspace_angle(data_basis.transpose(), mixing.leftCols(2));
  CHECK(angle * 180.0 / 3.141592653589793 < 0.01);

  // Maximizing instead must land on the orthogonal complement.
  const ssa::Solution ns = ssa::find_most_nonstationary(ts, 2, 6, cfg);
  const Eigen::MatrixXd ns_basis = ns.projection.basis() * ns.whitening.W;
  const double ns_angle =
      eval::subspace_angle(ns_basis.transpose(), mixing.rightCols(2));
  CHECK(ns_angle * 180.0 / 3.141592653589793 < 0.01);

  // Rows orthonormal, and the complement spans the rest.
  const Eigen::MatrixXd R = sol.projection.rotation;
  CHECK((R * R.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("stationary projection is close on sampled data") {
  // With genuinely sampled epochs the optimum sits a finite-sample distance
  // from the truth; this pins realistic behavior at a statistically honest
  // tolerance (the acceptance suite covers accuracy over many realizations).
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
  cfg.seed = 11;
  const ssa::Solution sol = ssa::find_stationary(ts, 2, spec.n_epochs, cfg);
  const Eigen::MatrixXd data_basis = sol.projection.basis() * sol.whitening.W;
  const double angle = eval::subspace_angle(
      data_basis.transpose(), truth.stationary_basis.transpose());
  CHECK(angle * 180.0 / 3.141592653589793 < 8.0);
}

TEST_CASE("nonstationary projection beats random projections") {
  synth::CpdSpec spec;
  spec.D = 5;
  spec.d_s = 3;
  spec.d_n = 2;
  spec.q = 2.5;
  spec.n_epochs = 20;
  spec.epoch_len = 100;
  spec.seed = 8;
  auto [ts, truth] = synth::gen_cpd_dataset(spec);

  ssa::Config cfg;
  cfg.restarts = 3;
  cfg.seed = 2;
  const ssa::Solution sol = ssa::find_most_nonstationary(ts, 2, spec.n_epochs, cfg);
  CHECK(sol.projection.kind == ssa::Kind::NonStationary);

  const TimeSeries white = apply(sol.whitening, ts);
  const EpochStats stats =
      epoch_moments(white, partition_epochs(white, spec.n_epochs));
  const double best = ssa::ssa_loss(sol.projection.basis(), stats);
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd Q = random_orthogonal(5, rng);
    CHECK(best >= ssa::ssa_loss(Q.topRows(2), stats) - 1e-9);
  }
}

TEST_CASE("optimization is invariant to rotations of the input basis") {
  synth::CpdSpec spec;
  spec.D = 4;
  spec.d_s = 2;
  spec.d_n = 2;
  spec.n_epochs = 12;
  spec.epoch_len = 80;
  spec.seed = 21;
  auto [ts, truth] = synth::gen_cpd_dataset(spec);

  ssa::Config cfg;
  cfg.restarts = 3;
  cfg.seed = 7;
  const double base_loss = ssa::find_stationary(ts, 2, spec.n_epochs, cfg).loss;
  Rng rng(55);
  for (int trial = 0; trial < 3; ++trial) {
    TimeSeries rotated = ts;
    rotated.data = ts.data * random_orthogonal(4, rng);  // x -> Q^T x per row
    const double rot_loss =
        ssa::find_stationary(rotated, 2, spec.n_epochs, cfg).loss;
    CHECK(rot_loss == doctest::Approx(base_loss).epsilon(1e-4));
  }
}

TEST_CASE("per restart losses are reported and the best one wins") {
  synth::CpdSpec spec;
  spec.D = 4;
  spec.d_s = 2;
  spec.d_n = 2;
  spec.n_epochs = 10;
  spec.epoch_len = 60;
  spec.seed = 30;
  auto [ts, truth] = synth::gen_cpd_dataset(spec);
  ssa::Config cfg;
  cfg.restarts = 4;
  cfg.seed = 1;
  const ssa::Solution sol = ssa::find_stationary(ts, 1, spec.n_epochs, cfg);
  REQUIRE(sol.per_restart_losses.size() == 4);
  double best = sol.per_restart_losses[0];
  for (double l : sol.per_restart_losses) best = std::min(best, l);
  CHECK(sol.loss == doctest::Approx(best).epsilon(1e-12));
  CHECK(sol.iterations_used > 0);
}

TEST_CASE("observer sees an orthonormal rotation at every iteration") {
  synth::CpdSpec spec;
  spec.D = 4;
  spec.d_s = 2;
  spec.d_n = 2;
  spec.n_epochs = 10;
  spec.epoch_len = 60;
  spec.seed = 14;
  auto [ts, truth] = synth::gen_cpd_dataset(spec);
  const TimeSeries white =
      apply(whitening_transform(ts, partition_epochs(ts, spec.n_epochs)), ts);
  const EpochStats stats =
      epoch_moments(white, partition_epochs(white, spec.n_epochs));

  ssa::Config cfg;
  cfg.restarts = 2;
  int calls = 0;
  double worst = 0.0;
  const auto observer = [&](int, const Eigen::MatrixXd& R) {
    ++calls;
    worst = std::max(worst, (R * R.transpose() -
                             Eigen::MatrixXd::Identity(R.rows(), R.rows()))
                                .cwiseAbs()
                                .maxCoeff());
  };
  ssa::optimize(stats, 2, ssa::Kind::Stationary, cfg, observer);
  CHECK(calls > 2);
  CHECK(worst < 1e-8);
}

TEST_CASE("random projection is orthonormal and reproducible") {
  const ssa::Projection p = ssa::random_projection(5, 2, 123);
  CHECK(p.kind == ssa::Kind::Random);
  CHECK(p.d == 2);
  CHECK((p.rotation * p.rotation.transpose() - Eigen::MatrixXd::Identity(5, 5))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  const ssa::Projection q = ssa::random_projection(5, 2, 123);
  CHECK((p.rotation - q.rotation).cwiseAbs().maxCoeff() == 0.0);
  const ssa::Projection r = ssa::random_projection(5, 2, 124);
  CHECK((p.rotation - r.rotation).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("projecting keeps labels and partition") {
  TimeSeries ts;
  Rng rng(2);
  ts.data = rng.normal_matrix(40, 3);
  ts.labels.assign(40, 1);
  EpochPartition part;
  part.ranges = {{0, 20}, {20, 40}};
  ts.partition = part;
  const TimeSeries out = ssa::project(ssa::random_projection(3, 2, 4), ts);
  CHECK(out.D() == 2);
  CHECK(out.T() == 40);
  CHECK(out.labels.size() == 40);
  REQUIRE(out.partition.has_value());
  CHECK(out.partition->n_epochs() == 2);
}

TEST_CASE("dimension arguments are validated") {
  TimeSeries ts;
  Rng rng(2);
  ts.data = rng.normal_matrix(100, 3);
  ssa::Config cfg;
  CHECK_THROWS_AS(ssa::find_stationary(ts, 0, 5, cfg), InvalidDimension);
  CHECK_THROWS_AS(ssa::find_stationary(ts, 3, 5, cfg), InvalidDimension);
}
