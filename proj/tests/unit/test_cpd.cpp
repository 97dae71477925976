#include <doctest.h>

#include <cmath>
#include <vector>

#include "nonstat/cpd.hpp"
#include "nonstat/errors.hpp"
#include "nonstat/rng.hpp"
#include "nonstat/stats.hpp"

using namespace nonstat;

namespace {

// 100-sample reference signal: 60 unit-variance draws followed by 40 draws
// with variance 9. The expected detection below was computed with an
// independent implementation of the same detector and is pinned bit-for-bit.
const std::vector<double>& reference_signal() {
  static const std::vector<double> sig = {
      -0.98912135034785087, -0.3677866514678832, 1.2879252612892487,
      0.19397441913261321, 0.92023089963985694, 0.57710379125725131,
      -0.63646364637098052, 0.54195222041029334, -0.31659545116581611,
      -0.32238911615896015, 0.097167318670457192, -1.5259304065189514,
      1.1921661041016585, -0.67108967517410956, 1.0002694196594604,
      0.13632112385311751, 1.5320330796287964, -0.65996941379182072,
      -0.31179485646991756, 0.33776912655882602, -2.2074710981998042,
      0.82792144155873693, 1.541630394690618, 1.1268067932650281,
      0.7547696443122508, -0.14597789311522394, 1.2819022270597127,
      1.0740306219719435, 0.39262084457727114, 0.0051143128289828184,
      -0.36176687216092318, -1.2302321954904449, 1.2262292928211507,
      -2.1720438866851817, -0.37014734585231535, 0.16438006967466792,
      0.85988118461273677, 1.7616612365118109, 0.99332377595181098,
      -0.29152142609843873, 0.72812755788914274, -1.2616003169196963,
      1.4299385266887068, -0.15647532482940535, -0.67375914998705755,
      -0.63906010043220518, -0.061361327620372906, -0.39278492256994324,
      2.2899099473145785, -0.71818114788059595, 0.032607743156970521,
      0.028049895585638977, 0.028272122739737816, 0.055345861952708991,
      -0.48156285818994926, -0.58340750046411893, -0.86216050207128425,
      -1.4881746132515903, 0.21630683310921209, 0.98437635069587615,
      -1.6292524230378844, -1.6758451171313535, -0.94944848796794257,
      -1.3819192237167135, -4.3088092470748327, 4.0953240961107573,
      1.3169996626723997, -2.1350850815940969, 0.89151528461955398,
      -1.3153718178471963, -0.63491230012404032, 1.0918914947373428,
      2.8588934759236029, 4.5585723877238333, 5.1117283468471149,
      -0.74657612229282799, -1.4992457734005289, 0.29879250576605354,
      0.38502963686493819, -2.2026656773345792, -1.8614258647042887,
      2.4398211612625444, 4.9254030412222818, -0.67950254513751684,
      -1.943895632986018, -0.85011361987256961, -2.9853940799101322,
      -0.81861530936792426, 1.2673324244032633, -0.2440288847680655,
      3.7037327911848177, 0.4526640966613022, 1.4433585820026713,
      -0.44627259722847867, 3.9469971196810656, -3.6670368066197145,
      -0.91077402090068871, -3.5210660270405745, 2.4788205210350638,
      2.550966868869073, 
  };
  return sig;
}

Eigen::MatrixXd worked_distances() {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 6,
       1, 0, 5,
       6, 5, 0;
  return d;
}

}  // namespace

TEST_CASE("epoch distance matrix holds pairwise symmetrized divergences") {
  EpochStats stats;
  GaussianParams a, b;
  a.mean = Eigen::VectorXd::Zero(1);
  a.cov = Eigen::MatrixXd::Constant(1, 1, 1.0);
  b.mean = Eigen::VectorXd::Zero(1);
  b.cov = Eigen::MatrixXd::Constant(1, 1, 2.0);
  stats.epochs = {a, b};
  stats.counts = {10, 10};

  const Eigen::MatrixXd d = cpd::epoch_distance_matrix(stats);
  REQUIRE(d.rows() == 2);
  REQUIRE(d.cols() == 2);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
  // (KL(a||b) + KL(b||a)) / 2 for N(0,1) vs N(0,2) is exactly 1/8.
  CHECK(d(0, 1) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(d(0, 1) == d(1, 0));
}

TEST_CASE("single linkage clustering cuts at the requested count") {
  const Eigen::MatrixXd d = worked_distances();

  // Items 0 and 1 merge first (distance 1); the cut at two clusters leaves
  // item 2 alone. Labels are numbered by first appearance.
  CHECK(cpd::single_linkage_cluster(d, 2) == std::vector<int>{0, 0, 1});
  CHECK(cpd::single_linkage_cluster(d, 1) == std::vector<int>{0, 0, 0});
  CHECK(cpd::single_linkage_cluster(d, 3) == std::vector<int>{0, 1, 2});

  CHECK_THROWS_AS(cpd::single_linkage_cluster(d, 0), InvalidK);
  CHECK_THROWS_AS(cpd::single_linkage_cluster(d, 4), InvalidK);
  Eigen::MatrixXd ragged(2, 3);
  ragged.setZero();
  CHECK_THROWS_AS(cpd::single_linkage_cluster(ragged, 1), DimensionMismatch);
}

TEST_CASE("single linkage resolves distance ties deterministically") {
  // Two equal merge candidates: (0,1) and (2,3) both at distance 1. The
  // lexicographically smallest pair merges first; with k = 3 only that one
  // merge happens.
  Eigen::MatrixXd d(4, 4);
  d << 0, 1, 9, 9,
       1, 0, 9, 9,
       9, 9, 0, 1,
       9, 9, 1, 0;
  CHECK(cpd::single_linkage_cluster(d, 3) == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("clustering segmentation flags boundaries between clusters") {
  // Four epochs, clusters {0,1} and {2,3}: the only boundary lies between
  // epochs 1 and 2, scored by their distance.
  Eigen::MatrixXd d(4, 4);
  d << 0.0, 0.2, 7.0, 8.0,
       0.2, 0.0, 6.5, 7.5,
       7.0, 6.5, 0.0, 0.3,
       8.0, 7.5, 0.3, 0.0;
  const cpd::Segmentation seg = cpd::slcd_from_distances(d, 2);
  CHECK(seg.boundaries == std::vector<int>{2});
  REQUIRE(seg.scores.size() == 1);
  CHECK(seg.scores[0] == doctest::Approx(6.5));
  CHECK(seg.n_epochs == 4);
  CHECK(seg.algorithm == "slcd");
}

TEST_CASE("clustering detector finds a variance shift") {
  Rng rng(31);
  const int n_epochs = 10;
  const int m = 200;
  Eigen::MatrixXd data(n_epochs * m, 2);
  for (int i = 0; i < n_epochs; ++i) {
    const double sd = i < 5 ? 1.0 : 3.0;
    data.middleRows(i * m, m) = rng.normal_matrix(m, 2) * sd;
  }
  TimeSeries ts;
  ts.data = data;

  const cpd::Segmentation seg = cpd::slcd_detect(ts, n_epochs, 2);
  CHECK(seg.boundaries == std::vector<int>{5});
  CHECK(seg.n_epochs == n_epochs);
}

TEST_CASE("clustering detector at one cluster accepts degenerate data") {
  // One cluster cannot split, so even constant data (whose epoch Gaussians
  // are singular) must segment cleanly into zero boundaries.
  TimeSeries ts;
  ts.data = Eigen::MatrixXd::Constant(100, 2, 3.0);
  const cpd::Segmentation seg = cpd::slcd_detect(ts, 5, 1);
  CHECK(seg.boundaries.empty());
  CHECK(seg.n_epochs == 5);
  CHECK(seg.algorithm == "slcd");
}

TEST_CASE("variance detector reproduces the pinned reference run") {
  Eigen::VectorXd sig =
      Eigen::Map<const Eigen::VectorXd>(reference_signal().data(),
                                        (Eigen::Index)reference_signal().size());
  cpd::CusumParams params;
  params.W = 20;
  params.h = 5.0;
  params.theta_grid.resize(16);
  for (int i = 0; i < 16; ++i) params.theta_grid[i] = 0.5 + 7.5 * i / 15.0;

  const cpd::Segmentation seg = cpd::cusum_weighted(sig, params);
  CHECK(seg.algorithm == "cusum");
  CHECK(seg.n_epochs == 100);
  REQUIRE(seg.boundaries.size() == 1);
  CHECK(seg.boundaries[0] == 64);
  REQUIRE(seg.scores.size() == 1);
  CHECK(seg.scores[0] == doctest::Approx(10.720698921258682).epsilon(1e-12));
}

TEST_CASE("variance detector localizes a variance step") {
  Rng rng(77);
  Eigen::VectorXd sig(1000);
  for (int t = 0; t < 1000; ++t) sig(t) = rng.normal() * (t < 500 ? 1.0 : 2.0);

  cpd::CusumParams params;
  params.W = 50;
  params.h = 10.0;
  params.theta_grid.resize(16);
  for (int i = 0; i < 16; ++i) params.theta_grid[i] = 0.25 + 3.75 * i / 15.0;

  const cpd::Segmentation seg = cpd::cusum_weighted(sig, params);
  REQUIRE(!seg.boundaries.empty());
  CHECK(seg.boundaries[0] >= 500);
  CHECK(seg.boundaries[0] <= 600);
}

TEST_CASE("variance detector rejects degenerate references and bad arguments") {
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(200);
  cpd::CusumParams params;
  params.W = 50;
  params.theta_grid = {0.5, 1.0, 2.0};
  CHECK_THROWS_AS(cpd::cusum_weighted(flat, params), DegenerateVariance);

  Rng rng(3);
  Eigen::VectorXd ok = rng.normal_vector(200);
  cpd::CusumParams bad = params;
  bad.W = 1;
  CHECK_THROWS_AS(cpd::cusum_weighted(ok, bad), InvalidArgument);
  bad = params;
  bad.theta_grid.clear();
  CHECK_THROWS_AS(cpd::cusum_weighted(ok, bad), InvalidArgument);
  bad = params;
  bad.theta_grid = {1.0, -0.5};
  CHECK_THROWS(cpd::cusum_weighted(ok, bad));
  Eigen::VectorXd tiny = rng.normal_vector(30);
  CHECK_THROWS_AS(cpd::cusum_weighted(tiny, params), TooFewSamples);
}

TEST_CASE("window density distance matches closed forms") {
  // Single-point windows at 0 and t: (4 pi s^2)^(-1/2) (2 - 2 exp(-t^2/4s^2)).
  const double sigma = 0.7;
  const double t = 1.3;
  Eigen::MatrixXd w1(1, 1), w2(1, 1);
  w1 << 0.0;
  w2 << t;
  const double expect = (2.0 - 2.0 * std::exp(-t * t / (4 * sigma * sigma))) /
                        std::sqrt(4.0 * M_PI * sigma * sigma);
  CHECK(cpd::kl_window_distance(w1, w2, sigma) ==
        doctest::Approx(expect).epsilon(1e-12));

  // Identical windows have zero distance.
  Rng rng(9);
  Eigen::MatrixXd w = rng.normal_matrix(20, 3);
  CHECK(cpd::kl_window_distance(w, w, 0.5) == doctest::Approx(0.0).epsilon(1e-12));

  // Pinned two-dimensional value from an independent implementation.
  Eigen::MatrixXd a(3, 2), b(3, 2);
  a << 0.0, 0.0, 1.0, 0.5, -0.5, 0.3;
  b << 2.0, 1.0, 1.5, -0.7, 0.4, 0.9;
  CHECK(cpd::kl_window_distance(a, b, 0.8) ==
        doctest::Approx(0.050408278598629098).epsilon(1e-12));

  CHECK_THROWS_AS(cpd::kl_window_distance(a, b, 0.0), DomainError);
  Eigen::MatrixXd short_b = b.topRows(2);
  CHECK_THROWS_AS(cpd::kl_window_distance(a, short_b, 0.8), DimensionMismatch);
}

TEST_CASE("bandwidth heuristic averages nearest neighbour distances") {
  TimeSeries two;
  two.data.resize(2, 1);
  two.data << 0.0, 2.0;
  CHECK(cpd::kl_sigma_heuristic(two) == doctest::Approx(2.0).epsilon(1e-12));

  // Evenly spaced grid: every point's nearest neighbour sits one step away.
  TimeSeries grid;
  grid.data.resize(10, 1);
  for (int i = 0; i < 10; ++i) grid.data(i, 0) = i;
  CHECK(cpd::kl_sigma_heuristic(grid) == doctest::Approx(1.0).epsilon(1e-12));

  TimeSeries small;
  small.data = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(cpd::kl_sigma_heuristic(small), TooFewSamples);
}

TEST_CASE("state path segments a window distance matrix") {
  // Windows 0,1 alike and 2,3 alike; switching once at the middle is optimal
  // for moderate penalties.
  Eigen::MatrixXd d(4, 4);
  d << 0.0, 0.1, 2.0, 2.0,
       0.1, 0.0, 2.0, 2.0,
       2.0, 2.0, 0.0, 0.1,
       2.0, 2.0, 0.1, 0.0;

  const cpd::Segmentation mid = cpd::kl_state_path(d, 1.0);
  CHECK(mid.boundaries == std::vector<int>{2});
  CHECK(mid.n_epochs == 4);
  CHECK(mid.algorithm == "kl");

  // A huge penalty forbids every switch.
  CHECK(cpd::kl_state_path(d, 100.0).boundaries.empty());

  // A zero penalty lets every window pick itself.
  CHECK(cpd::kl_state_path(d, 0.0).boundaries ==
        std::vector<int>{1, 2, 3});

  CHECK_THROWS_AS(cpd::kl_state_path(d, -1.0), DomainError);
}

TEST_CASE("state path boundary count decreases with the penalty") {
  Rng rng(15);
  TimeSeries ts;
  ts.data.resize(600, 1);
  for (int t = 0; t < 600; ++t) {
    const double mu = (t / 150) % 2 == 0 ? 0.0 : 4.0;
    ts.data(t, 0) = mu + rng.normal();
  }
  const double sigma = cpd::kl_sigma_heuristic(ts);
  const Eigen::MatrixXd d = cpd::kl_distance_matrix(ts, 50, sigma);

  std::size_t prev = SIZE_MAX;
  for (double c : {0.0, 0.01, 0.1, 1.0, 10.0}) {
    const std::size_t n = cpd::kl_state_path(d, c * sigma).boundaries.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("density-based detector finds a mean shift") {
  Rng rng(12);
  TimeSeries ts;
  ts.data.resize(400, 1);
  for (int t = 0; t < 400; ++t) ts.data(t, 0) = rng.normal() + (t < 200 ? 0.0 : 5.0);

  cpd::KlParams params;
  params.W = 50;
  params.C = 1.0;
  const cpd::Segmentation seg = cpd::kohlmorgen_lemm(ts, params);
  CHECK(seg.n_epochs == 8);
  CHECK(seg.boundaries == std::vector<int>{4});

  cpd::KlParams bad = params;
  bad.W = 0;
  CHECK_THROWS_AS(cpd::kohlmorgen_lemm(ts, bad), InvalidArgument);
  bad = params;
  bad.C = -2.0;
  CHECK_THROWS_AS(cpd::kohlmorgen_lemm(ts, bad), DomainError);
  bad = params;
  bad.W = 300;
  CHECK_THROWS_AS(cpd::kohlmorgen_lemm(ts, bad), TooFewSamples);
}
