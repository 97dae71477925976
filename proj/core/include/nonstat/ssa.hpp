#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nonstat/stats.hpp"
#include "nonstat/timeseries.hpp"

namespace nonstat::ssa {

enum class Kind { Stationary, NonStationary, Random };

/// A d-dimensional linear projection with orthonormal rows, stored as the
/// top block of a full orthogonal matrix so the complementary projection
/// stays available.
struct Projection {
  Eigen::MatrixXd rotation;  // D x D orthogonal
  int d = 0;
  Kind kind = Kind::Stationary;

  int D() const { return static_cast<int>(rotation.rows()); }
  Eigen::MatrixXd basis() const { return rotation.topRows(d); }
  Eigen::MatrixXd complement() const { return rotation.bottomRows(D() - d); }
};

struct Config {
  int restarts = 5;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double initial_step = 1.0;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  std::uint64_t seed = 0;
};

struct Solution {
  Projection projection;
  WhiteningTransform whitening;  // applied to the data before the projection
  double loss = 0.0;
  std::vector<double> per_restart_losses;
  int iterations_used = 0;
};

/// Sum over epochs of -log det(B cov B^T) + |B mean|^2, for stats taken from
/// centered and whitened data. Zero when every projected epoch is standard
/// normal; grows with departures of projected epoch moments from (0, I).
double ssa_loss(const Eigen::MatrixXd& B, const EpochStats& stats);

/// Gradient of ssa_loss with respect to the entries of B.
Eigen::MatrixXd ssa_loss_gradient(const Eigen::MatrixXd& B, const EpochStats& stats);

/// Called after an optimizer accepts an iteration; receives the iteration
/// number and the current full rotation.
using IterationObserver = std::function<void(int, const Eigen::MatrixXd&)>;

/// Minimize (Kind::Stationary) or maximize (Kind::NonStationary) ssa_loss
/// over d-row projections by multiplicative updates B <- B exp(-eps K) with
/// K the antisymmetric tangent-projected gradient, Armijo backtracking, and
/// random orthogonal restarts. The stats must come from whitened data.
Solution optimize(const EpochStats& whitened_stats, int d, Kind kind, const Config& cfg,
                  const IterationObserver& observer = {});

/// Whiten, partition into n_epochs equal blocks, and find the d_s-dimensional
/// projection whose epoch moments stay closest to the standard normal.
Solution find_stationary(const TimeSeries& ts, int ds, int n_epochs, const Config& cfg);

/// Same machinery with the objective maximized: the d_n-dimensional projection
/// whose epoch moments move the most.
Solution find_most_nonstationary(const TimeSeries& ts, int dn, int n_epochs,
                                 const Config& cfg);

/// Top d rows of a Haar-distributed orthogonal matrix.
Projection random_projection(int D, int d, std::uint64_t seed);

/// Apply a solution to raw data: whiten, then project onto the retained rows.
TimeSeries project(const Solution& sol, const TimeSeries& ts);

/// Apply a bare projection (no whitening) to raw data.
TimeSeries project(const Projection& p, const TimeSeries& ts);

}  // namespace nonstat::ssa
