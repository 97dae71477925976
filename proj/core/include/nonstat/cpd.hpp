#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nonstat/stats.hpp"
#include "nonstat/timeseries.hpp"

namespace nonstat::cpd {

/// Detected change points over a division of the data into n_epochs pieces.
/// A boundary value v, in [1, n_epochs - 1], separates epochs v - 1 and v.
struct Segmentation {
  std::vector<int> boundaries;  // strictly increasing
  std::vector<double> scores;   // per boundary; empty when not meaningful
  int n_epochs = 0;
  std::string algorithm;
};

/// Symmetric matrix of pairwise symmetrized KL divergences between the
/// Gaussian fits of the epochs.
Eigen::MatrixXd epoch_distance_matrix(const EpochStats& stats);

/// Agglomerative single-linkage clustering cut at k clusters. Returns one
/// label per item, numbered by first appearance. Equal merge distances are
/// resolved toward the lexicographically smallest representative pair.
std::vector<int> single_linkage_cluster(const Eigen::MatrixXd& dist, int k);

/// Clustering cut of a precomputed epoch distance matrix: boundaries appear
/// between adjacent epochs in different clusters, scored by their distance.
Segmentation slcd_from_distances(const Eigen::MatrixXd& dist, int k);

/// Cluster epochs by the distance between their Gaussian fits and flag every
/// boundary between adjacent epochs of different clusters. Scores carry the
/// adjacent-epoch distances.
Segmentation slcd_detect(const TimeSeries& ts, int n_epochs, int k);

struct CusumParams {
  int W = 50;                      ///< window length
  double h = 10.0;                 ///< detection threshold on the log ratio
  std::vector<double> theta_grid;  ///< uniform grid of alternative variances
};

/// Sequential variance-change detector on a univariate signal: the average
/// likelihood ratio of the last W samples between a grid of alternative
/// variances and the reference-window fit, reported when its log reaches h.
/// Boundaries are at sample granularity (n_epochs equals the signal length).
Segmentation cusum_weighted(const Eigen::VectorXd& signal, const CusumParams& params);

struct KlParams {
  int W = 50;                   ///< window (epoch) length in samples
  double C = 1.0;               ///< state-switch penalty
  std::optional<double> sigma;  ///< kernel bandwidth; unset -> heuristic
};

/// Squared L2 distance between Gaussian kernel density estimates of two
/// sample windows (rows are points), evaluated in closed form.
double kl_window_distance(const Eigen::MatrixXd& win1, const Eigen::MatrixXd& win2,
                          double sigma);

/// Bandwidth heuristic: mean distance of each point to its D nearest
/// neighbours (D the data dimension), on a coarse subsample of at most 100
/// points; 1.0 when the data has no spread at all.
double kl_sigma_heuristic(const TimeSeries& ts);

/// Pairwise kl_window_distance matrix between consecutive length-W windows.
Eigen::MatrixXd kl_distance_matrix(const TimeSeries& ts, int W, double sigma);

/// Minimum-cost state path over a precomputed window distance matrix, where
/// each switch costs C; boundaries appear where the optimal path changes state.
Segmentation kl_state_path(const Eigen::MatrixXd& dist, double C);

/// Segment the series into length-W epochs, treat every epoch's density as a
/// candidate state, and find the minimum-cost state path where each switch
/// costs C; boundaries appear where the optimal path changes state.
Segmentation kohlmorgen_lemm(const TimeSeries& ts, const KlParams& params);

}  // namespace nonstat::cpd
