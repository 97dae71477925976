#pragma once

#include <vector>

#include <Eigen/Core>

#include "nonstat/timeseries.hpp"

namespace nonstat {

/// Mean and covariance of a Gaussian.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Per-epoch sample moments.
struct EpochStats {
  std::vector<GaussianParams> epochs;
  std::vector<int> counts;  // samples per epoch

  int n_epochs() const { return static_cast<int>(epochs.size()); }
  int dim() const { return epochs.empty() ? 0 : epochs.front().dim(); }
  int total_samples() const;
};

/// Affine map x -> W (x - center).
struct WhiteningTransform {
  Eigen::VectorXd center;
  Eigen::MatrixXd W;
};

/// Sample mean (1/n) and covariance (1/(n-1)) for every epoch of a partition.
/// Epochs of fewer than two samples raise TooFewSamples.
EpochStats epoch_moments(const TimeSeries& ts, const EpochPartition& part);

/// Whitening from the moments of the whole series taken as one epoch:
/// center on the sample mean, scale by the inverse square root of the
/// sample covariance.
WhiteningTransform whitening_transform(const TimeSeries& ts);

/// Whitening from averaged epoch moments: center on the mean of epoch means,
/// scale by the inverse square root of the mean of epoch covariances. After
/// the transform the average epoch has exactly zero mean and unit covariance.
WhiteningTransform whitening_transform(const TimeSeries& ts, const EpochPartition& part);

/// Apply a whitening transform to every sample; labels and partition carry over.
TimeSeries apply(const WhiteningTransform& wt, const TimeSeries& ts);

TimeSeries whiten(const TimeSeries& ts);
TimeSeries whiten(const TimeSeries& ts, const EpochPartition& part);

/// Kullback-Leibler divergence KL(p || q) between Gaussians.
double kl_gauss(const GaussianParams& p, const GaussianParams& q);

/// (KL(p || q) + KL(q || p)) / 2.
double symmetrized_kl(const GaussianParams& p, const GaussianParams& q);

/// Shrink a covariance toward a scaled identity with matched trace:
/// (1 - gamma) * cov + gamma * (trace / d) * I, gamma in [0, 1].
Eigen::MatrixXd shrinkage_cov(const Eigen::MatrixXd& cov, double gamma);

/// Analytic shrinkage intensity toward the scaled identity target
/// (Ledoit-Wolf), computed from raw samples, one row per observation.
double ledoit_wolf_gamma(const Eigen::MatrixXd& samples);

}  // namespace nonstat
