#pragma once

// Test helper: build epoch data whose *sample* moments match the requested
// means and covariances exactly. Each block of normals is standardized
// against its own sample statistics and then re-colored, so estimator and
// population quantities coincide and recovery can be checked to numerical
// precision instead of statistical tolerance.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nonstat/linalg.hpp"
#include "nonstat/rng.hpp"
#include "nonstat/timeseries.hpp"

namespace nonstat::testutil {

inline TimeSeries exact_epochs(const std::vector<Eigen::VectorXd>& means,
                               const std::vector<Eigen::MatrixXd>& covs,
                               int samples_per_epoch, Rng& rng) {
  const int n = static_cast<int>(means.size());
  const int D = static_cast<int>(means[0].size());
  const int m = samples_per_epoch;
  Eigen::MatrixXd data(n * m, D);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd z = rng.normal_matrix(m, D);
    Eigen::RowVectorXd mu = z.colwise().mean();
    Eigen::MatrixXd zc = z.rowwise() - mu;
    Eigen::MatrixXd s = zc.transpose() * zc / double(m - 1);
    Eigen::MatrixXd zstd = zc * sym_inverse_sqrt(s);
    Eigen::MatrixXd half = covs[i] * sym_inverse_sqrt(covs[i]);  // covs[i]^(1/2)
    data.middleRows(i * m, m) =
        (zstd * half).rowwise() + means[i].transpose().eval();
  }
  TimeSeries ts;
  ts.data = std::move(data);
  EpochPartition part;
  for (int i = 0; i < n; ++i) part.ranges.emplace_back(i * m, (i + 1) * m);
  ts.partition = part;
  return ts;
}

// Six epochs in D = 4 whose first two coordinates are exactly standard
// normal in-sample while the last two drift in mean and covariance, mixed
// through an orthogonal matrix. Returns the series and the mixing matrix;
// the true stationary extractor spans mixing.leftCols(2).
inline std::pair<TimeSeries, Eigen::MatrixXd> exact_split_series(Rng& rng) {
  const int D = 4;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(D);
    mu(2) = 0.4 * i - 1.0;
    mu(3) = (i % 2 == 0) ? 0.5 : -0.5;
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(D, D);
    c(2, 2) = 0.5 + 0.45 * i;
    c(3, 3) = 2.2 - 0.3 * i;
    c(2, 3) = c(3, 2) = 0.15 * (i - 2.5);
    means.push_back(mu);
    covs.push_back(c);
  }
  TimeSeries src = exact_epochs(means, covs, 200, rng);
  Eigen::MatrixXd mixing = random_orthogonal(D, rng);
  TimeSeries ts;
  ts.data = src.data * mixing.transpose();
  ts.partition = src.partition;
  return {std::move(ts), std::move(mixing)};
}

}  // namespace nonstat::testutil
