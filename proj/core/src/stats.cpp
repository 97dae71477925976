#include "nonstat/stats.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "nonstat/errors.hpp"
#include "nonstat/linalg.hpp"

namespace nonstat {

int EpochStats::total_samples() const {
  int total = 0;
  for (int n : counts) total += n;
  return total;
}

namespace {

GaussianParams sample_moments(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  const Eigen::Index n = rows.rows();
  if (n < 2) throw TooFewSamples("sample_moments: need at least two samples");
  GaussianParams g;
  g.mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return g;
}

void check_partition(const TimeSeries& ts, const EpochPartition& part) {
  if (part.n_epochs() == 0) throw InvalidArgument("empty epoch partition");
  int prev_end = 0;
  for (const auto& [begin, end] : part.ranges) {
    if (begin != prev_end || end <= begin)
      throw InvalidArgument("epoch partition is not contiguous");
    prev_end = end;
  }
  if (prev_end != ts.T())
    throw InvalidArgument("epoch partition does not cover the series");
}

}  // namespace

EpochStats epoch_moments(const TimeSeries& ts, const EpochPartition& part) {
  check_partition(ts, part);
  EpochStats stats;
  stats.epochs.reserve(part.ranges.size());
  stats.counts.reserve(part.ranges.size());
  for (const auto& [begin, end] : part.ranges) {
    stats.epochs.push_back(sample_moments(ts.data.middleRows(begin, end - begin)));
    stats.counts.push_back(end - begin);
  }
  return stats;
}

WhiteningTransform whitening_transform(const TimeSeries& ts) {
  EpochPartition whole;
  whole.ranges.emplace_back(0, ts.T());
  return whitening_transform(ts, whole);
}

WhiteningTransform whitening_transform(const TimeSeries& ts, const EpochPartition& part) {
  const EpochStats stats = epoch_moments(ts, part);
  const int D = ts.D();
  Eigen::VectorXd mean_of_means = Eigen::VectorXd::Zero(D);
  Eigen::MatrixXd mean_of_covs = Eigen::MatrixXd::Zero(D, D);
  for (const GaussianParams& g : stats.epochs) {
    mean_of_means += g.mean;
    mean_of_covs += g.cov;
  }
  const double n = static_cast<double>(stats.n_epochs());
  WhiteningTransform wt;
  wt.center = mean_of_means / n;
  wt.W = sym_inverse_sqrt(mean_of_covs / n);
  return wt;
}

TimeSeries apply(const WhiteningTransform& wt, const TimeSeries& ts) {
  if (wt.center.size() != ts.D())
    throw DimensionMismatch("apply: transform and series dimensions differ");
  TimeSeries out;
  out.data = (ts.data.rowwise() - wt.center.transpose()) * wt.W.transpose();
  out.labels = ts.labels;
  out.partition = ts.partition;
  return out;
}

TimeSeries whiten(const TimeSeries& ts) { return apply(whitening_transform(ts), ts); }

TimeSeries whiten(const TimeSeries& ts, const EpochPartition& part) {
  return apply(whitening_transform(ts, part), ts);
}

double kl_gauss(const GaussianParams& p, const GaussianParams& q) {
  const int d = p.dim();
  if (d != q.dim() || p.cov.rows() != d || q.cov.rows() != d)
    throw DimensionMismatch("kl_gauss: parameter dimensions differ");
  Eigen::LLT<Eigen::MatrixXd> llt_q(q.cov);
  if (llt_q.info() != Eigen::Success)
    throw SingularCovariance("kl_gauss: second covariance not positive definite");
  const double logdet_q = 2.0 * llt_q.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_p = logdet_spd(p.cov);
  const double trace = llt_q.solve(p.cov).trace();
  const Eigen::VectorXd diff = q.mean - p.mean;
  const double maha = diff.dot(llt_q.solve(diff));
  return 0.5 * (trace + maha - d + logdet_q - logdet_p);
}

double symmetrized_kl(const GaussianParams& p, const GaussianParams& q) {
  return 0.5 * (kl_gauss(p, q) + kl_gauss(q, p));
}

Eigen::MatrixXd shrinkage_cov(const Eigen::MatrixXd& cov, double gamma) {
  if (cov.rows() != cov.cols()) throw DimensionMismatch("shrinkage_cov: matrix not square");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw DomainError("shrinkage_cov: gamma must lie in [0, 1]");
  const double nu = cov.trace() / static_cast<double>(cov.rows());
  return (1.0 - gamma) * cov +
         gamma * nu * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
}

double ledoit_wolf_gamma(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2) throw TooFewSamples("ledoit_wolf_gamma: need at least two samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd x = samples.rowwise() - mean;
  const Eigen::MatrixXd s = (x.transpose() * x) / static_cast<double>(n);
  const double m = s.trace() / static_cast<double>(d);
  const double d2 =
      (s - m * Eigen::MatrixXd::Identity(d, d)).squaredNorm();
  if (d2 < 1e-300) return 0.0;
  double sum4 = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double sq = x.row(k).squaredNorm();
    sum4 += sq * sq;
  }
  const double nn = static_cast<double>(n);
  const double b2 = (sum4 - nn * s.squaredNorm()) / (nn * nn);
  return std::min(1.0, std::max(0.0, b2 / d2));
}

}  // namespace nonstat
