#include "nonstat/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nonstat/errors.hpp"

namespace nonstat::cpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_square_distances(const Eigen::MatrixXd& dist) {
  if (dist.rows() != dist.cols() || dist.rows() < 1)
    throw DimensionMismatch("distance matrix must be square and nonempty");
}

double logsumexp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

Eigen::MatrixXd epoch_distance_matrix(const EpochStats& stats) {
  const int n = stats.n_epochs();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = symmetrized_kl(stats.epochs[i], stats.epochs[j]);
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

std::vector<int> single_linkage_cluster(const Eigen::MatrixXd& dist, int k) {
  check_square_distances(dist);
  const int n = static_cast<int>(dist.rows());
  if (k < 1 || k > n)
    throw InvalidK("single_linkage_cluster: need 1 <= k <= number of items");

  // Clusters are named by their smallest member index; d holds current
  // single-linkage distances between active clusters.
  Eigen::MatrixXd d = dist;
  std::vector<bool> active(n, true);
  std::vector<int> owner(n);
  for (int i = 0; i < n; ++i) owner[i] = i;

  for (int clusters = n; clusters > k; --clusters) {
    int bi = -1, bj = -1;
    double best = kInf;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (d(i, j) < best) {
          best = d(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    for (int m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      const double merged = std::min(d(bi, m), d(bj, m));
      d(bi, m) = merged;
      d(m, bi) = merged;
    }
    active[bj] = false;
    for (int m = 0; m < n; ++m)
      if (owner[m] == bj) owner[m] = bi;
  }

  // Renumber by first appearance.
  std::vector<int> labels(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != -1) continue;
    const int rep = owner[i];
    for (int j = i; j < n; ++j)
      if (owner[j] == rep) labels[j] = next;
    ++next;
  }
  return labels;
}

Segmentation slcd_from_distances(const Eigen::MatrixXd& dist, int k) {
  const std::vector<int> labels = single_linkage_cluster(dist, k);
  const int n = static_cast<int>(dist.rows());

  Segmentation seg;
  seg.n_epochs = n;
  seg.algorithm = "slcd";
  for (int i = 1; i < n; ++i) {
    if (labels[i] != labels[i - 1]) {
      seg.boundaries.push_back(i);
      seg.scores.push_back(dist(i - 1, i));
    }
  }
  return seg;
}

Segmentation slcd_detect(const TimeSeries& ts, int n_epochs, int k) {
  const EpochPartition part = partition_epochs(ts, n_epochs);
  if (k == 1) {
    // A single cluster never splits, whatever the epochs look like, so skip
    // the Gaussian fits; this keeps degenerate (e.g. constant) input legal.
    Segmentation seg;
    seg.n_epochs = n_epochs;
    seg.algorithm = "slcd";
    return seg;
  }
  const EpochStats stats = epoch_moments(ts, part);
  return slcd_from_distances(epoch_distance_matrix(stats), k);
}

Segmentation cusum_weighted(const Eigen::VectorXd& signal, const CusumParams& params) {
  const int T = static_cast<int>(signal.size());
  const int W = params.W;
  if (W < 2) throw InvalidArgument("cusum_weighted: window must hold at least two samples");
  if (T < W + 1) throw TooFewSamples("cusum_weighted: signal shorter than one window");
  if (params.theta_grid.empty())
    throw InvalidArgument("cusum_weighted: empty variance grid");
  for (double th : params.theta_grid)
    if (!(th > 0.0)) throw DomainError("cusum_weighted: variances must be positive");
  const double b = params.theta_grid.size() > 1
                       ? params.theta_grid[1] - params.theta_grid[0]
                       : 1.0;
  if (!(b > 0.0)) throw InvalidArgument("cusum_weighted: grid must increase");

  // Prefix sums for O(1) window statistics.
  std::vector<double> s1(T + 1, 0.0), s2(T + 1, 0.0);
  for (int t = 0; t < T; ++t) {
    s1[t + 1] = s1[t] + signal(t);
    s2[t + 1] = s2[t] + signal(t) * signal(t);
  }
  const auto window_sums = [&](int begin, int end) {  // half-open
    return std::pair<double, double>(s1[end] - s1[begin], s2[end] - s2[begin]);
  };

  const double overall_var =
      (s2[T] - s1[T] * s1[T] / T) / static_cast<double>(T - 1);

  double mu0 = 0.0, theta0 = 0.0;
  const auto fit_reference = [&](int begin, int end) {
    const auto [sum, sumsq] = window_sums(begin, end);
    const double n = static_cast<double>(end - begin);
    mu0 = sum / n;
    theta0 = (sumsq - n * mu0 * mu0) / (n - 1.0);
    if (!(theta0 > 1e-12 * std::max(1e-30, overall_var)))
      throw DegenerateVariance("cusum_weighted: reference window variance vanished");
  };
  fit_reference(0, W);

  const double log2pi = std::log(2.0 * std::numbers::pi);
  const auto window_loglik = [&](int begin, int end, double theta) {
    const auto [sum, sumsq] = window_sums(begin, end);
    const double n = static_cast<double>(end - begin);
    const double sse = sumsq - 2.0 * mu0 * sum + n * mu0 * mu0;
    return -0.5 * n * (log2pi + std::log(theta)) - sse / (2.0 * theta);
  };

  Segmentation seg;
  seg.n_epochs = T;
  seg.algorithm = "cusum";
  std::vector<double> terms(params.theta_grid.size());
  int tc = W;
  while (tc < T) {
    const int begin = tc - W + 1;
    const int end = tc + 1;
    const double ll0 = window_loglik(begin, end, theta0);
    for (std::size_t i = 0; i < params.theta_grid.size(); ++i)
      terms[i] = window_loglik(begin, end, params.theta_grid[i]) - ll0;
    const double log_ratio = logsumexp(terms) - std::log(b);
    if (log_ratio >= params.h) {
      seg.boundaries.push_back(tc);
      seg.scores.push_back(log_ratio);
      tc += W;
      if (tc >= T) break;
      fit_reference(tc - W + 1, tc + 1);
      continue;
    }
    ++tc;
  }
  return seg;
}

double kl_window_distance(const Eigen::MatrixXd& win1, const Eigen::MatrixXd& win2,
                          double sigma) {
  if (win1.cols() != win2.cols())
    throw DimensionMismatch("kl_window_distance: window dimensions differ");
  if (win1.rows() != win2.rows())
    throw DimensionMismatch("kl_window_distance: window lengths differ");
  if (!(sigma > 0.0)) throw DomainError("kl_window_distance: sigma must be positive");
  const int W = static_cast<int>(win1.rows());
  const int d = static_cast<int>(win1.cols());
  const double inv = 1.0 / (4.0 * sigma * sigma);

  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (int w = 0; w < W; ++w)
    for (int v = 0; v < W; ++v) {
      s11 += std::exp(-(win1.row(w) - win1.row(v)).squaredNorm() * inv);
      s12 += std::exp(-(win1.row(w) - win2.row(v)).squaredNorm() * inv);
      s22 += std::exp(-(win2.row(w) - win2.row(v)).squaredNorm() * inv);
    }
  const double prefactor =
      1.0 / (static_cast<double>(W) * W *
             std::pow(4.0 * std::numbers::pi * sigma * sigma, 0.5 * d));
  return prefactor * (s11 - 2.0 * s12 + s22);
}

double kl_sigma_heuristic(const TimeSeries& ts) {
  const int T = ts.T();
  const int D = ts.D();
  // A coarse sample keeps the bandwidth at the scale of the window densities
  // being compared; a dense one drives the nearest-neighbour distances toward
  // zero in low dimension, and an undersmoothed kernel washes out the contrast
  // between windows.
  const int stride = (T + 99) / 100;
  const int n = (T + stride - 1) / stride;
  if (n <= D) throw TooFewSamples("kl_sigma_heuristic: need more points than dimensions");

  Eigen::MatrixXd pts(n, D);
  for (int i = 0; i < n; ++i) pts.row(i) = ts.data.row(i * stride);

  double total = 0.0;
  std::vector<double> dists(n - 1);
  for (int i = 0; i < n; ++i) {
    int m = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dists[m++] = (pts.row(i) - pts.row(j)).norm();
    }
    // nth_element gathers the D smallest distances in front, order irrelevant
    std::nth_element(dists.begin(), dists.begin() + (D - 1), dists.end());
    double sum = 0.0;
    for (int j = 0; j < D; ++j) sum += dists[j];
    total += sum / D;
  }
  const double sigma = total / n;
  // Zero spread means every window is identical; any positive bandwidth then
  // yields zero divergences, so pick a harmless one instead of returning 0.
  return sigma > 0.0 ? sigma : 1.0;
}

Eigen::MatrixXd kl_distance_matrix(const TimeSeries& ts, int W, double sigma) {
  if (W < 1) throw InvalidArgument("kl_distance_matrix: window must be positive");
  const int n = ts.T() / W;
  if (n < 2) throw TooFewSamples("kl_distance_matrix: need at least two windows");
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = std::max(
          0.0, kl_window_distance(ts.data.middleRows(i * W, W),
                                  ts.data.middleRows(j * W, W), sigma));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

Segmentation kl_state_path(const Eigen::MatrixXd& dist, double C) {
  check_square_distances(dist);
  if (!(C >= 0.0)) throw DomainError("kl_state_path: penalty must be nonnegative");
  const int n = static_cast<int>(dist.rows());

  // Minimum-cost path over (epoch, state) with a per-switch penalty; states
  // are the epochs' own densities.
  Eigen::MatrixXd cost(n, n);
  Eigen::MatrixXi prev(n, n);
  cost.row(0) = dist.row(0);
  prev.row(0).setConstant(-1);
  for (int t = 1; t < n; ++t) {
    int argbest = 0;
    for (int s = 1; s < n; ++s)
      if (cost(t - 1, s) < cost(t - 1, argbest)) argbest = s;
    const double switch_cost = cost(t - 1, argbest) + C;
    for (int s = 0; s < n; ++s) {
      const double stay = cost(t - 1, s);
      if (stay <= switch_cost) {
        cost(t, s) = dist(t, s) + stay;
        prev(t, s) = s;
      } else {
        cost(t, s) = dist(t, s) + switch_cost;
        prev(t, s) = argbest;
      }
    }
  }

  std::vector<int> path(n);
  int state = 0;
  for (int s = 1; s < n; ++s)
    if (cost(n - 1, s) < cost(n - 1, state)) state = s;
  for (int t = n - 1; t >= 0; --t) {
    path[t] = state;
    if (t > 0) state = prev(t, state);
  }

  Segmentation seg;
  seg.n_epochs = n;
  seg.algorithm = "kl";
  for (int t = 1; t < n; ++t) {
    if (path[t] != path[t - 1]) {
      seg.boundaries.push_back(t);
      seg.scores.push_back(dist(path[t - 1], path[t]));
    }
  }
  return seg;
}

Segmentation kohlmorgen_lemm(const TimeSeries& ts, const KlParams& params) {
  if (params.W < 1) throw InvalidArgument("kohlmorgen_lemm: window must be positive");
  if (!(params.C >= 0.0)) throw DomainError("kohlmorgen_lemm: penalty must be nonnegative");
  if (ts.T() < 2 * params.W)
    throw TooFewSamples("kohlmorgen_lemm: need at least two windows of data");
  const double sigma = params.sigma ? *params.sigma : kl_sigma_heuristic(ts);
  if (!(sigma > 0.0)) throw DomainError("kohlmorgen_lemm: sigma must be positive");
  return kl_state_path(kl_distance_matrix(ts, params.W, sigma), params.C);
}

}  // namespace nonstat::cpd
