#include "nonstat/stationarity.hpp"

#include <cmath>

#include "nonstat/errors.hpp"
#include "nonstat/linalg.hpp"
#include "nonstat/rng.hpp"

namespace nonstat {

namespace {

// Regularized lower incomplete gamma P(a, x) by series expansion, for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction,
// for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double heldout_stationary_loss(const TimeSeries& train, const TimeSeries& test, int ds,
                               int n_epochs, const ssa::Config& cfg) {
  const EpochPartition test_part = partition_epochs(test, n_epochs);
  if (ds == train.D()) {
    // Full-dimensional case: the loss is invariant under rotations, so no
    // optimization is needed.
    const WhiteningTransform wt =
        whitening_transform(train, partition_epochs(train, n_epochs));
    const EpochStats stats = epoch_moments(apply(wt, test), test_part);
    return ssa::ssa_loss(Eigen::MatrixXd::Identity(train.D(), train.D()), stats);
  }
  const ssa::Solution sol = ssa::find_stationary(train, ds, n_epochs, cfg);
  const EpochStats stats = epoch_moments(apply(sol.whitening, test), test_part);
  return ssa::ssa_loss(sol.projection.basis(), stats);
}

TimeSeries permute_rows(const TimeSeries& ts, Rng& rng) {
  const std::vector<int> order = rng.permutation(ts.T());
  TimeSeries out;
  out.data.resize(ts.T(), ts.D());
  for (int t = 0; t < ts.T(); ++t) out.data.row(t) = ts.data.row(order[t]);
  return out;
}

TimeSeries take_rows(const TimeSeries& ts, int begin, int end) {
  TimeSeries out;
  out.data = ts.data.middleRows(begin, end - begin);
  return out;
}

}  // namespace

double chi2_sf(double x, int k) {
  if (k < 1) throw DomainError("chi2_sf: degrees of freedom must be positive");
  if (x < 0.0) throw DomainError("chi2_sf: x must be nonnegative");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * k;
  const double hx = 0.5 * x;
  if (hx < a + 1.0) return 1.0 - gamma_p_series(a, hx);
  return gamma_q_cf(a, hx);
}

double lr_statistic(const EpochStats& stats, LrConstant constant) {
  if (stats.n_epochs() == 0) throw InvalidArgument("lr_statistic: no epochs");
  const int d = stats.dim();
  double total = 0.0;
  for (int i = 0; i < stats.n_epochs(); ++i) {
    const GaussianParams& g = stats.epochs[i];
    const double n = static_cast<double>(stats.counts[i]);
    total += n * (-logdet_spd(g.cov) + g.mean.squaredNorm() + g.cov.trace());
  }
  const double c = (constant == LrConstant::TotalSamples)
                       ? static_cast<double>(stats.total_samples())
                       : static_cast<double>(stats.n_epochs());
  return total - d * c;
}

int dof(int n_epochs, int d) {
  if (n_epochs < 1 || d < 1) throw DomainError("dof: arguments must be positive");
  return n_epochs * d * (d + 3) / 2;
}

LrTestResult lr_test(const EpochStats& stats) {
  LrTestResult r;
  r.lambda = lr_statistic(stats);
  r.dof = dof(stats.n_epochs(), stats.dim());
  r.p_value = chi2_sf(std::max(r.lambda, 0.0), r.dof);
  return r;
}

DsSelection select_ds(const TimeSeries& ts, int n_epochs, double threshold,
                      const ssa::Config& cfg) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw DomainError("select_ds: threshold must lie in (0, 1)");
  const int D = ts.D();
  if (D < 2) throw InvalidDimension("select_ds: need at least two channels");
  const EpochPartition part = partition_epochs(ts, n_epochs);
  const WhiteningTransform wt = whitening_transform(ts, part);
  const EpochStats stats = epoch_moments(apply(wt, ts), part);

  DsSelection sel;
  sel.threshold = threshold;
  sel.per_ds.reserve(D - 1);
  for (int ds = 1; ds < D; ++ds) {
    const ssa::Solution sol = ssa::optimize(stats, ds, ssa::Kind::Stationary, cfg);
    const Eigen::MatrixXd B = sol.projection.basis();
    EpochStats projected;
    projected.counts = stats.counts;
    projected.epochs.reserve(stats.n_epochs());
    for (const GaussianParams& g : stats.epochs)
      projected.epochs.push_back({B * g.mean, B * g.cov * B.transpose()});
    const LrTestResult res = lr_test(projected);
    if (res.p_value >= threshold) sel.chosen_ds = ds;
    sel.per_ds.push_back(res);
  }
  return sel;
}

double bnise(const TimeSeries& ts, int d, int n_permutations, const ssa::Config& cfg,
             int n_epochs_per_half) {
  if (n_permutations < 2) throw InvalidArgument("bnise: need at least two permutations");
  if (d < 1 || d >= ts.D()) throw InvalidDimension("bnise: need 1 <= d < D");
  const int half = ts.T() / 2;

  const auto heldout = [&](const TimeSeries& series, int ds) {
    return heldout_stationary_loss(take_rows(series, 0, half),
                                   take_rows(series, half, ts.T()), ds,
                                   n_epochs_per_half, cfg);
  };

  double total = 0.0;
  for (int j = 0; j < d; ++j) {
    const int ds = ts.D() - j;
    const double observed = heldout(ts, ds);
    double sum = 0.0, sumsq = 0.0;
    for (int p = 0; p < n_permutations; ++p) {
      Rng rng(cfg.seed, 0x9e3779b900000000ull + static_cast<std::uint64_t>(p));
      const double l = heldout(permute_rows(ts, rng), ds);
      sum += l;
      sumsq += l * l;
    }
    const double n = static_cast<double>(n_permutations);
    const double mean = sum / n;
    const double var = (sumsq - n * mean * mean) / (n - 1.0);
    if (!(var > 1e-24))
      throw DegenerateVariance("bnise: permutation baseline has no spread");
    total += (observed - mean) / std::sqrt(var);
  }
  return total;
}

}  // namespace nonstat
