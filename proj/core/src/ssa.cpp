#include "nonstat/ssa.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "nonstat/errors.hpp"
#include "nonstat/linalg.hpp"
#include "nonstat/rng.hpp"

namespace nonstat::ssa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_projection_args(const Eigen::MatrixXd& B, const EpochStats& stats) {
  if (stats.n_epochs() == 0) throw InvalidArgument("ssa_loss: no epochs");
  if (B.rows() < 1 || B.rows() > B.cols())
    throw InvalidDimension("ssa_loss: projection must have 1 <= d <= D rows");
  if (B.cols() != stats.dim())
    throw DimensionMismatch("ssa_loss: projection and stats dimensions differ");
}

/// Loss value that reports +inf instead of throwing on a non-definite
/// projected covariance, for use inside line searches.
double loss_or_inf(const Eigen::MatrixXd& B, const EpochStats& stats) {
  double total = 0.0;
  for (const GaussianParams& g : stats.epochs) {
    const Eigen::MatrixXd s = B * g.cov * B.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return kInf;
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    total += -logdet + (B * g.mean).squaredNorm();
  }
  return total;
}

struct RestartResult {
  Eigen::MatrixXd rotation;
  double objective = kInf;  // sign-adjusted loss
  int iterations = 0;
};

RestartResult run_restart(const EpochStats& stats, int d, double sign, const Config& cfg,
                          Eigen::MatrixXd rotation, int restart_index,
                          const IterationObserver& observer) {
  const auto objective = [&](const Eigen::MatrixXd& r) {
    return sign * loss_or_inf(r.topRows(d), stats);
  };

  if (observer) observer(0, rotation);
  double current = objective(rotation);
  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    const Eigen::MatrixXd B = rotation.topRows(d);
    const Eigen::MatrixXd G = sign * ssa_loss_gradient(B, stats);
    const Eigen::MatrixXd K =
        0.5 * (B.transpose() * G - G.transpose() * B);  // antisymmetric
    const double slope = K.squaredNorm();
    if (std::sqrt(slope) < cfg.gradient_tolerance) break;

    double eps = cfg.initial_step;
    bool accepted = false;
    Eigen::MatrixXd trial;
    double trial_value = kInf;
    for (int halving = 0; halving < 60; ++halving) {
      trial = rotation * matrix_exp(-eps * K);
      trial_value = objective(trial);
      if (trial_value <= current - cfg.armijo_slope * eps * slope) {
        accepted = true;
        break;
      }
      eps *= cfg.backtrack;
    }
    if (!accepted) break;
    rotation = std::move(trial);
    current = trial_value;
    // guard against drift from repeated multiplication
    Eigen::MatrixXd gram = rotation * rotation.transpose();
    gram.diagonal().array() -= 1.0;
    if (gram.cwiseAbs().maxCoeff() > 1e-10)
      rotation = sym_inverse_sqrt(rotation * rotation.transpose()) * rotation;
    if (observer) observer(iter + 1, rotation);
  }
  (void)restart_index;
  return {std::move(rotation), current, iter};
}

Solution find_projection(const TimeSeries& ts, int d, int n_epochs, Kind kind,
                         const Config& cfg) {
  if (d < 1 || d >= ts.D())
    throw InvalidDimension("subspace dimension must satisfy 1 <= d < D");
  const EpochPartition part = ts.partition && ts.partition->n_epochs() == n_epochs
                                  ? *ts.partition
                                  : partition_epochs(ts, n_epochs);
  const WhiteningTransform wt = whitening_transform(ts, part);
  const EpochStats stats = epoch_moments(apply(wt, ts), part);
  Solution sol = optimize(stats, d, kind, cfg);
  sol.whitening = wt;
  return sol;
}

}  // namespace

double ssa_loss(const Eigen::MatrixXd& B, const EpochStats& stats) {
  check_projection_args(B, stats);
  double total = 0.0;
  for (const GaussianParams& g : stats.epochs) {
    const Eigen::MatrixXd s = B * g.cov * B.transpose();
    total += -logdet_spd(s) + (B * g.mean).squaredNorm();
  }
  return total;
}

Eigen::MatrixXd ssa_loss_gradient(const Eigen::MatrixXd& B, const EpochStats& stats) {
  check_projection_args(B, stats);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(B.rows(), B.cols());
  for (const GaussianParams& g : stats.epochs) {
    const Eigen::MatrixXd bs = B * g.cov;
    const Eigen::MatrixXd s = bs * B.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
      throw SingularCovariance("ssa_loss_gradient: projected covariance not positive definite");
    grad.noalias() += -2.0 * llt.solve(bs);
    grad.noalias() += 2.0 * (B * g.mean) * g.mean.transpose();
  }
  return grad;
}

Solution optimize(const EpochStats& whitened_stats, int d, Kind kind, const Config& cfg,
                  const IterationObserver& observer) {
  const int D = whitened_stats.dim();
  if (d < 1 || d > D)
    throw InvalidDimension("optimize: subspace dimension must satisfy 1 <= d <= D");
  if (cfg.restarts < 1) throw InvalidArgument("optimize: restarts must be positive");
  const double sign = (kind == Kind::NonStationary) ? -1.0 : 1.0;

  Solution sol;
  sol.per_restart_losses.reserve(cfg.restarts);
  double best = kInf;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(r));
    RestartResult res = run_restart(whitened_stats, d, sign, cfg, random_orthogonal(D, rng),
                                    r, observer);
    sol.per_restart_losses.push_back(sign * res.objective);
    if (res.objective < best - 1e-12) {
      best = res.objective;
      sol.projection.rotation = std::move(res.rotation);
      sol.iterations_used = res.iterations;
    }
  }
  sol.projection.d = d;
  sol.projection.kind = kind;
  sol.loss = sign * best;
  sol.whitening.center = Eigen::VectorXd::Zero(D);
  sol.whitening.W = Eigen::MatrixXd::Identity(D, D);
  return sol;
}

Solution find_stationary(const TimeSeries& ts, int ds, int n_epochs, const Config& cfg) {
  return find_projection(ts, ds, n_epochs, Kind::Stationary, cfg);
}

Solution find_most_nonstationary(const TimeSeries& ts, int dn, int n_epochs,
                                 const Config& cfg) {
  return find_projection(ts, dn, n_epochs, Kind::NonStationary, cfg);
}

Projection random_projection(int D, int d, std::uint64_t seed) {
  if (d < 1 || d > D)
    throw InvalidDimension("random_projection: need 1 <= d <= D");
  Rng rng(seed, 0);
  Projection p;
  p.rotation = random_orthogonal(D, rng);
  p.d = d;
  p.kind = Kind::Random;
  return p;
}

TimeSeries project(const Solution& sol, const TimeSeries& ts) {
  return project(sol.projection, apply(sol.whitening, ts));
}

TimeSeries project(const Projection& p, const TimeSeries& ts) {
  if (p.rotation.cols() != ts.D())
    throw DimensionMismatch("project: projection and series dimensions differ");
  TimeSeries out;
  out.data = ts.data * p.basis().transpose();
  out.labels = ts.labels;
  out.partition = ts.partition;
  return out;
}

}  // namespace nonstat::ssa
