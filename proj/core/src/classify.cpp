#include "nonstat/classify.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>

#include "nonstat/errors.hpp"
#include "nonstat/rng.hpp"

namespace nonstat::classify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_labels(const TimeSeries& ts) {
  if (!ts.labeled()) throw InvalidArgument("labeled data required");
  for (int l : ts.labels)
    if (l != 1 && l != 2) throw InvalidArgument("labels must be 1 or 2");
}

GaussianParams moments_of_rows(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw TooFewSamples("need at least two samples per class");
  GaussianParams g;
  g.mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
  return g;
}

Eigen::MatrixXd rows_of_class(const TimeSeries& ts, int begin, int end, int cls) {
  int n = 0;
  for (int t = begin; t < end; ++t)
    if (ts.labels[static_cast<std::size_t>(t)] == cls) ++n;
  Eigen::MatrixXd out(n, ts.D());
  int r = 0;
  for (int t = begin; t < end; ++t)
    if (ts.labels[static_cast<std::size_t>(t)] == cls) out.row(r++) = ts.data.row(t);
  return out;
}

double bias_for(const Eigen::VectorXd& w, const GaussianParams& c1,
                const GaussianParams& c2, BiasConvention convention) {
  const double full = -w.dot(c1.mean + c2.mean);
  return convention == BiasConvention::Halved ? 0.5 * full : full;
}

void orient_toward_class1(Eigen::VectorXd& w, const GaussianParams& c1,
                          const GaussianParams& c2) {
  if (w.dot(c1.mean - c2.mean) < 0.0) w = -w;
}

/// Projected gradient ascent on the unit sphere with Armijo backtracking and
/// random restarts; ties between restarts keep the earliest. When a warm start
/// is given it replaces the first restart's random initial direction.
Eigen::VectorXd sphere_maximize(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient, int d,
    const TradeoffConfig& cfg, const Eigen::VectorXd* warm_start = nullptr) {
  Eigen::VectorXd best_w;
  double best = -kInf;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(restart));
    Eigen::VectorXd w;
    if (restart == 0 && warm_start != nullptr && warm_start->norm() > 1e-12) {
      w = *warm_start;
    } else {
      w = rng.normal_vector(d);
      while (w.norm() < 1e-12) w = rng.normal_vector(d);
    }
    w.normalize();
    double current = value(w);
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
      const Eigen::VectorXd g = gradient(w);
      const Eigen::VectorXd tangent = g - g.dot(w) * w;
      const double slope = tangent.squaredNorm();
      if (std::sqrt(slope) < cfg.tolerance) break;
      double eps = cfg.initial_step;
      bool accepted = false;
      for (int halving = 0; halving < 60; ++halving) {
        const Eigen::VectorXd trial = (w + eps * tangent).normalized();
        const double trial_value = value(trial);
        if (trial_value >= current + cfg.armijo_slope * eps * slope) {
          w = trial;
          current = trial_value;
          accepted = true;
          break;
        }
        eps *= cfg.backtrack;
      }
      if (!accepted) break;
    }
    if (current > best + 1e-12) {
      best = current;
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace

int predict(const LinearClassifier& c, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != c.w.size())
    throw DimensionMismatch("predict: sample and classifier dimensions differ");
  return c.w.dot(x) + c.b > 0.0 ? 1 : 2;
}

double test_error(const LinearClassifier& c, const TimeSeries& labeled) {
  check_labels(labeled);
  int wrong = 0;
  for (int t = 0; t < labeled.T(); ++t) {
    if (predict(c, labeled.data.row(t).transpose()) !=
        labeled.labels[static_cast<std::size_t>(t)])
      ++wrong;
  }
  return static_cast<double>(wrong) / labeled.T();
}

ClassEpochStats class_epoch_stats(const TimeSeries& labeled, int n_epochs) {
  check_labels(labeled);
  if (n_epochs < 1) throw InvalidArgument("class_epoch_stats: n_epochs must be positive");
  EpochPartition part;
  if (labeled.partition && labeled.partition->n_epochs() == n_epochs) {
    part = *labeled.partition;
  } else {
    const int len = labeled.T() / n_epochs;
    if (len < 4) throw TooFewSamples("class_epoch_stats: epochs too short");
    for (int i = 0; i < n_epochs; ++i)
      part.ranges.emplace_back(i * len, i + 1 == n_epochs ? labeled.T() : (i + 1) * len);
  }

  ClassEpochStats stats;
  stats.epochs.reserve(part.ranges.size());
  for (const auto& [begin, end] : part.ranges) {
    stats.epochs.push_back({moments_of_rows(rows_of_class(labeled, begin, end, 1)),
                            moments_of_rows(rows_of_class(labeled, begin, end, 2))});
  }
  for (int cls : {1, 2}) {
    const Eigen::MatrixXd rows = rows_of_class(labeled, 0, labeled.T(), cls);
    stats.pooled[cls - 1] = moments_of_rows(rows);
    stats.pooled_counts[cls - 1] = static_cast<int>(rows.rows());
  }
  return stats;
}

LinearClassifier lda_train(const GaussianParams& class1, const GaussianParams& class2) {
  if (class1.dim() != class2.dim())
    throw DimensionMismatch("lda_train: class dimensions differ");
  const Eigen::MatrixXd s = class1.cov + class2.cov;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("lda_train: pooled within-class covariance singular");
  const Eigen::VectorXd diff = class1.mean - class2.mean;
  LinearClassifier c;
  c.w = llt.solve(diff);
  const double scale = std::max(1.0, class1.mean.norm() + class2.mean.norm());
  if (c.w.norm() < 1e-12 * scale)
    throw DegenerateSeparation("lda_train: class means coincide");
  c.b = bias_for(c.w, class1, class2, BiasConvention::Halved);
  c.method = "lda";
  return c;
}

LinearClassifier lda_train(const TimeSeries& labeled) {
  const ClassEpochStats stats = class_epoch_stats(labeled, 1);
  return lda_train(stats.pooled[0], stats.pooled[1]);
}

double fisher_ratio(const Eigen::VectorXd& w, const GaussianParams& class1,
                    const GaussianParams& class2) {
  if (w.size() != class1.dim() || class1.dim() != class2.dim())
    throw DimensionMismatch("fisher_ratio: dimensions differ");
  if (w.norm() < 1e-300) throw ZeroVector("fisher_ratio: w must be nonzero");
  const double denom = w.dot((class1.cov + class2.cov) * w);
  if (!(denom > 0.0)) throw DegenerateVariance("fisher_ratio: zero projected variance");
  const double sep = w.dot(class1.mean - class2.mean);
  return sep * sep / denom;
}

double phi_ns(const Eigen::VectorXd& w, const GaussianParams& epoch,
              const GaussianParams& pooled) {
  if (w.size() != epoch.dim() || epoch.dim() != pooled.dim())
    throw DimensionMismatch("phi_ns: dimensions differ");
  const double q = w.dot(pooled.cov * w);
  const double p = w.dot(epoch.cov * w);
  if (!(q > 0.0 && p > 0.0)) throw DegenerateVariance("phi_ns: zero projected variance");
  const double shift = w.dot(epoch.mean - pooled.mean);
  const double r = p / q;
  return shift * shift / (2.0 * q) + 0.5 * (r - 1.0 - std::log(r));
}

double slda_loss(const Eigen::VectorXd& w, double alpha, const ClassEpochStats& stats) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw DomainError("slda_loss: alpha must lie in [0, 1]");
  double loss = alpha * std::sqrt(fisher_ratio(w, stats.pooled[0], stats.pooled[1]));
  if (alpha < 1.0) {
    double penalty = 0.0;
    for (const auto& epoch : stats.epochs)
      for (int j = 0; j < 2; ++j) penalty += phi_ns(w, epoch[j], stats.pooled[j]);
    // Average over the epoch-class terms: each term carries an estimation-noise
    // floor of its own, so a plain sum would grow with the epoch count and let
    // noise swamp the separation term. The mean keeps alpha comparable across
    // epoch counts.
    loss -= (1.0 - alpha) * penalty / (2.0 * stats.n_epochs());
  }
  return loss;
}

Eigen::VectorXd slda_gradient(const Eigen::VectorXd& w, double alpha,
                              const ClassEpochStats& stats) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw DomainError("slda_gradient: alpha must lie in [0, 1]");
  const int d = stats.dim();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);

  const Eigen::VectorXd diff = stats.pooled[0].mean - stats.pooled[1].mean;
  const Eigen::MatrixXd s = stats.pooled[0].cov + stats.pooled[1].cov;
  const double sep = w.dot(diff);
  const double qs = w.dot(s * w);
  if (!(qs > 0.0)) throw DegenerateVariance("slda_gradient: zero projected variance");
  if (sep != 0.0) {
    const double root = std::abs(sep) / std::sqrt(qs);
    // gradient of sqrt(fisher) = sign(sep)/sqrt(qs) * diff - root/qs * S w
    grad += alpha * ((sep > 0 ? 1.0 : -1.0) / std::sqrt(qs) * diff - root / qs * (s * w));
  }

  if (alpha < 1.0) {
    Eigen::VectorXd penalty = Eigen::VectorXd::Zero(d);
    for (const auto& epoch : stats.epochs) {
      for (int j = 0; j < 2; ++j) {
        const GaussianParams& e = epoch[j];
        const GaussianParams& pool = stats.pooled[j];
        const double q = w.dot(pool.cov * w);
        const double p = w.dot(e.cov * w);
        if (!(q > 0.0 && p > 0.0))
          throw DegenerateVariance("slda_gradient: zero projected variance");
        const Eigen::VectorXd delta = e.mean - pool.mean;
        const double u = w.dot(delta);
        const Eigen::VectorXd pool_cw = pool.cov * w;
        const Eigen::VectorXd epoch_cw = e.cov * w;
        penalty += u / q * delta - u * u / (q * q) * pool_cw;
        penalty += (1.0 - q / p) * (epoch_cw / q - p / (q * q) * pool_cw);
      }
    }
    grad -= (1.0 - alpha) * penalty / (2.0 * stats.n_epochs());
  }
  return grad;
}

LinearClassifier slda_train(const TimeSeries& labeled, const TradeoffConfig& cfg) {
  const int n_epochs = cfg.alpha == 1.0 ? 1 : cfg.n_epochs;
  const ClassEpochStats stats = class_epoch_stats(labeled, n_epochs);

  // Start the first ascent at the plain discriminant direction: the separating
  // basin is the one worth refining, and a purely random start can settle on a
  // direction that is merely quiet across epochs but separates nothing.
  Eigen::VectorXd warm;
  try {
    warm = lda_train(stats.pooled[0], stats.pooled[1]).w.normalized();
  } catch (const Error&) {
    // Fall back to random starts when the discriminant itself is undefined.
  }

  LinearClassifier c;
  c.w = sphere_maximize(
      [&](const Eigen::VectorXd& w) { return slda_loss(w, cfg.alpha, stats); },
      [&](const Eigen::VectorXd& w) { return slda_gradient(w, cfg.alpha, stats); },
      stats.dim(), cfg, warm.size() > 0 ? &warm : nullptr);
  orient_toward_class1(c.w, stats.pooled[0], stats.pooled[1]);
  c.b = bias_for(c.w, stats.pooled[0], stats.pooled[1], cfg.bias);
  c.alpha = cfg.alpha;
  c.method = "slda";
  return c;
}

LinearClassifier slda_cv_train(const TimeSeries& labeled,
                               const std::vector<double>& alphas, int n_folds,
                               const TradeoffConfig& cfg) {
  check_labels(labeled);
  if (alphas.empty()) throw InvalidArgument("slda_cv_train: no alphas given");
  if (n_folds < 2) throw InvalidArgument("slda_cv_train: need at least two folds");

  EpochPartition part;
  if (labeled.partition && labeled.partition->n_epochs() == cfg.n_epochs) {
    part = *labeled.partition;
  } else {
    const int len = labeled.T() / cfg.n_epochs;
    if (len < 4) throw TooFewSamples("slda_cv_train: epochs too short");
    for (int i = 0; i < cfg.n_epochs; ++i)
      part.ranges.emplace_back(i * len,
                               i + 1 == cfg.n_epochs ? labeled.T() : (i + 1) * len);
  }

  // Stratified assignment: shuffle within every (epoch, class) cell and deal
  // round-robin, so each fold sees every epoch and class.
  std::vector<int> fold_of(static_cast<std::size_t>(labeled.T()), 0);
  std::uint64_t cell = 0;
  for (const auto& [begin, end] : part.ranges) {
    for (int cls : {1, 2}) {
      std::vector<int> idx;
      for (int t = begin; t < end; ++t)
        if (labeled.labels[static_cast<std::size_t>(t)] == cls) idx.push_back(t);
      Rng rng(cfg.seed, 0xF01Du + cell++);
      const std::vector<int> order = rng.permutation(static_cast<int>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i)
        fold_of[static_cast<std::size_t>(idx[order[i]])] = static_cast<int>(i) % n_folds;
    }
  }

  const auto subset = [&](int fold, bool keep_fold) {
    TimeSeries out;
    EpochPartition out_part;
    std::vector<Eigen::Index> rows;
    int offset = 0;
    for (const auto& [begin, end] : part.ranges) {
      int count = 0;
      for (int t = begin; t < end; ++t) {
        if ((fold_of[static_cast<std::size_t>(t)] == fold) == keep_fold) {
          rows.push_back(t);
          ++count;
        }
      }
      out_part.ranges.emplace_back(offset, offset + count);
      offset += count;
    }
    out.data.resize(static_cast<Eigen::Index>(rows.size()), labeled.D());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.data.row(static_cast<Eigen::Index>(i)) = labeled.data.row(rows[i]);
      out.labels[i] = labeled.labels[static_cast<std::size_t>(rows[i])];
    }
    out.partition = out_part;
    return out;
  };

  double best_err = kInf;
  double best_alpha = alphas.front();
  for (double alpha : alphas) {
    TradeoffConfig fold_cfg = cfg;
    fold_cfg.alpha = alpha;
    int wrong = 0, total = 0;
    for (int f = 0; f < n_folds; ++f) {
      const TimeSeries train = subset(f, false);
      const TimeSeries validation = subset(f, true);
      if (validation.T() == 0) continue;
      const LinearClassifier model = slda_train(train, fold_cfg);
      for (int t = 0; t < validation.T(); ++t) {
        if (predict(model, validation.data.row(t).transpose()) !=
            validation.labels[static_cast<std::size_t>(t)])
          ++wrong;
        ++total;
      }
    }
    const double err = total ? static_cast<double>(wrong) / total : kInf;
    if (err < best_err - 1e-12 || (std::abs(err - best_err) <= 1e-12 && alpha > best_alpha)) {
      best_err = err;
      best_alpha = alpha;
    }
  }

  TradeoffConfig final_cfg = cfg;
  final_cfg.alpha = best_alpha;
  LinearClassifier c = slda_train(labeled, final_cfg);
  c.method = "slda_cv";
  return c;
}

LinearClassifier rand_lda_train(const TimeSeries& labeled, const TradeoffConfig& cfg) {
  const ClassEpochStats stats = class_epoch_stats(labeled, 1);
  const int d = stats.dim();
  Rng rng(cfg.seed, 0x52414e44u);
  Eigen::MatrixXd r(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = rng.uniform();
  const Eigen::MatrixXd sym = 0.5 * (r + r.transpose());

  LinearClassifier c;
  c.w = sphere_maximize(
      [&](const Eigen::VectorXd& w) {
        double loss =
            cfg.alpha * std::sqrt(fisher_ratio(w, stats.pooled[0], stats.pooled[1]));
        return loss - (1.0 - cfg.alpha) * w.dot(sym * w);
      },
      [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd g = slda_gradient(w, 1.0, stats) * cfg.alpha;
        g -= (1.0 - cfg.alpha) * 2.0 * (sym * w);
        return g;
      },
      d, cfg);
  orient_toward_class1(c.w, stats.pooled[0], stats.pooled[1]);
  c.b = bias_for(c.w, stats.pooled[0], stats.pooled[1], cfg.bias);
  c.alpha = cfg.alpha;
  c.method = "randlda";
  return c;
}

LinearClassifier rlda_train(const TimeSeries& labeled, std::optional<double> gamma) {
  check_labels(labeled);
  std::array<GaussianParams, 2> shrunk;
  for (int cls : {1, 2}) {
    const Eigen::MatrixXd rows = rows_of_class(labeled, 0, labeled.T(), cls);
    GaussianParams g = moments_of_rows(rows);
    const double strength = gamma ? *gamma : ledoit_wolf_gamma(rows);
    g.cov = shrinkage_cov(g.cov, strength);
    shrunk[cls - 1] = std::move(g);
  }
  LinearClassifier c = lda_train(shrunk[0], shrunk[1]);
  c.method = "rlda";
  return c;
}

}  // namespace nonstat::classify
