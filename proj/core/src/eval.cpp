#include "nonstat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

#include "nonstat/errors.hpp"
#include "nonstat/stats.hpp"

namespace nonstat::eval {

namespace {

// Distinct odd salts keep the derived RNG streams of the optimizer, the
// random projection and the data generator apart.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt, int index) {
  std::uint64_t x = seed + salt + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// Run fn(0..n-1) with at most `jobs` concurrent evaluations.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  for (int base = 0; base < n; base += jobs) {
    const int end = std::min(n, base + jobs);
    std::vector<std::future<void>> wave;
    wave.reserve(end - base);
    for (int i = base; i < end; ++i)
      wave.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : wave) f.get();
  }
}

double interp_quantile(const std::vector<double>& sorted, double p) {
  const int n = static_cast<int>(sorted.size());
  if (n == 1) return sorted[0];
  const double h = p * (n - 1);
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

RocCurve roc_from_sweep(const std::vector<cpd::Segmentation>& sweep,
                        const std::vector<int>& true_boundaries, int n_epochs) {
  if (true_boundaries.empty())
    throw NoTrueBoundaries("roc_from_sweep: no true boundaries to score against");
  if (n_epochs < 2) throw InvalidArgument("roc_from_sweep: need at least two epochs");

  std::vector<int> truth = true_boundaries;
  std::sort(truth.begin(), truth.end());
  const double n_true = static_cast<double>(truth.size());
  const double n_false = static_cast<double>(n_epochs - 1) - n_true;

  std::vector<RocPoint> raw;
  raw.push_back({0.0, 0.0});
  raw.push_back({1.0, 1.0});
  for (const auto& seg : sweep) {
    int tp = 0;
    for (int b : seg.boundaries)
      if (std::binary_search(truth.begin(), truth.end(), b)) ++tp;
    const int fp = static_cast<int>(seg.boundaries.size()) - tp;
    RocPoint p;
    p.tpr = tp / n_true;
    p.fpr = n_false > 0.0 ? fp / n_false : 0.0;
    raw.push_back(p);
  }

  std::sort(raw.begin(), raw.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
  });
  RocCurve curve;
  for (const auto& p : raw) {
    if (!curve.points.empty() && curve.points.back().fpr == p.fpr)
      curve.points.back().tpr = p.tpr;  // sorted, so p.tpr is the larger
    else
      curve.points.push_back(p);
  }
  return curve;
}

double auc(const RocCurve& curve) {
  if (curve.points.size() < 2)
    throw InvalidArgument("auc: curve needs at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return area;
}

double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows())
    throw DimensionMismatch("subspace_angle: ambient dimensions differ");
  if (a.cols() < 1 || b.cols() < 1 || a.cols() > a.rows() || b.cols() > b.rows())
    throw InvalidDimension("subspace_angle: spans must have 1..D columns");

  const auto orthonormalize = [](const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ() *
                           Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  };
  const Eigen::MatrixXd qa = orthonormalize(a);
  const Eigen::MatrixXd qb = orthonormalize(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
  const double smallest = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smallest, -1.0, 1.0));
}

double random_angle_density(double theta, int D) {
  if (D < 2) throw InvalidDimension("random_angle_density: need D >= 2");
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2.0 + 1e-12))
    throw DomainError("random_angle_density: theta outside [0, pi/2]");
  // Wallis integral of sin^n over [0, pi/2] by the usual recurrence.
  double wallis = (D - 2) % 2 == 0 ? std::numbers::pi / 2.0 : 1.0;
  for (int n = (D - 2) % 2 + 2; n <= D - 2; n += 2) wallis *= (n - 1.0) / n;
  return std::pow(std::sin(theta), D - 2) / wallis;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("quartiles: empty sample");
  std::sort(values.begin(), values.end());
  Quartiles q;
  q.q25 = interp_quantile(values, 0.25);
  q.median = interp_quantile(values, 0.5);
  q.q75 = interp_quantile(values, 0.75);
  return q;
}

std::vector<int> snap_to_epochs(const std::vector<int>& sample_boundaries,
                                int epoch_len, int n_epochs) {
  if (epoch_len < 1) throw InvalidArgument("snap_to_epochs: epoch_len must be positive");
  if (n_epochs < 2) throw InvalidArgument("snap_to_epochs: need at least two epochs");
  std::vector<int> out;
  for (int t : sample_boundaries)
    out.push_back(std::clamp(t / epoch_len, 1, n_epochs - 1));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<double> default_taus(Detector detector) {
  std::vector<double> taus;
  switch (detector) {
    case Detector::Slcd:
      for (int k = 2; k <= 10; ++k) taus.push_back(k);
      break;
    case Detector::Cusum:
      // log-spaced thresholds on the log likelihood ratio
      for (int i = 0; i < 20; ++i)
        taus.push_back(0.5 * std::pow(400.0, i / 19.0));
      break;
    case Detector::Kl:
      // log-spaced multiples of the typical window distance
      for (int i = 0; i < 20; ++i)
        taus.push_back(1e-2 * std::pow(1e4, i / 19.0));
      break;
  }
  return taus;
}

double median_positive(const Eigen::MatrixXd& dist) {
  std::vector<double> v;
  const int n = static_cast<int>(dist.rows());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(i, j) > 0.0) v.push_back(dist(i, j));
  if (v.empty()) return 1.0;
  return quartiles(std::move(v)).median;
}

// Best-channel AUC of the sample-wise variance detector.
double cusum_arm_auc(const TimeSeries& ts, const CpdExperiment& e,
                     const std::vector<double>& taus,
                     const std::vector<int>& truth) {
  const int epoch_len = e.data.epoch_len;
  double best = -1.0;
  for (int chan = 0; chan < ts.D(); ++chan) {
    const Eigen::VectorXd signal = ts.data.col(chan);
    const double mean = signal.mean();
    const double var =
        (signal.array() - mean).square().sum() / (signal.size() - 1.0);
    cpd::CusumParams params;
    params.W = e.cusum_W;
    params.theta_grid.resize(16);
    for (int i = 0; i < 16; ++i)
      params.theta_grid[i] = var * (0.25 + 3.75 * i / 15.0);

    std::vector<cpd::Segmentation> sweep;
    for (double h : taus) {
      params.h = h;
      cpd::Segmentation raw = cusum_weighted(signal, params);
      cpd::Segmentation snapped;
      snapped.n_epochs = e.data.n_epochs;
      snapped.algorithm = raw.algorithm;
      snapped.boundaries = snap_to_epochs(raw.boundaries, epoch_len, e.data.n_epochs);
      sweep.push_back(std::move(snapped));
    }
    best = std::max(best, auc(roc_from_sweep(sweep, truth, e.data.n_epochs)));
  }
  return best;
}

double detector_auc(const TimeSeries& ts, const CpdExperiment& e,
                    const std::vector<double>& taus,
                    const std::vector<int>& truth) {
  std::vector<cpd::Segmentation> sweep;
  switch (e.detector) {
    case Detector::Slcd: {
      const EpochStats stats =
          epoch_moments(ts, partition_epochs(ts, e.data.n_epochs));
      const Eigen::MatrixXd dist = cpd::epoch_distance_matrix(stats);
      for (double tau : taus) {
        const int k = std::clamp(static_cast<int>(std::lround(tau)), 1,
                                 e.data.n_epochs);
        sweep.push_back(cpd::slcd_from_distances(dist, k));
      }
      break;
    }
    case Detector::Kl: {
      const double sigma = cpd::kl_sigma_heuristic(ts);
      const Eigen::MatrixXd dist =
          cpd::kl_distance_matrix(ts, e.data.epoch_len, sigma);
      const double scale = median_positive(dist);
      for (double tau : taus)
        sweep.push_back(cpd::kl_state_path(dist, tau * scale));
      break;
    }
    case Detector::Cusum:
      return cusum_arm_auc(ts, e, taus, truth);
  }
  return auc(roc_from_sweep(sweep, truth, e.data.n_epochs));
}

}  // namespace

std::vector<ArmSummary> run_cpd_experiment(const CpdExperiment& e) {
  if (e.n_realizations < 1)
    throw InvalidArgument("run_cpd_experiment: need at least one realization");
  if (e.arms.empty()) throw InvalidArgument("run_cpd_experiment: no arms");
  const std::vector<double> taus = e.taus.empty() ? default_taus(e.detector) : e.taus;

  std::vector<ArmSummary> out(e.arms.size());
  for (std::size_t a = 0; a < e.arms.size(); ++a) {
    out[a].arm = e.arms[a];
    out[a].aucs.assign(e.n_realizations, 0.0);
  }

  parallel_for(e.n_realizations, e.jobs, [&](int r) {
    auto [ts, truth] = synth::gen_cpd_dataset(e.data, static_cast<std::uint64_t>(r));
    for (std::size_t a = 0; a < e.arms.size(); ++a) {
      TimeSeries view;
      switch (e.arms[a]) {
        case Arm::Baseline:
          view = ts;
          break;
        case Arm::Ssa: {
          ssa::Config cfg = e.ssa_config;
          cfg.seed = mix_seed(e.ssa_config.seed, 0x55Aull, r);
          view = ssa::project(
              ssa::find_most_nonstationary(ts, e.data.d_n, e.data.n_epochs, cfg), ts);
          break;
        }
        case Arm::Random:
          view = ssa::project(
              ssa::random_projection(e.data.D, e.data.d_n,
                                     mix_seed(e.ssa_config.seed, 0xA11ull, r)),
              ts);
          break;
      }
      out[a].aucs[r] = detector_auc(view, e, taus, truth.boundaries);
    }
  });

  for (auto& arm : out) arm.auc_quartiles = quartiles(arm.aucs);
  return out;
}

std::vector<MethodSummary> run_classif_experiment(const ClassifExperiment& e) {
  if (e.n_realizations < 1)
    throw InvalidArgument("run_classif_experiment: need at least one realization");
  if (e.methods.empty()) throw InvalidArgument("run_classif_experiment: no methods");

  std::vector<MethodSummary> out(e.methods.size());
  for (std::size_t m = 0; m < e.methods.size(); ++m) {
    out[m].method = e.methods[m];
    out[m].errors.assign(e.n_realizations, 0.0);
    out[m].angles_deg.assign(e.n_realizations, 0.0);
  }
  const bool has_truth =
      synth::gen_classif_dataset(e.data, 0).stationary_directions.cols() > 0;

  parallel_for(e.n_realizations, e.jobs, [&](int r) {
    const synth::ClassifDataset ds =
        synth::gen_classif_dataset(e.data, static_cast<std::uint64_t>(r));

    classify::TradeoffConfig cfg = e.config;
    cfg.seed = mix_seed(e.config.seed, 0xC1A55ull, r);
    if (ds.train.partition) cfg.n_epochs = ds.train.partition->n_epochs();

    for (std::size_t m = 0; m < e.methods.size(); ++m) {
      classify::LinearClassifier clf;
      switch (e.methods[m]) {
        case Method::Lda:
          clf = classify::lda_train(ds.train);
          break;
        case Method::Rlda:
          clf = classify::rlda_train(ds.train, std::nullopt);
          break;
        case Method::GradLda: {
          classify::TradeoffConfig c = cfg;
          c.alpha = 1.0;
          clf = classify::slda_train(ds.train, c);
          break;
        }
        case Method::RandLda: {
          classify::TradeoffConfig c = cfg;
          c.alpha = e.alpha;
          clf = classify::rand_lda_train(ds.train, c);
          break;
        }
        case Method::Slda: {
          classify::TradeoffConfig c = cfg;
          c.alpha = e.alpha;
          clf = classify::slda_train(ds.train, c);
          break;
        }
        case Method::SldaCv:
          clf = classify::slda_cv_train(ds.train, e.cv_alphas, e.cv_folds, cfg);
          break;
      }
      out[m].errors[r] = classify::test_error(clf, ds.test);
      if (has_truth)
        out[m].angles_deg[r] = subspace_angle(clf.w, ds.stationary_directions) *
                               180.0 / std::numbers::pi;
    }
  });

  for (auto& summary : out) {
    double sum = 0.0;
    for (double err : summary.errors) sum += err;
    summary.mean_error = sum / summary.errors.size();
    summary.error_quartiles = quartiles(summary.errors);
    if (has_truth) {
      summary.median_angle_deg = quartiles(summary.angles_deg).median;
    } else {
      summary.angles_deg.clear();
      summary.median_angle_deg = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

const char* to_string(Detector d) {
  switch (d) {
    case Detector::Slcd: return "slcd";
    case Detector::Cusum: return "cusum";
    case Detector::Kl: return "kl";
  }
  return "?";
}

const char* to_string(Arm a) {
  switch (a) {
    case Arm::Baseline: return "baseline";
    case Arm::Ssa: return "ssa";
    case Arm::Random: return "random";
  }
  return "?";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Lda: return "lda";
    case Method::Rlda: return "rlda";
    case Method::GradLda: return "gradlda";
    case Method::RandLda: return "randlda";
    case Method::Slda: return "slda";
    case Method::SldaCv: return "slda_cv";
  }
  return "?";
}

Detector detector_from_string(const std::string& name) {
  for (Detector d : {Detector::Slcd, Detector::Cusum, Detector::Kl})
    if (name == to_string(d)) return d;
  throw InvalidArgument("unknown detector: " + name);
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::Lda, Method::Rlda, Method::GradLda, Method::RandLda,
                   Method::Slda, Method::SldaCv})
    if (name == to_string(m)) return m;
  throw InvalidArgument("unknown classifier: " + name);
}

}  // namespace nonstat::eval
