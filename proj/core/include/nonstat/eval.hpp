#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nonstat/classify.hpp"
#include "nonstat/cpd.hpp"
#include "nonstat/ssa.hpp"
#include "nonstat/synthgen.hpp"

namespace nonstat::eval {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Points sorted by false-positive rate, endpoints (0,0) and (1,1) included,
/// at most one point per distinct false-positive rate (the best one).
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Score a threshold sweep of segmentations against the true boundaries.
/// A detected boundary counts as a hit only at the exact epoch index; the
/// false-positive rate is taken over the remaining candidate boundaries.
RocCurve roc_from_sweep(const std::vector<cpd::Segmentation>& sweep,
                        const std::vector<int>& true_boundaries, int n_epochs);

/// Area under the curve by the trapezoid rule.
double auc(const RocCurve& curve);

/// Largest principal angle, in radians, between the column spans of a and b.
double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Density at theta, on [0, pi/2], of the angle between a fixed direction and
/// a uniformly random one in D dimensions: sin^(D-2)(theta) normalized.
double random_angle_density(double theta, int D);

struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

/// Linearly interpolated quartiles of a sample.
Quartiles quartiles(std::vector<double> values);

/// Map sample-index boundaries onto a division into fixed-length epochs.
/// Each sample boundary t becomes epoch boundary floor(t / epoch_len),
/// clamped into [1, n_epochs - 1]; duplicates collapse.
std::vector<int> snap_to_epochs(const std::vector<int>& sample_boundaries,
                                int epoch_len, int n_epochs);

enum class Detector { Slcd, Cusum, Kl };

/// Input fed to the detector: the raw channels, the estimated most
/// non-stationary projection, or a random projection of matching size.
enum class Arm { Baseline, Ssa, Random };

struct CpdExperiment {
  synth::CpdSpec data;
  Detector detector = Detector::Slcd;
  std::vector<Arm> arms = {Arm::Baseline, Arm::Ssa, Arm::Random};
  int n_realizations = 30;
  /// Threshold sweep: cluster counts (slcd), detection thresholds (cusum) or
  /// switch-penalty scale factors (kl). Empty selects a per-detector default.
  std::vector<double> taus;
  int cusum_W = 50;
  ssa::Config ssa_config;
  int jobs = 1;
};

struct ArmSummary {
  Arm arm = Arm::Baseline;
  std::vector<double> aucs;  // one per realization
  Quartiles auc_quartiles;
};

/// For each realization, generate data, prepare every arm's view of it, sweep
/// the detector threshold, and score the sweep against the true boundaries.
/// Multichannel input to the sample-wise variance detector is scored per
/// channel and the best channel kept.
std::vector<ArmSummary> run_cpd_experiment(const CpdExperiment& e);

enum class Method { Lda, Rlda, GradLda, RandLda, Slda, SldaCv };

struct ClassifExperiment {
  synth::ClassifSpec data;
  std::vector<Method> methods = {Method::Lda, Method::Slda};
  double alpha = 0.1;  ///< tradeoff weight for the penalized methods
  std::vector<double> cv_alphas = {0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  int cv_folds = 5;
  int n_realizations = 100;
  classify::TradeoffConfig config;
  int jobs = 1;
};

struct MethodSummary {
  Method method = Method::Lda;
  std::vector<double> errors;      // test error per realization
  std::vector<double> angles_deg;  // vs the separable stationary directions;
                                   // empty when the variant defines none
  double mean_error = 0.0;
  Quartiles error_quartiles;
  double median_angle_deg = 0.0;  // NaN when angles are undefined
};

std::vector<MethodSummary> run_classif_experiment(const ClassifExperiment& e);

const char* to_string(Detector d);
const char* to_string(Arm a);
const char* to_string(Method m);

/// Inverses of to_string; throw InvalidArgument on unknown names.
Detector detector_from_string(const std::string& name);
Method method_from_string(const std::string& name);

}  // namespace nonstat::eval
