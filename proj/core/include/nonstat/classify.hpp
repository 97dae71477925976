#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nonstat/stats.hpp"
#include "nonstat/timeseries.hpp"

namespace nonstat::classify {

/// Two-class linear rule: predict class 1 when w . x + b > 0, else class 2.
struct LinearClassifier {
  Eigen::VectorXd w;
  double b = 0.0;
  double alpha = 1.0;  ///< trade-off weight used in training, 1 for pure LDA
  std::string method;
};

int predict(const LinearClassifier& c, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Fraction of misclassified samples of a labeled series.
double test_error(const LinearClassifier& c, const TimeSeries& labeled);

/// Per-epoch and pooled Gaussian fits of both classes. Labels are 1 and 2.
struct ClassEpochStats {
  std::vector<std::array<GaussianParams, 2>> epochs;
  std::array<GaussianParams, 2> pooled;
  std::array<int, 2> pooled_counts{};

  int n_epochs() const { return static_cast<int>(epochs.size()); }
  int dim() const { return pooled[0].dim(); }
};

/// Fit per-class moments inside n_epochs contiguous equal blocks (or the
/// series' own partition when it matches) plus pooled per-class moments over
/// the whole series. Every block needs two samples of each class.
ClassEpochStats class_epoch_stats(const TimeSeries& labeled, int n_epochs);

enum class BiasConvention {
  Halved,    ///< b = -w . (mean1 + mean2) / 2, boundary at the class midpoint
  Unhalved,  ///< b = -w . (mean1 + mean2)
};

struct TradeoffConfig {
  double alpha = 0.5;  ///< weight on separation; 1 - alpha weighs stationarity
  int n_epochs = 7;
  int restarts = 5;
  int max_iterations = 1000;
  double tolerance = 1e-7;
  double initial_step = 1.0;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  std::uint64_t seed = 0;
  BiasConvention bias = BiasConvention::Halved;
};

/// Closed-form linear discriminant: w = (cov1 + cov2)^{-1} (mean1 - mean2).
LinearClassifier lda_train(const GaussianParams& class1, const GaussianParams& class2);
LinearClassifier lda_train(const TimeSeries& labeled);

/// (w . (mean1 - mean2))^2 / (w . (cov1 + cov2) w).
double fisher_ratio(const Eigen::VectorXd& w, const GaussianParams& class1,
                    const GaussianParams& class2);

/// Non-stationarity of a projected epoch against the projected pooled fit:
/// the KL divergence between the two univariate Gaussians,
/// (w.(m_i - m))^2 / (2 w.C w) + (r - 1 - log r) / 2 with r the variance ratio.
/// Zero exactly when the epoch matches the pooled fit along w.
double phi_ns(const Eigen::VectorXd& w, const GaussianParams& epoch,
              const GaussianParams& pooled);

/// alpha sqrt(fisher) - (1 - alpha) * sum of phi_ns over epochs and classes.
double slda_loss(const Eigen::VectorXd& w, double alpha, const ClassEpochStats& stats);

/// Gradient of slda_loss in w. At zero projected class separation the
/// square-root term contributes nothing.
Eigen::VectorXd slda_gradient(const Eigen::VectorXd& w, double alpha,
                              const ClassEpochStats& stats);

/// Maximize slda_loss over unit vectors by projected gradient ascent with
/// random restarts; alpha = 1 recovers a gradient-trained LDA.
LinearClassifier slda_train(const TimeSeries& labeled, const TradeoffConfig& cfg);

/// Pick alpha by stratified k-fold cross-validation error (ties resolved
/// toward the largest alpha), then retrain on all data.
LinearClassifier slda_cv_train(const TimeSeries& labeled,
                               const std::vector<double>& alphas, int n_folds,
                               const TradeoffConfig& cfg);

/// Control variant: the stationarity penalty is replaced by w . R w for a
/// fixed random matrix R with uniform [0, 1) entries drawn from cfg.seed.
LinearClassifier rand_lda_train(const TimeSeries& labeled, const TradeoffConfig& cfg);

/// LDA on per-class covariances shrunk toward the scaled identity; gamma
/// unset selects the analytic Ledoit-Wolf intensity per class.
LinearClassifier rlda_train(const TimeSeries& labeled, std::optional<double> gamma);

}  // namespace nonstat::classify
