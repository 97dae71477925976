#pragma once

#include <vector>

#include "nonstat/ssa.hpp"
#include "nonstat/stats.hpp"
#include "nonstat/timeseries.hpp"

namespace nonstat {

/// Survival function of the chi-squared distribution with k degrees of
/// freedom: P(X >= x). Series/continued-fraction evaluation of the
/// regularized incomplete gamma function, absolute error below 1e-10.
double chi2_sf(double x, int k);

/// Which additive constant closes the likelihood-ratio statistic.
enum class LrConstant {
  TotalSamples,  ///< subtract d * (total sample count); zero at the exact null
  EpochCount,    ///< subtract d * (number of epochs)
};

/// Twice the log likelihood ratio between the standard normal model and
/// per-epoch Gaussian fits, for stats of centered and whitened data:
/// sum_i N_i (-log det cov_i + |mean_i|^2 + tr cov_i) minus the constant.
double lr_statistic(const EpochStats& stats,
                    LrConstant constant = LrConstant::TotalSamples);

/// Degrees of freedom of the test: N d (d + 3) / 2 for N epochs of
/// d-dimensional data.
int dof(int n_epochs, int d);

struct LrTestResult {
  double lambda = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

LrTestResult lr_test(const EpochStats& stats);

struct DsSelection {
  int chosen_ds = 0;  ///< largest accepted dimension, 0 when all rejected
  double threshold = 0.0;
  std::vector<LrTestResult> per_ds;  ///< entry j tested d_s = j + 1
};

/// For every candidate d_s in 1..D-1, find the most stationary d_s-dimensional
/// projection and test its epoch moments for stationarity; keep the largest
/// candidate whose p-value reaches the threshold.
DsSelection select_ds(const TimeSeries& ts, int n_epochs, double threshold,
                      const ssa::Config& cfg);

/// Cumulative z-score of held-out non-stationarity. For j = 0..d-1 the most
/// stationary (D - j)-dimensional projection is fit on the first half of the
/// series and its loss on the second half is compared against the same
/// quantity on time-permuted data; the standardized excesses are summed.
double bnise(const TimeSeries& ts, int d, int n_permutations, const ssa::Config& cfg,
             int n_epochs_per_half = 10);

}  // namespace nonstat
