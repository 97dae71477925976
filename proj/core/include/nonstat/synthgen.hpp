#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nonstat/rng.hpp"
#include "nonstat/timeseries.hpp"

namespace nonstat::synth {

/// Epoch-structured mixture of stationary and non-stationary sources.
/// Stationary sources are standard normal; non-stationary sources follow one
/// of five zero-mean diagonal Gaussian models driven by a Markov chain that
/// stays with probability 0.9 and otherwise jumps uniformly.
struct CpdSpec {
  int D = 10;
  int d_s = 5;
  int d_n = 5;
  double q = 2.0;  ///< variance grid spans q^-1 .. q in five log-spaced steps
  int n_epochs = 200;
  int epoch_len = 100;
  std::uint64_t seed = 0;
};

struct CpdGroundTruth {
  Eigen::MatrixXd mixing;            // D x D orthogonal
  Eigen::MatrixXd stationary_basis;  // d_s x D, recovers the stationary sources
  std::vector<Eigen::VectorXd> model_variances;  // five diagonals of length d_n
  std::vector<int> model_sequence;               // active model per epoch
  std::vector<int> boundaries;                   // epochs where the model switched
};

std::pair<TimeSeries, CpdGroundTruth> gen_cpd_dataset(const CpdSpec& spec,
                                                      std::uint64_t stream = 0);

/// Five diagonal covariances with every entry drawn (with replacement) from
/// the five-point grid {q^-1, q^-1/2, 1, q^1/2, q}.
std::vector<Eigen::VectorXd> gen_covariances(int d_n, double q, Rng& rng);

enum class ClassifVariant {
  Simple,             ///< six sources, all with class separation 0.7
  Outliers,           ///< Simple with sparse heavy additive noise in training
  Hard,               ///< five sources at separation 0.2, one swept
  Tapered,            ///< separations 1.1, t, t, 0.2, 0.2, 0.2 with t swept
  SubspaceSimple,     ///< three sources, one non-stationary across 3 epochs
  SubspaceRealistic,  ///< six sources over 7 epochs, one with drifting mean
  TransferSmall,      ///< SubspaceRealistic judged on a shifted eighth epoch
  TransferLarge,      ///< transfer layout with two strong stationary sources
};

struct ClassifSpec {
  ClassifVariant variant = ClassifVariant::Simple;
  std::uint64_t seed = 0;

  int n_train_per_class = 75;
  int n_test_per_class = 150;
  double separation = 0.7;   ///< Hard: separation of the swept source
  double taper = 0.7;        ///< Tapered: separation of the 2nd and 3rd source
  double outlier_rate = 0.02;
  double outlier_scale = 20.0;

  int n_epochs = 7;               ///< epoch count of the subspace variants
  int n_per_class_per_epoch = 11;
  double a_ns = 4.0;   ///< SubspaceSimple: inner-epoch mean range
  double kappa = 0.5;  ///< variance of the per-epoch mean wobble
  double tau = 2.0;    ///< class separation on the non-stationary source
  double b = 1.2;      ///< separation of the strong stationary source
  double c = 0.2;      ///< separation of the noise sources
  double a8 = 1.0;     ///< Transfer variants: mean wobble of the test epoch
};

/// Fill in the per-variant source layout (dimensions, epoch structure,
/// default separations) while keeping any caller-set sweep parameters.
ClassifSpec default_spec(ClassifVariant variant);

const char* to_string(ClassifVariant variant);

/// Inverse of to_string; throws InvalidArgument on unknown names.
ClassifVariant variant_from_string(const std::string& name);

struct ClassifDataset {
  TimeSeries train;  ///< labeled; epoch partition set for epoch-wise variants
  TimeSeries test;   ///< labeled
  Eigen::MatrixXd mixing;  // D x D orthogonal
  /// Columns span the separable stationary directions in data space;
  /// zero columns when the variant defines none.
  Eigen::MatrixXd stationary_directions;
};

ClassifDataset gen_classif_dataset(const ClassifSpec& spec, std::uint64_t stream = 0);

}  // namespace nonstat::synth
