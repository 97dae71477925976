#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace nonstat {

/// Contiguous, non-overlapping division of [0, T) into epochs.
struct EpochPartition {
  /// Half-open [begin, end) sample ranges, in order.
  std::vector<std::pair<int, int>> ranges;

  int n_epochs() const { return static_cast<int>(ranges.size()); }
  int total() const { return ranges.empty() ? 0 : ranges.back().second; }
};

/// A multivariate signal, one row per sample, with optional per-sample class
/// labels and an optional epoch partition.
struct TimeSeries {
  Eigen::MatrixXd data;                    // T x D
  std::vector<int> labels;                 // empty when unlabeled
  std::optional<EpochPartition> partition;

  int T() const { return static_cast<int>(data.rows()); }
  int D() const { return static_cast<int>(data.cols()); }
  bool labeled() const { return !labels.empty(); }
};

/// Split a series into n_epochs contiguous blocks of equal size, the division
/// remainder going to the last block. Every block must hold at least D + 2
/// samples so that epoch covariances stay well defined.
EpochPartition partition_epochs(const TimeSeries& ts, int n_epochs);

enum class LabelMode {
  Auto,  ///< labeled iff a header names the last column "label", or, without
         ///< a header, iff the last column holds only small integer literals
  Labeled,
  Unlabeled,
};

/// Read a series from CSV, one row per sample, columns as channels, an
/// optional final integer label column, and an optional header row (detected
/// by a non-numeric first field).
TimeSeries read_csv(const std::string& path, LabelMode mode = LabelMode::Auto);

/// Write a series as CSV at 17 significant digits (value-preserving for
/// doubles). Labels, when present, are appended as a final integer column
/// and a header row is emitted.
void write_csv(const TimeSeries& ts, const std::string& path);

}  // namespace nonstat
