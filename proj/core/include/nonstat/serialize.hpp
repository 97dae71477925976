#pragma once

#include <string>
#include <vector>

#include "nonstat/classify.hpp"
#include "nonstat/cpd.hpp"
#include "nonstat/eval.hpp"
#include "nonstat/ssa.hpp"
#include "nonstat/stationarity.hpp"
#include "nonstat/synthgen.hpp"

namespace nonstat {

/// JSON documents; every top-level object carries "schema": 1 and numbers
/// round-trip exactly.
std::string to_json(const ssa::Solution& sol);
std::string to_json(const cpd::Segmentation& seg);
std::string to_json(const classify::LinearClassifier& clf);
std::string to_json(const DsSelection& sel);
std::string to_json(const synth::CpdGroundTruth& truth);

/// Truth metadata of a generated classification dataset (mixing matrix and
/// stationary discriminative directions); samples live in the CSV files.
std::string to_json(const synth::ClassifDataset& ds);

std::string to_json(const eval::CpdExperiment& e,
                    const std::vector<eval::ArmSummary>& arms);
std::string to_json(const eval::ClassifExperiment& e,
                    const std::vector<eval::MethodSummary>& methods);

/// Rebuild a projection solution from its to_json document.
ssa::Solution solution_from_json(const std::string& text);

/// "fpr,tpr" rows, 17 significant digits.
std::string to_csv(const eval::RocCurve& curve);

}  // namespace nonstat
