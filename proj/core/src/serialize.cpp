#include "nonstat/serialize.hpp"

#include <cstdio>

#include <json.hpp>

#include "nonstat/errors.hpp"

namespace nonstat {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InvalidArgument("json matrix must be an array of rows");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw InvalidArgument("json matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("json vector must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

const char* kind_name(ssa::Kind kind) {
  switch (kind) {
    case ssa::Kind::Stationary: return "stationary";
    case ssa::Kind::NonStationary: return "nonstationary";
    case ssa::Kind::Random: return "random";
  }
  return "?";
}

ssa::Kind kind_from_name(const std::string& name) {
  if (name == "stationary") return ssa::Kind::Stationary;
  if (name == "nonstationary") return ssa::Kind::NonStationary;
  if (name == "random") return ssa::Kind::Random;
  throw InvalidArgument("unknown projection kind: " + name);
}

json parse_document(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("malformed json document");
  if (!j.is_object() || j.value("schema", 0) != 1)
    throw InvalidArgument("expected a schema 1 json object");
  return j;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_json(const ssa::Solution& sol) {
  json j;
  j["schema"] = 1;
  j["type"] = "projection";
  j["kind"] = kind_name(sol.projection.kind);
  j["d"] = sol.projection.d;
  j["rotation"] = matrix_to_json(sol.projection.rotation);
  j["whitening"] = {{"center", vector_to_json(sol.whitening.center)},
                    {"matrix", matrix_to_json(sol.whitening.W)}};
  j["loss"] = sol.loss;
  j["per_restart_losses"] = sol.per_restart_losses;
  j["iterations_used"] = sol.iterations_used;
  return j.dump(2);
}

ssa::Solution solution_from_json(const std::string& text) {
  const json j = parse_document(text);
  if (j.value("type", "") != "projection")
    throw InvalidArgument("expected a projection document");
  ssa::Solution sol;
  sol.projection.kind = kind_from_name(j.at("kind").get<std::string>());
  sol.projection.d = j.at("d").get<int>();
  sol.projection.rotation = matrix_from_json(j.at("rotation"));
  sol.whitening.center = vector_from_json(j.at("whitening").at("center"));
  sol.whitening.W = matrix_from_json(j.at("whitening").at("matrix"));
  sol.loss = j.value("loss", 0.0);
  if (j.contains("per_restart_losses"))
    sol.per_restart_losses = j["per_restart_losses"].get<std::vector<double>>();
  sol.iterations_used = j.value("iterations_used", 0);
  const int D = static_cast<int>(sol.projection.rotation.rows());
  if (sol.projection.rotation.cols() != D || sol.projection.d < 1 ||
      sol.projection.d > D)
    throw InvalidArgument("projection document has inconsistent dimensions");
  return sol;
}

std::string to_json(const cpd::Segmentation& seg) {
  json j;
  j["schema"] = 1;
  j["type"] = "segmentation";
  j["algorithm"] = seg.algorithm;
  j["n_epochs"] = seg.n_epochs;
  j["boundaries"] = seg.boundaries;
  j["scores"] = seg.scores;
  return j.dump(2);
}

std::string to_json(const classify::LinearClassifier& clf) {
  json j;
  j["schema"] = 1;
  j["type"] = "classifier";
  j["method"] = clf.method;
  j["w"] = vector_to_json(clf.w);
  j["b"] = clf.b;
  j["alpha"] = clf.alpha;
  return j.dump(2);
}

std::string to_json(const DsSelection& sel) {
  json j;
  j["schema"] = 1;
  j["type"] = "ds_selection";
  j["chosen_ds"] = sel.chosen_ds;
  j["threshold"] = sel.threshold;
  json tests = json::array();
  for (std::size_t i = 0; i < sel.per_ds.size(); ++i) {
    tests.push_back({{"ds", static_cast<int>(i) + 1},
                     {"lambda", sel.per_ds[i].lambda},
                     {"dof", sel.per_ds[i].dof},
                     {"p_value", sel.per_ds[i].p_value}});
  }
  j["tests"] = std::move(tests);
  return j.dump(2);
}

std::string to_json(const synth::CpdGroundTruth& truth) {
  json j;
  j["schema"] = 1;
  j["type"] = "cpd_truth";
  j["mixing"] = matrix_to_json(truth.mixing);
  j["stationary_basis"] = matrix_to_json(truth.stationary_basis);
  json models = json::array();
  for (const auto& v : truth.model_variances) models.push_back(vector_to_json(v));
  j["model_variances"] = std::move(models);
  j["model_sequence"] = truth.model_sequence;
  j["boundaries"] = truth.boundaries;
  return j.dump(2);
}

std::string to_json(const synth::ClassifDataset& ds) {
  json j;
  j["schema"] = 1;
  j["type"] = "classif_truth";
  j["mixing"] = matrix_to_json(ds.mixing);
  j["stationary_directions"] = matrix_to_json(ds.stationary_directions);
  return j.dump(2);
}

std::string to_json(const eval::CpdExperiment& e,
                    const std::vector<eval::ArmSummary>& arms) {
  json j;
  j["schema"] = 1;
  j["type"] = "cpd_experiment";
  j["detector"] = eval::to_string(e.detector);
  j["data"] = {{"D", e.data.D},         {"d_s", e.data.d_s},
               {"d_n", e.data.d_n},     {"q", e.data.q},
               {"n_epochs", e.data.n_epochs}, {"epoch_len", e.data.epoch_len},
               {"seed", e.data.seed}};
  j["n_realizations"] = e.n_realizations;
  j["taus"] = e.taus;
  j["cusum_W"] = e.cusum_W;
  json out = json::array();
  for (const auto& arm : arms) {
    out.push_back({{"arm", eval::to_string(arm.arm)},
                   {"aucs", arm.aucs},
                   {"q25", arm.auc_quartiles.q25},
                   {"median", arm.auc_quartiles.median},
                   {"q75", arm.auc_quartiles.q75}});
  }
  j["arms"] = std::move(out);
  return j.dump(2);
}

std::string to_json(const eval::ClassifExperiment& e,
                    const std::vector<eval::MethodSummary>& methods) {
  json j;
  j["schema"] = 1;
  j["type"] = "classif_experiment";
  j["variant"] = synth::to_string(e.data.variant);
  j["data"] = {{"seed", e.data.seed},
               {"n_train_per_class", e.data.n_train_per_class},
               {"n_test_per_class", e.data.n_test_per_class},
               {"separation", e.data.separation},
               {"taper", e.data.taper},
               {"outlier_rate", e.data.outlier_rate},
               {"outlier_scale", e.data.outlier_scale},
               {"n_epochs", e.data.n_epochs},
               {"n_per_class_per_epoch", e.data.n_per_class_per_epoch},
               {"a_ns", e.data.a_ns},
               {"kappa", e.data.kappa},
               {"tau", e.data.tau},
               {"b", e.data.b},
               {"c", e.data.c},
               {"a8", e.data.a8}};
  j["alpha"] = e.alpha;
  j["cv_alphas"] = e.cv_alphas;
  j["cv_folds"] = e.cv_folds;
  j["n_realizations"] = e.n_realizations;
  json out = json::array();
  for (const auto& m : methods) {
    json entry = {{"method", eval::to_string(m.method)},
                  {"errors", m.errors},
                  {"mean_error", m.mean_error},
                  {"q25", m.error_quartiles.q25},
                  {"median", m.error_quartiles.median},
                  {"q75", m.error_quartiles.q75}};
    if (!m.angles_deg.empty()) {
      entry["angles_deg"] = m.angles_deg;
      entry["median_angle_deg"] = m.median_angle_deg;
    }
    out.push_back(std::move(entry));
  }
  j["methods"] = std::move(out);
  return j.dump(2);
}

std::string to_csv(const eval::RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : curve.points) {
    out += format_g17(p.fpr);
    out += ',';
    out += format_g17(p.tpr);
    out += '\n';
  }
  return out;
}

}  // namespace nonstat
