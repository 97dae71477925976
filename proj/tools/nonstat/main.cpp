// Command line front end: generate synthetic series, fit projections, select
// the stationary dimension, run change-point detectors, train classifiers,
// and drive batch experiment suites. Every run writes its fully resolved
// configuration next to its outputs. Exit codes: 0 success, 2 usage error,
// 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nonstat/classify.hpp"
#include "nonstat/cpd.hpp"
#include "nonstat/errors.hpp"
#include "nonstat/eval.hpp"
#include "nonstat/serialize.hpp"
#include "nonstat/ssa.hpp"
#include "nonstat/stationarity.hpp"
#include "nonstat/synthgen.hpp"
#include "nonstat/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nonstat;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = ".";
};

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t env_default_seed() {
  const char* env = std::getenv("NONSTAT_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == nullptr || *end != '\0')
    throw InvalidArgument("NONSTAT_SEED must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write file: " + path.string());
  out << text;
  if (!out.good()) throw InvalidArgument("failed writing file: " + path.string());
}

fs::path prepare_out_dir(const Globals& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create output directory: " + g.out_dir);
  return dir;
}

void write_run_config(const fs::path& dir, const std::string& subcommand,
                      const Globals& g, json flags) {
  json cfg;
  cfg["schema"] = 1;
  cfg["subcommand"] = subcommand;
  cfg["seed"] = g.seed;
  cfg["jobs"] = g.jobs;
  cfg["out_dir"] = g.out_dir;
  cfg["flags"] = std::move(flags);
  write_file(dir / "run_config.json", cfg.dump(2) + "\n");
}

TimeSeries read_input(const std::string& path, LabelMode mode = LabelMode::Auto) {
  if (!fs::exists(path)) throw InvalidArgument("input file not found: " + path);
  return read_csv(path, mode);
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string variant = "cpd";
  synth::CpdSpec cpd;
  // Classification overrides; unset fields keep the variant defaults.
  std::optional<int> n_train_per_class, n_test_per_class, n_epochs, n_per_class;
  std::optional<double> separation, a_ns, kappa, tau, b, c, a8, taper, outlier_rate,
      outlier_scale;
};

void cmd_gen(const Globals& g, const GenOptions& opt) {
  const fs::path dir = prepare_out_dir(g);
  if (opt.variant == "cpd") {
    synth::CpdSpec spec = opt.cpd;
    spec.seed = g.seed;
    auto [ts, truth] = synth::gen_cpd_dataset(spec);
    write_run_config(dir, "gen", g,
                     {{"variant", "cpd"},
                      {"D", spec.D},
                      {"d_s", spec.d_s},
                      {"d_n", spec.d_n},
                      {"q", spec.q},
                      {"n_epochs", spec.n_epochs},
                      {"epoch_len", spec.epoch_len}});
    write_csv(ts, (dir / "data.csv").string());
    write_file(dir / "truth.json", to_json(truth));
    std::printf("wrote %s (%d x %d) and truth.json\n", (dir / "data.csv").c_str(),
                ts.T(), ts.D());
    return;
  }

  synth::ClassifSpec spec = synth::default_spec(synth::variant_from_string(opt.variant));
  spec.seed = g.seed;
  if (opt.n_train_per_class) spec.n_train_per_class = *opt.n_train_per_class;
  if (opt.n_test_per_class) spec.n_test_per_class = *opt.n_test_per_class;
  if (opt.n_epochs) spec.n_epochs = *opt.n_epochs;
  if (opt.n_per_class) spec.n_per_class_per_epoch = *opt.n_per_class;
  if (opt.separation) spec.separation = *opt.separation;
  if (opt.a_ns) spec.a_ns = *opt.a_ns;
  if (opt.kappa) spec.kappa = *opt.kappa;
  if (opt.tau) spec.tau = *opt.tau;
  if (opt.b) spec.b = *opt.b;
  if (opt.c) spec.c = *opt.c;
  if (opt.a8) spec.a8 = *opt.a8;
  if (opt.taper) spec.taper = *opt.taper;
  if (opt.outlier_rate) spec.outlier_rate = *opt.outlier_rate;
  if (opt.outlier_scale) spec.outlier_scale = *opt.outlier_scale;

  const synth::ClassifDataset ds = synth::gen_classif_dataset(spec);
  json flags{{"variant", opt.variant},
             {"n_train_per_class", spec.n_train_per_class},
             {"n_test_per_class", spec.n_test_per_class},
             {"n_epochs", spec.n_epochs},
             {"n_per_class_per_epoch", spec.n_per_class_per_epoch},
             {"separation", spec.separation},
             {"a_ns", spec.a_ns},
             {"kappa", spec.kappa},
             {"tau", spec.tau},
             {"b", spec.b},
             {"c", spec.c},
             {"a8", spec.a8},
             {"taper", spec.taper},
             {"outlier_rate", spec.outlier_rate},
             {"outlier_scale", spec.outlier_scale}};
  write_run_config(dir, "gen", g, std::move(flags));
  write_csv(ds.train, (dir / "train.csv").string());
  write_csv(ds.test, (dir / "test.csv").string());
  write_file(dir / "truth.json", to_json(ds));
  std::printf("wrote train.csv (%d rows), test.csv (%d rows) and truth.json in %s\n",
              ds.train.T(), ds.test.T(), dir.c_str());
}

// ---------------------------------------------------------------------------
// ssa

struct SsaOptions {
  std::string input;
  int ds = 0;
  int dn = 0;
  bool maximize = false;
  int n_epochs = 10;
  ssa::Config cfg;
};

void cmd_ssa(const Globals& g, const SsaOptions& opt) {
  const fs::path dir = prepare_out_dir(g);
  TimeSeries ts = read_input(opt.input);
  ts.labels.clear();  // projections never look at labels

  const bool maximize = opt.dn > 0 || opt.maximize;
  const int d = opt.dn > 0 ? opt.dn : opt.ds;
  ssa::Config cfg = opt.cfg;
  cfg.seed = g.seed;

  write_run_config(dir, "ssa", g,
                   {{"input", opt.input},
                    {"d", d},
                    {"maximize", maximize},
                    {"n_epochs", opt.n_epochs},
                    {"restarts", cfg.restarts},
                    {"max_iterations", cfg.max_iterations},
                    {"gradient_tolerance", cfg.gradient_tolerance}});

  const ssa::Solution sol = maximize
                                ? ssa::find_most_nonstationary(ts, d, opt.n_epochs, cfg)
                                : ssa::find_stationary(ts, d, opt.n_epochs, cfg);
  write_file(dir / "solution.json", to_json(sol));
  write_csv(ssa::project(sol, ts), (dir / "projected.csv").string());
  std::printf("%s projection, d=%d: loss %s after %d iterations\n",
              maximize ? "most non-stationary" : "most stationary", d,
              format_g17(sol.loss).c_str(), sol.iterations_used);
}

// ---------------------------------------------------------------------------
// select-ds

struct SelectDsOptions {
  std::string input;
  double p = 0.01;
  int n_epochs = 10;
  ssa::Config cfg;
};

void cmd_select_ds(const Globals& g, const SelectDsOptions& opt) {
  const fs::path dir = prepare_out_dir(g);
  TimeSeries ts = read_input(opt.input);
  ts.labels.clear();
  ssa::Config cfg = opt.cfg;
  cfg.seed = g.seed;

  write_run_config(dir, "select-ds", g,
                   {{"input", opt.input},
                    {"p", opt.p},
                    {"n_epochs", opt.n_epochs},
                    {"restarts", cfg.restarts},
                    {"max_iterations", cfg.max_iterations},
                    {"gradient_tolerance", cfg.gradient_tolerance}});

  const DsSelection sel = select_ds(ts, opt.n_epochs, opt.p, cfg);
  write_file(dir / "ds_selection.json", to_json(sel));
  std::printf("chosen d_s = %d (threshold p = %s)\n", sel.chosen_ds,
              format_g17(sel.threshold).c_str());
  for (std::size_t i = 0; i < sel.per_ds.size(); ++i)
    std::printf("  d_s = %zu: lambda %s, p %s\n", i + 1,
                format_g17(sel.per_ds[i].lambda).c_str(),
                format_g17(sel.per_ds[i].p_value).c_str());
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
  std::string input;
  std::string algo;
  int n_epochs = 10;
  int k = 2;
  int W = 50;
  double h = 10.0;
  double C = 1.0;
  std::optional<double> sigma;
  int channel = 0;
};

void cmd_detect(const Globals& g, const DetectOptions& opt) {
  const fs::path dir = prepare_out_dir(g);
  const TimeSeries ts = read_input(opt.input);

  json flags{{"input", opt.input}, {"algo", opt.algo}};
  cpd::Segmentation seg;
  if (opt.algo == "slcd") {
    flags["n_epochs"] = opt.n_epochs;
    flags["k"] = opt.k;
    write_run_config(dir, "detect", g, std::move(flags));
    seg = cpd::slcd_detect(ts, opt.n_epochs, opt.k);
  } else if (opt.algo == "cusum") {
    if (opt.channel < 0 || opt.channel >= ts.D())
      throw InvalidArgument("detect: channel out of range");
    flags["W"] = opt.W;
    flags["h"] = opt.h;
    flags["channel"] = opt.channel;
    write_run_config(dir, "detect", g, std::move(flags));
    const Eigen::VectorXd signal = ts.data.col(opt.channel);
    cpd::CusumParams params;
    params.W = opt.W;
    params.h = opt.h;
    const double mean = signal.mean();
    const double var =
        (signal.array() - mean).square().sum() / std::max<int>(1, ts.T() - 1);
    if (!(var > 0.0))
      throw DegenerateVariance("detect: channel variance vanished");
    for (int i = 0; i < 16; ++i)
      params.theta_grid.push_back(var * (0.25 + 3.75 * i / 15.0));
    seg = cpd::cusum_weighted(signal, params);
  } else if (opt.algo == "kl") {
    cpd::KlParams params;
    params.W = opt.W;
    params.C = opt.C;
    params.sigma = opt.sigma;
    flags["W"] = opt.W;
    flags["C"] = opt.C;
    if (opt.sigma) flags["sigma"] = *opt.sigma;
    write_run_config(dir, "detect", g, std::move(flags));
    seg = cpd::kohlmorgen_lemm(ts, params);
  } else {
    throw InvalidArgument("unknown detector: " + opt.algo);
  }

  write_file(dir / "segmentation.json", to_json(seg));
  std::printf("%s found %zu boundary(ies) over %d epochs\n", seg.algorithm.c_str(),
              seg.boundaries.size(), seg.n_epochs);
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyOptions {
  std::string train;
  std::string test;
  std::string method = "lda";
  double alpha = 0.1;
  std::vector<double> grid;
  int n_epochs = 7;
  int folds = 5;
  std::optional<double> gamma;
  classify::TradeoffConfig cfg;
};

void cmd_classify(const Globals& g, const ClassifyOptions& opt) {
  const fs::path dir = prepare_out_dir(g);
  const TimeSeries train = read_input(opt.train);
  const TimeSeries test = read_input(opt.test);

  json flags{{"train", opt.train},
             {"test", opt.test},
             {"method", opt.method},
             {"alpha", opt.alpha},
             {"n_epochs", opt.n_epochs},
             {"folds", opt.folds}};
  if (!opt.grid.empty()) flags["grid"] = opt.grid;
  if (opt.gamma) flags["gamma"] = *opt.gamma;
  write_run_config(dir, "classify", g, std::move(flags));

  classify::TradeoffConfig cfg = opt.cfg;
  cfg.alpha = opt.alpha;
  cfg.n_epochs = opt.n_epochs;
  cfg.seed = g.seed;

  classify::LinearClassifier clf;
  if (opt.method == "lda") {
    clf = classify::lda_train(train);
  } else if (opt.method == "rlda") {
    clf = classify::rlda_train(train, opt.gamma);
  } else if (opt.method == "gradlda") {
    cfg.alpha = 1.0;
    clf = classify::slda_train(train, cfg);
    clf.method = "gradlda";
  } else if (opt.method == "randlda") {
    clf = classify::rand_lda_train(train, cfg);
  } else if (opt.method == "slda") {
    clf = opt.grid.empty() ? classify::slda_train(train, cfg)
                           : classify::slda_cv_train(train, opt.grid, opt.folds, cfg);
  } else if (opt.method == "slda-cv") {
    std::vector<double> grid = opt.grid;
    if (grid.empty())
      for (int i = 0; i <= 10; ++i) grid.push_back(0.1 * i);
    clf = classify::slda_cv_train(train, grid, opt.folds, cfg);
  } else {
    throw InvalidArgument("unknown method: " + opt.method);
  }

  std::string predictions = "predicted";
  const bool have_truth = test.labeled();
  if (have_truth) predictions += ",label";
  predictions += "\n";
  int wrong = 0;
  for (int t = 0; t < test.T(); ++t) {
    const int p = classify::predict(clf, test.data.row(t).transpose());
    predictions += std::to_string(p);
    if (have_truth) {
      predictions += "," + std::to_string(test.labels[(std::size_t)t]);
      if (p != test.labels[(std::size_t)t]) ++wrong;
    }
    predictions += "\n";
  }
  write_file(dir / "predictions.csv", predictions);
  write_file(dir / "classifier.json", to_json(clf));

  json metrics{{"schema", 1}, {"method", clf.method}, {"alpha", clf.alpha}};
  if (have_truth) {
    metrics["test_error"] = static_cast<double>(wrong) / test.T();
    std::printf("%s: test error %s\n", clf.method.c_str(),
                format_g17(metrics["test_error"].get<double>()).c_str());
  } else {
    std::printf("%s: predictions written (test set unlabeled)\n", clf.method.c_str());
  }
  write_file(dir / "metrics.json", metrics.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOptions {
  std::string suite;
  int realizations = 10;
};

ssa::Config suite_ssa_config(std::uint64_t seed) {
  ssa::Config cfg;
  cfg.restarts = 3;
  cfg.max_iterations = 200;
  cfg.gradient_tolerance = 1e-5;
  cfg.seed = seed;
  return cfg;
}

json quartiles_json(const eval::Quartiles& q) {
  return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

void run_cpd_suite(const Globals& g, const ExperimentOptions& opt,
                   eval::Detector detector, const fs::path& dir) {
  struct Panel {
    const char* name;
    synth::CpdSpec spec;
    std::vector<eval::Arm> arms;
    int cusum_W = 50;
  };

  std::vector<Panel> panels;
  synth::CpdSpec wide;
  wide.D = 12;
  wide.d_s = 10;
  wide.d_n = 2;
  wide.q = 1.8;
  wide.n_epochs = 60;
  wide.epoch_len = 250;

  switch (detector) {
    case eval::Detector::Slcd: {
      synth::CpdSpec collapse = wide;
      collapse.D = 22;
      collapse.d_s = 20;
      collapse.n_epochs = 100;
      collapse.epoch_len = 200;
      panels.push_back({"hidden_pair", wide,
                        {eval::Arm::Baseline, eval::Arm::Ssa, eval::Arm::Random}});
      panels.push_back(
          {"many_stationary", collapse, {eval::Arm::Baseline, eval::Arm::Ssa}});
      break;
    }
    case eval::Detector::Kl:
      panels.push_back({"hidden_pair", wide,
                        {eval::Arm::Baseline, eval::Arm::Ssa, eval::Arm::Random}});
      break;
    case eval::Detector::Cusum: {
      synth::CpdSpec narrow;
      narrow.D = 8;
      narrow.d_s = 7;
      narrow.d_n = 1;
      narrow.q = 1.8;
      narrow.n_epochs = 150;
      narrow.epoch_len = 150;
      panels.push_back(
          {"single_hidden", narrow, {eval::Arm::Baseline, eval::Arm::Ssa}, 100});
      break;
    }
  }

  std::string csv = "panel,arm,realization,auc\n";
  json cells = json::array();
  for (const Panel& panel : panels) {
    eval::CpdExperiment e;
    e.data = panel.spec;
    e.data.seed = g.seed;
    e.detector = detector;
    e.arms = panel.arms;
    e.n_realizations = opt.realizations;
    e.cusum_W = panel.cusum_W;
    e.ssa_config = suite_ssa_config(g.seed);
    e.jobs = g.jobs;
    const auto arms = eval::run_cpd_experiment(e);
    for (const auto& a : arms) {
      for (std::size_t r = 0; r < a.aucs.size(); ++r) {
        csv += std::string(panel.name) + "," + eval::to_string(a.arm) + "," +
               std::to_string(r) + "," + format_g17(a.aucs[r]) + "\n";
      }
      cells.push_back({{"panel", panel.name},
                       {"arm", eval::to_string(a.arm)},
                       {"auc", quartiles_json(a.auc_quartiles)}});
    }
  }
  write_file(dir / "results.csv", csv);
  json summary{{"schema", 1},
               {"suite", opt.suite},
               {"seed", g.seed},
               {"realizations", opt.realizations},
               {"cells", std::move(cells)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

void run_p_values_suite(const Globals& g, const ExperimentOptions& opt,
                        const fs::path& dir) {
  std::string csv = "true_ds,realization,chosen_ds\n";
  json cells = json::array();
  for (int true_ds : {3, 5, 7}) {
    synth::CpdSpec spec;
    spec.D = 10;
    spec.d_s = true_ds;
    spec.d_n = 10 - true_ds;
    spec.n_epochs = 200;
    spec.epoch_len = 100;
    spec.seed = g.seed;
    std::map<int, int> votes;
    for (int r = 0; r < opt.realizations; ++r) {
      auto [ts, truth] = synth::gen_cpd_dataset(spec, static_cast<std::uint64_t>(r));
      const DsSelection sel =
          select_ds(ts, spec.n_epochs, 0.01,
                    suite_ssa_config(g.seed + 1000u * static_cast<unsigned>(true_ds) + r));
      csv += std::to_string(true_ds) + "," + std::to_string(r) + "," +
             std::to_string(sel.chosen_ds) + "\n";
      ++votes[sel.chosen_ds];
    }
    int mode = -1, top = 0;
    for (const auto& [ds, count] : votes)
      if (count > top) {
        top = count;
        mode = ds;
      }
    cells.push_back({{"true_ds", true_ds}, {"modal_chosen_ds", mode}, {"votes", top}});
  }
  write_file(dir / "results.csv", csv);
  json summary{{"schema", 1},
               {"suite", opt.suite},
               {"seed", g.seed},
               {"realizations", opt.realizations},
               {"cells", std::move(cells)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

void run_subspace_suite(const Globals& g, const ExperimentOptions& opt,
                        const fs::path& dir) {
  std::string csv = "a_ns,method,realization,error,angle_deg\n";
  json cells = json::array();
  for (double a_ns : {2.0, 4.0, 6.0, 8.0, 10.0, 12.0}) {
    eval::ClassifExperiment e;
    e.data = synth::default_spec(synth::ClassifVariant::SubspaceSimple);
    e.data.a_ns = a_ns;
    e.data.seed = g.seed;
    e.methods = {eval::Method::Lda, eval::Method::Slda};
    e.alpha = 0.1;
    e.n_realizations = opt.realizations;
    e.jobs = g.jobs;
    for (const auto& m : eval::run_classif_experiment(e)) {
      for (std::size_t r = 0; r < m.errors.size(); ++r) {
        csv += format_g17(a_ns) + "," + eval::to_string(m.method) + "," +
               std::to_string(r) + "," + format_g17(m.errors[r]) + "," +
               format_g17(m.angles_deg[r]) + "\n";
      }
      cells.push_back({{"a_ns", a_ns},
                       {"method", eval::to_string(m.method)},
                       {"median_angle_deg", m.median_angle_deg},
                       {"mean_error", m.mean_error}});
    }
  }
  write_file(dir / "results.csv", csv);
  json summary{{"schema", 1},
               {"suite", opt.suite},
               {"seed", g.seed},
               {"realizations", opt.realizations},
               {"cells", std::move(cells)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

void run_transfer_suite(const Globals& g, const ExperimentOptions& opt,
                        const fs::path& dir) {
  std::string csv = "variant,a8,method,realization,error\n";
  json cells = json::array();
  for (auto variant :
       {synth::ClassifVariant::TransferSmall, synth::ClassifVariant::TransferLarge}) {
    for (int i = 0; i < 8; ++i) {
      const double a8 = 0.2 + 0.4 * i;
      eval::ClassifExperiment e;
      e.data = synth::default_spec(variant);
      e.data.a8 = a8;
      e.data.seed = g.seed;
      e.methods = {eval::Method::Lda, eval::Method::Slda};
      e.alpha = 0.1;
      e.n_realizations = opt.realizations;
      e.jobs = g.jobs;
      for (const auto& m : eval::run_classif_experiment(e)) {
        for (std::size_t r = 0; r < m.errors.size(); ++r) {
          csv += std::string(synth::to_string(variant)) + "," + format_g17(a8) + "," +
                 eval::to_string(m.method) + "," + std::to_string(r) + "," +
                 format_g17(m.errors[r]) + "\n";
        }
        cells.push_back({{"variant", synth::to_string(variant)},
                         {"a8", a8},
                         {"method", eval::to_string(m.method)},
                         {"mean_error", m.mean_error}});
      }
    }
  }
  write_file(dir / "results.csv", csv);
  json summary{{"schema", 1},
               {"suite", opt.suite},
               {"seed", g.seed},
               {"realizations", opt.realizations},
               {"cells", std::move(cells)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

void cmd_experiment(const Globals& g, const ExperimentOptions& opt) {
  const fs::path dir = prepare_out_dir(g);
  write_run_config(dir, "experiment", g,
                   {{"suite", opt.suite}, {"realizations", opt.realizations}});
  if (opt.suite == "linkage_panels") {
    run_cpd_suite(g, opt, eval::Detector::Slcd, dir);
  } else if (opt.suite == "cusum_panels") {
    run_cpd_suite(g, opt, eval::Detector::Cusum, dir);
  } else if (opt.suite == "kl_panels") {
    run_cpd_suite(g, opt, eval::Detector::Kl, dir);
  } else if (opt.suite == "p_values") {
    run_p_values_suite(g, opt, dir);
  } else if (opt.suite == "slda_subspace") {
    run_subspace_suite(g, opt, dir);
  } else if (opt.suite == "transfer") {
    run_transfer_suite(g, opt, dir);
  } else {
    throw InvalidArgument("unknown suite: " + opt.suite);
  }
  std::printf("suite %s: wrote results.csv and summary.json in %s\n",
              opt.suite.c_str(), dir.c_str());
}

bool is_usage_error(const Error& e) {
  return dynamic_cast<const InvalidArgument*>(&e) != nullptr ||
         dynamic_cast<const InvalidDimension*>(&e) != nullptr ||
         dynamic_cast<const InvalidK*>(&e) != nullptr ||
         dynamic_cast<const InvalidVariantParams*>(&e) != nullptr ||
         dynamic_cast<const DimensionMismatch*>(&e) != nullptr ||
         dynamic_cast<const DomainError*>(&e) != nullptr ||
         dynamic_cast<const TooFewSamples*>(&e) != nullptr ||
         dynamic_cast<const NoTrueBoundaries*>(&e) != nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary-subspace toolkit: synthetic generators, projections, "
               "stationarity tests, change-point detectors, and classifiers"};
  app.require_subcommand(1);

  Globals g;
  bool seed_given = false;
  app.add_option("--seed", g.seed, "Random seed (default: NONSTAT_SEED or 0)")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--jobs", g.jobs, "Worker threads for experiment realizations")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for outputs (default: .)");

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--variant", gen.variant,
                      "cpd, or a classification variant (simple, outliers, hard, "
                      "tapered, subspace_simple, subspace_realistic, transfer_small, "
                      "transfer_large)");
  gen_cmd->add_option("--D", gen.cpd.D, "Total dimension (cpd)");
  gen_cmd->add_option("--ds", gen.cpd.d_s, "Stationary dimensions (cpd)");
  gen_cmd->add_option("--dn", gen.cpd.d_n, "Non-stationary dimensions (cpd)");
  gen_cmd->add_option("--q", gen.cpd.q, "Variance contrast of hidden models (cpd)");
  gen_cmd->add_option("--epochs", gen.cpd.n_epochs, "Number of epochs (cpd)");
  gen_cmd->add_option("--epoch-len", gen.cpd.epoch_len, "Samples per epoch (cpd)");
  {
    const auto opt_int = [&](const char* name, std::optional<int>& slot,
                             const char* help) {
      gen_cmd->add_option_function<int>(
          name, [&slot](const int& v) { slot = v; }, help);
    };
    const auto opt_dbl = [&](const char* name, std::optional<double>& slot,
                             const char* help) {
      gen_cmd->add_option_function<double>(
          name, [&slot](const double& v) { slot = v; }, help);
    };
    opt_int("--train-per-class", gen.n_train_per_class, "Training rows per class");
    opt_int("--test-per-class", gen.n_test_per_class, "Test rows per class");
    opt_int("--class-epochs", gen.n_epochs, "Training epochs (classification)");
    opt_int("--per-epoch", gen.n_per_class, "Rows per class per epoch");
    opt_dbl("--separation", gen.separation, "Class mean separation");
    opt_dbl("--a-ns", gen.a_ns, "Non-stationary amplitude");
    opt_dbl("--kappa", gen.kappa, "Epoch mean wobble variance");
    opt_dbl("--tau", gen.tau, "Class shift on the drifting source");
    opt_dbl("--b", gen.b, "Separation of the stationary source");
    opt_dbl("--c", gen.c, "Separation of the noise sources");
    opt_dbl("--a8", gen.a8, "Held-out epoch drift");
    opt_dbl("--taper", gen.taper, "Covariance taper");
    opt_dbl("--outlier-rate", gen.outlier_rate, "Training outlier fraction");
    opt_dbl("--outlier-scale", gen.outlier_scale, "Training outlier scale");
  }

  SsaOptions ssa_opt;
  CLI::App* ssa_cmd =
      app.add_subcommand("ssa", "Fit the most (non-)stationary linear projection");
  ssa_cmd->add_option("input", ssa_opt.input, "Input CSV")->required();
  CLI::Option* ds_flag =
      ssa_cmd->add_option("--ds", ssa_opt.ds, "Stationary subspace dimension");
  CLI::Option* dn_flag =
      ssa_cmd->add_option("--dn", ssa_opt.dn, "Non-stationary subspace dimension");
  ds_flag->excludes(dn_flag);
  ssa_cmd->add_flag("--maximize", ssa_opt.maximize,
                    "Maximize the objective (with --ds; implied by --dn)");
  ssa_cmd->add_option("--epochs", ssa_opt.n_epochs, "Number of epochs");
  ssa_cmd->add_option("--restarts", ssa_opt.cfg.restarts, "Optimizer restarts");
  ssa_cmd->add_option("--max-iterations", ssa_opt.cfg.max_iterations,
                      "Iteration budget per restart");
  ssa_cmd->add_option("--gradient-tolerance", ssa_opt.cfg.gradient_tolerance,
                      "Stop when the tangent gradient norm falls below this");

  SelectDsOptions sel_opt;
  CLI::App* sel_cmd = app.add_subcommand(
      "select-ds", "Choose the stationary dimension by likelihood-ratio tests");
  sel_cmd->add_option("input", sel_opt.input, "Input CSV")->required();
  sel_cmd->add_option("--p", sel_opt.p, "Acceptance threshold on the p-value");
  sel_cmd->add_option("--epochs", sel_opt.n_epochs, "Number of epochs");
  sel_cmd->add_option("--restarts", sel_opt.cfg.restarts, "Optimizer restarts");
  sel_cmd->add_option("--max-iterations", sel_opt.cfg.max_iterations,
                      "Iteration budget per restart");
  sel_cmd->add_option("--gradient-tolerance", sel_opt.cfg.gradient_tolerance,
                      "Stop when the tangent gradient norm falls below this");

  DetectOptions det_opt;
  CLI::App* det_cmd = app.add_subcommand("detect", "Run a change-point detector");
  det_cmd->add_option("input", det_opt.input, "Input CSV")->required();
  det_cmd->add_option("--algo", det_opt.algo, "slcd, cusum, or kl")->required();
  det_cmd->add_option("--epochs", det_opt.n_epochs, "Number of epochs (slcd)");
  det_cmd->add_option("--k", det_opt.k, "Cluster count (slcd)");
  det_cmd->add_option("--W", det_opt.W, "Window length (cusum, kl)");
  det_cmd->add_option("--h", det_opt.h, "Detection threshold (cusum)");
  det_cmd->add_option("--C", det_opt.C, "State-switch penalty (kl)");
  det_cmd->add_option_function<double>(
      "--sigma", [&det_opt](const double& v) { det_opt.sigma = v; },
      "Kernel bandwidth (kl); omit for the heuristic");
  det_cmd->add_option("--channel", det_opt.channel, "Channel index (cusum)");

  ClassifyOptions clf_opt;
  CLI::App* clf_cmd = app.add_subcommand("classify", "Train and evaluate a classifier");
  clf_cmd->add_option("train", clf_opt.train, "Labeled training CSV")->required();
  clf_cmd->add_option("test", clf_opt.test, "Test CSV")->required();
  clf_cmd->add_option("--method", clf_opt.method,
                      "lda, rlda, gradlda, randlda, slda, or slda-cv");
  clf_cmd->add_option("--alpha", clf_opt.alpha, "Separation weight (slda)");
  clf_cmd->add_option("--grid", clf_opt.grid,
                      "Alpha grid; selects by cross-validation when given");
  clf_cmd->add_option("--epochs", clf_opt.n_epochs, "Training epochs (slda)");
  clf_cmd->add_option("--folds", clf_opt.folds, "Cross-validation folds");
  clf_cmd->add_option_function<double>(
      "--gamma", [&clf_opt](const double& v) { clf_opt.gamma = v; },
      "Shrinkage intensity (rlda); omit for the data-driven value");

  ExperimentOptions exp_opt;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Run a batch experiment suite");
  exp_cmd->add_option("--suite", exp_opt.suite,
                      "linkage_panels, cusum_panels, kl_panels, p_values, "
                      "slda_subspace, or transfer")
      ->required();
  exp_cmd->add_option("--realizations", exp_opt.realizations,
                      "Realizations per configuration")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    if (!seed_given) g.seed = env_default_seed();
    if (gen_cmd->parsed()) cmd_gen(g, gen);
    if (ssa_cmd->parsed()) {
      if (ssa_opt.ds == 0 && ssa_opt.dn == 0)
        throw InvalidArgument("ssa: give --ds or --dn");
      cmd_ssa(g, ssa_opt);
    }
    if (sel_cmd->parsed()) cmd_select_ds(g, sel_opt);
    if (det_cmd->parsed()) cmd_detect(g, det_opt);
    if (clf_cmd->parsed()) cmd_classify(g, clf_opt);
    if (exp_cmd->parsed()) cmd_experiment(g, exp_opt);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_usage_error(e) ? kExitUsage : kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
