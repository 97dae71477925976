#include "nonstat/synthgen.hpp"

#include <cmath>
#include <utility>

#include "nonstat/errors.hpp"

namespace nonstat::synth {

std::vector<Eigen::VectorXd> gen_covariances(int d_n, double q, Rng& rng) {
  if (d_n < 1) throw InvalidVariantParams("gen_covariances: d_n must be positive");
  if (!(q > 0.0)) throw InvalidVariantParams("gen_covariances: q must be positive");
  const double grid[5] = {1.0 / q, std::pow(q, -0.5), 1.0, std::pow(q, 0.5), q};
  std::vector<Eigen::VectorXd> models(5);
  for (auto& model : models) {
    model.resize(d_n);
    for (int j = 0; j < d_n; ++j) model[j] = grid[rng.uniform_below(5)];
  }
  return models;
}

std::pair<TimeSeries, CpdGroundTruth> gen_cpd_dataset(const CpdSpec& spec,
                                                      std::uint64_t stream) {
  if (spec.d_s < 1 || spec.d_n < 1 || spec.d_s + spec.d_n != spec.D)
    throw InvalidVariantParams("gen_cpd_dataset: need d_s >= 1, d_n >= 1, d_s + d_n == D");
  if (spec.n_epochs < 2)
    throw InvalidVariantParams("gen_cpd_dataset: need at least two epochs");
  if (spec.epoch_len < spec.D + 2)
    throw InvalidVariantParams("gen_cpd_dataset: epoch_len must be at least D + 2");

  Rng rng(spec.seed, stream);
  CpdGroundTruth truth;
  truth.mixing = random_orthogonal(spec.D, rng);
  truth.stationary_basis = truth.mixing.leftCols(spec.d_s).transpose();
  truth.model_variances = gen_covariances(spec.d_n, spec.q, rng);

  truth.model_sequence.resize(spec.n_epochs);
  truth.model_sequence[0] = static_cast<int>(rng.uniform_below(5));
  for (int e = 1; e < spec.n_epochs; ++e) {
    int prev = truth.model_sequence[e - 1];
    if (rng.uniform() < 0.9) {
      truth.model_sequence[e] = prev;
    } else {
      int j = static_cast<int>(rng.uniform_below(4));
      truth.model_sequence[e] = j + (j >= prev ? 1 : 0);
    }
    if (truth.model_sequence[e] != prev) truth.boundaries.push_back(e);
  }

  const int T = spec.n_epochs * spec.epoch_len;
  Eigen::MatrixXd sources(T, spec.D);
  for (int e = 0; e < spec.n_epochs; ++e) {
    const auto& variances = truth.model_variances[truth.model_sequence[e]];
    Eigen::MatrixXd block(spec.epoch_len, spec.D);
    block.leftCols(spec.d_s) = rng.normal_matrix(spec.epoch_len, spec.d_s);
    Eigen::MatrixXd noise = rng.normal_matrix(spec.epoch_len, spec.d_n);
    noise.array().rowwise() *= variances.array().sqrt().transpose();
    block.rightCols(spec.d_n) = noise;
    sources.middleRows(e * spec.epoch_len, spec.epoch_len) = block;
  }

  TimeSeries ts;
  ts.data = sources * truth.mixing.transpose();
  EpochPartition part;
  for (int e = 0; e < spec.n_epochs; ++e)
    part.ranges.emplace_back(e * spec.epoch_len, (e + 1) * spec.epoch_len);
  ts.partition = part;
  return {std::move(ts), std::move(truth)};
}

const char* to_string(ClassifVariant variant) {
  switch (variant) {
    case ClassifVariant::Simple: return "simple";
    case ClassifVariant::Outliers: return "outliers";
    case ClassifVariant::Hard: return "hard";
    case ClassifVariant::Tapered: return "tapered";
    case ClassifVariant::SubspaceSimple: return "subspace_simple";
    case ClassifVariant::SubspaceRealistic: return "subspace_realistic";
    case ClassifVariant::TransferSmall: return "transfer_small";
    case ClassifVariant::TransferLarge: return "transfer_large";
  }
  return "?";
}

ClassifVariant variant_from_string(const std::string& name) {
  static const std::pair<const char*, ClassifVariant> table[] = {
      {"simple", ClassifVariant::Simple},
      {"outliers", ClassifVariant::Outliers},
      {"hard", ClassifVariant::Hard},
      {"tapered", ClassifVariant::Tapered},
      {"subspace_simple", ClassifVariant::SubspaceSimple},
      {"subspace_realistic", ClassifVariant::SubspaceRealistic},
      {"transfer_small", ClassifVariant::TransferSmall},
      {"transfer_large", ClassifVariant::TransferLarge},
  };
  for (const auto& [key, value] : table)
    if (name == key) return value;
  throw InvalidArgument("unknown dataset variant: " + name);
}

ClassifSpec default_spec(ClassifVariant variant) {
  ClassifSpec spec;
  spec.variant = variant;
  switch (variant) {
    case ClassifVariant::SubspaceSimple:
      spec.n_epochs = 3;
      spec.n_per_class_per_epoch = 50;
      break;
    case ClassifVariant::TransferLarge:
      spec.tau = 1.0;
      spec.b = 2.0;
      spec.c = 0.0;
      break;
    default:
      break;
  }
  return spec;
}

namespace {

struct Block {
  Eigen::MatrixXd rows;
  std::vector<int> labels;
};

// Interleave the classes so any contiguous sub-block keeps both populated.
Block epoch_block(Rng& rng, const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                  int n_per_class) {
  const int d = static_cast<int>(mu1.size());
  Eigen::MatrixXd c1 = rng.normal_matrix(n_per_class, d);
  Eigen::MatrixXd c2 = rng.normal_matrix(n_per_class, d);
  c1.rowwise() += mu1.transpose();
  c2.rowwise() += mu2.transpose();
  Block block;
  block.rows.resize(2 * n_per_class, d);
  block.labels.resize(2 * n_per_class);
  for (int i = 0; i < n_per_class; ++i) {
    block.rows.row(2 * i) = c1.row(i);
    block.rows.row(2 * i + 1) = c2.row(i);
    block.labels[2 * i] = 1;
    block.labels[2 * i + 1] = 2;
  }
  return block;
}

TimeSeries assemble(const std::vector<Block>& blocks, const Eigen::MatrixXd& mixing,
                    bool keep_partition) {
  int total = 0;
  for (const auto& block : blocks) total += static_cast<int>(block.rows.rows());
  TimeSeries ts;
  ts.data.resize(total, mixing.rows());
  ts.labels.reserve(total);
  EpochPartition part;
  int row = 0;
  for (const auto& block : blocks) {
    const int n = static_cast<int>(block.rows.rows());
    ts.data.middleRows(row, n) = block.rows * mixing.transpose();
    ts.labels.insert(ts.labels.end(), block.labels.begin(), block.labels.end());
    part.ranges.emplace_back(row, row + n);
    row += n;
  }
  if (keep_partition) ts.partition = part;
  return ts;
}

// Means-per-source layout for the variants without epoch structure.
struct FlatLayout {
  Eigen::VectorXd mu2;  // class 1 sits at the origin in source space
};

FlatLayout flat_layout(const ClassifSpec& spec) {
  FlatLayout layout;
  layout.mu2.setZero(6);
  switch (spec.variant) {
    case ClassifVariant::Simple:
    case ClassifVariant::Outliers:
      layout.mu2.setConstant(6, 0.7);
      break;
    case ClassifVariant::Hard:
      layout.mu2.setConstant(6, 0.2);
      layout.mu2[0] = spec.separation;
      break;
    case ClassifVariant::Tapered:
      layout.mu2 << 1.1, spec.taper, spec.taper, 0.2, 0.2, 0.2;
      break;
    default:
      throw InvalidVariantParams("flat_layout: not a flat variant");
  }
  return layout;
}

ClassifDataset gen_flat(const ClassifSpec& spec, Rng& rng) {
  if (spec.n_train_per_class < 2 || spec.n_test_per_class < 1)
    throw InvalidVariantParams("gen_classif_dataset: class counts too small");
  const FlatLayout layout = flat_layout(spec);
  const Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(6);

  ClassifDataset out;
  out.mixing = random_orthogonal(6, rng);
  Block train = epoch_block(rng, mu1, layout.mu2, spec.n_train_per_class);
  Block test = epoch_block(rng, mu1, layout.mu2, spec.n_test_per_class);

  if (spec.variant == ClassifVariant::Outliers) {
    if (!(spec.outlier_rate >= 0.0 && spec.outlier_rate <= 1.0) || spec.outlier_scale <= 0.0)
      throw InvalidVariantParams("gen_classif_dataset: bad outlier parameters");
    for (int i = 0; i < train.rows.rows(); ++i)
      if (rng.uniform() < spec.outlier_rate)
        train.rows.row(i) += spec.outlier_scale * rng.normal_vector(6).transpose();
  }

  out.train = assemble({train}, out.mixing, false);
  out.test = assemble({test}, out.mixing, false);
  out.stationary_directions = (out.mixing * layout.mu2).normalized();
  return out;
}

ClassifDataset gen_subspace_simple(const ClassifSpec& spec, Rng& rng) {
  if (spec.n_per_class_per_epoch < 2)
    throw InvalidVariantParams("gen_classif_dataset: class counts too small");
  if (!(spec.a_ns >= 1.0))
    throw InvalidVariantParams("gen_classif_dataset: a_ns must be at least 1");

  ClassifDataset out;
  out.mixing = random_orthogonal(3, rng);
  const double m1 = -(spec.a_ns + 1.0) + (spec.a_ns + 1.0) * rng.uniform();  // U[-a-1, 0]
  const double m2 = 1.0 + (spec.a_ns - 1.0) * rng.uniform();                 // U[1, a]

  // Source 1: undiscriminative noise. Source 2: stationary, separation 0.7.
  // Source 3: separation 1 in the outer epochs, wandering means inside.
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> means = {
      {{0.0, 0.0, 0.0}, {0.0, 0.7, 1.0}},
      {{0.0, 0.0, m1}, {0.0, 0.7, m2}},
      {{0.0, 0.0, 0.0}, {0.0, 0.7, 1.0}},
  };

  std::vector<Block> train, test;
  for (const auto& [mu1, mu2] : means)
    train.push_back(epoch_block(rng, mu1, mu2, spec.n_per_class_per_epoch));
  for (const auto& [mu1, mu2] : means)
    test.push_back(epoch_block(rng, mu1, mu2, spec.n_per_class_per_epoch));

  out.train = assemble(train, out.mixing, true);
  out.test = assemble(test, out.mixing, true);
  out.stationary_directions = out.mixing.col(1);
  return out;
}

ClassifDataset gen_epoch_family(const ClassifSpec& spec, Rng& rng) {
  if (spec.n_per_class_per_epoch < 2 || spec.n_test_per_class < 1)
    throw InvalidVariantParams("gen_classif_dataset: class counts too small");
  if (spec.n_epochs < 2)
    throw InvalidVariantParams("gen_classif_dataset: need at least two epochs");
  if (spec.kappa < 0.0) throw InvalidVariantParams("gen_classif_dataset: kappa must be >= 0");

  const bool transfer_large = spec.variant == ClassifVariant::TransferLarge;
  ClassifDataset out;
  out.mixing = random_orthogonal(6, rng);

  auto epoch_means = [&](double a) {
    Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(6);
    Eigen::VectorXd mu2 = Eigen::VectorXd::Zero(6);
    mu1[0] = a;
    mu2[0] = a + spec.tau;
    mu2[1] = spec.b;
    mu2[2] = spec.c;
    mu2[3] = spec.c;
    mu2[4] = spec.c;
    mu2[5] = transfer_large ? spec.b : spec.c;
    return std::make_pair(mu1, mu2);
  };

  std::vector<Block> train;
  for (int e = 0; e < spec.n_epochs; ++e) {
    const double a = std::sqrt(spec.kappa) * rng.normal();
    auto [mu1, mu2] = epoch_means(a);
    train.push_back(epoch_block(rng, mu1, mu2, spec.n_per_class_per_epoch));
  }

  double a_test;
  if (spec.variant == ClassifVariant::SubspaceRealistic) {
    a_test = std::sqrt(spec.kappa) * rng.normal();
  } else {
    a_test = spec.a8;
  }
  auto [mu1, mu2] = epoch_means(a_test);
  Block test = epoch_block(rng, mu1, mu2, spec.n_test_per_class);

  out.train = assemble(train, out.mixing, true);
  out.test = assemble({test}, out.mixing, false);
  if (transfer_large) {
    out.stationary_directions.resize(6, 2);
    out.stationary_directions.col(0) = out.mixing.col(1);
    out.stationary_directions.col(1) = out.mixing.col(5);
  } else {
    out.stationary_directions = out.mixing.col(1);
  }
  return out;
}

}  // namespace

ClassifDataset gen_classif_dataset(const ClassifSpec& spec, std::uint64_t stream) {
  Rng rng(spec.seed, stream);
  switch (spec.variant) {
    case ClassifVariant::Simple:
    case ClassifVariant::Outliers:
    case ClassifVariant::Hard:
    case ClassifVariant::Tapered:
      return gen_flat(spec, rng);
    case ClassifVariant::SubspaceSimple:
      return gen_subspace_simple(spec, rng);
    case ClassifVariant::SubspaceRealistic:
    case ClassifVariant::TransferSmall:
    case ClassifVariant::TransferLarge:
      return gen_epoch_family(spec, rng);
  }
  throw InvalidVariantParams("gen_classif_dataset: unknown variant");
}

}  // namespace nonstat::synth
