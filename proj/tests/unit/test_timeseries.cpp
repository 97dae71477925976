#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "nonstat/errors.hpp"
#include "nonstat/rng.hpp"
#include "nonstat/timeseries.hpp"

using namespace nonstat;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("partition splits evenly with remainder in the last epoch") {
  TimeSeries ts;
  ts.data = Eigen::MatrixXd::Zero(203, 2);
  const EpochPartition part = partition_epochs(ts, 4);
  REQUIRE(part.n_epochs() == 4);
  CHECK(part.ranges[0] == std::pair<int, int>(0, 50));
  CHECK(part.ranges[1] == std::pair<int, int>(50, 100));
  CHECK(part.ranges[2] == std::pair<int, int>(100, 150));
  CHECK(part.ranges[3] == std::pair<int, int>(150, 203));
  CHECK(part.total() == 203);
}

TEST_CASE("partition refuses epochs too small for moment estimates") {
  TimeSeries ts;
  ts.data = Eigen::MatrixXd::Zero(20, 5);
  CHECK_THROWS_AS(partition_epochs(ts, 10), TooFewSamples);
}

TEST_CASE("csv round trip is bit exact, labels preserved") {
  TimeSeries ts;
  Rng rng(77);
  ts.data = rng.normal_matrix(23, 3);
  ts.data(0, 0) = 1.0 / 3.0;
  ts.data(1, 1) = 1e-308;
  ts.data(2, 2) = -12345678.87654321;
  for (int i = 0; i < 23; ++i) ts.labels.push_back(1 + i % 2);

  const auto path = temp_file("nonstat_roundtrip.csv");
  write_csv(ts, path.string());
  const TimeSeries back = read_csv(path.string());
  std::filesystem::remove(path);

  REQUIRE(back.T() == ts.T());
  REQUIRE(back.D() == ts.D());
  CHECK(back.labels == ts.labels);
  for (int i = 0; i < ts.T(); ++i)
    for (int j = 0; j < ts.D(); ++j) CHECK(back.data(i, j) == ts.data(i, j));
}

TEST_CASE("csv without labels round trips") {
  TimeSeries ts;
  ts.data = Eigen::MatrixXd::Random(5, 4);
  const auto path = temp_file("nonstat_nolabel.csv");
  write_csv(ts, path.string());
  const TimeSeries back = read_csv(path.string());
  std::filesystem::remove(path);
  CHECK(back.labels.empty());
  CHECK(back.D() == 4);
  CHECK((back.data - ts.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv reader detects a label header column") {
  const auto path = temp_file("nonstat_header.csv");
  std::ofstream out(path);
  out << "x0,x1,label\n0.5,1.5,1\n-0.25,2.5,2\n";
  out.close();
  const TimeSeries ts = read_csv(path.string());
  std::filesystem::remove(path);
  REQUIRE(ts.T() == 2);
  CHECK(ts.D() == 2);
  CHECK(ts.labels == std::vector<int>{1, 2});
  CHECK(ts.data(1, 0) == -0.25);
}

TEST_CASE("csv reader can be forced to treat all columns as data") {
  const auto path = temp_file("nonstat_forced.csv");
  std::ofstream out(path);
  out << "1,2\n3,4\n";
  out.close();
  const TimeSeries ts = read_csv(path.string(), LabelMode::Unlabeled);
  std::filesystem::remove(path);
  CHECK(ts.D() == 2);
  CHECK(ts.labels.empty());
}

TEST_CASE("ragged csv rows are rejected") {
  const auto path = temp_file("nonstat_ragged.csv");
  std::ofstream out(path);
  out << "1,2,3\n4,5\n";
  out.close();
  CHECK_THROWS_AS(read_csv(path.string()), InvalidArgument);
  std::filesystem::remove(path);
}

TEST_CASE("non numeric csv fields are rejected") {
  const auto path = temp_file("nonstat_badfield.csv");
  std::ofstream out(path);
  out << "1,2\n4,abc\n";
  out.close();
  CHECK_THROWS_AS(read_csv(path.string()), InvalidArgument);
  std::filesystem::remove(path);
}
