#include "nonstat/timeseries.hpp"

#include <cctype>
#include <cerrno>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nonstat/errors.hpp"

namespace nonstat {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  // ERANGE underflow still yields the nearest (subnormal) value; only
  // overflow to infinity is a real failure.
  return errno == 0 || (errno == ERANGE && std::fabs(out) <= DBL_MIN);
}

bool is_small_int(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size() || s.size() - i > 6) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

EpochPartition partition_epochs(const TimeSeries& ts, int n_epochs) {
  if (n_epochs < 1) throw InvalidArgument("partition_epochs: n_epochs must be positive");
  const int T = ts.T();
  const int len = T / n_epochs;
  if (len < ts.D() + 2) {
    throw TooFewSamples("partition_epochs: epochs of " + std::to_string(len) +
                        " samples are too short for dimension " + std::to_string(ts.D()));
  }
  EpochPartition part;
  part.ranges.reserve(n_epochs);
  for (int i = 0; i < n_epochs; ++i) {
    const int begin = i * len;
    const int end = (i + 1 == n_epochs) ? T : begin + len;
    part.ranges.emplace_back(begin, end);
  }
  return part;
}

TimeSeries read_csv(const std::string& path, LabelMode mode) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_csv: cannot open " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_fields(line));
  }
  if (rows.empty()) throw InvalidArgument("read_csv: " + path + " holds no data");

  bool has_header = false;
  for (const std::string& f : rows[0]) {
    double ignored;
    if (!parse_double(f, ignored)) {
      has_header = true;
      break;
    }
  }

  const std::size_t ncols = rows[has_header ? 1 : 0].size();
  if (ncols == 0) throw InvalidArgument("read_csv: " + path + " has empty rows");

  bool labeled = false;
  switch (mode) {
    case LabelMode::Labeled:
      labeled = true;
      break;
    case LabelMode::Unlabeled:
      labeled = false;
      break;
    case LabelMode::Auto:
      if (has_header) {
        labeled = lower(rows[0].back()) == "label";
      } else {
        labeled = ncols > 1;
        for (std::size_t r = 0; labeled && r < rows.size(); ++r)
          labeled = is_small_int(rows[r].back());
      }
      break;
  }
  if (labeled && ncols < 2)
    throw InvalidArgument("read_csv: labeled data needs at least one channel");

  const std::size_t first = has_header ? 1 : 0;
  const std::size_t T = rows.size() - first;
  if (T == 0) throw InvalidArgument("read_csv: " + path + " holds no data rows");
  const std::size_t D = ncols - (labeled ? 1 : 0);

  TimeSeries ts;
  ts.data.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(D));
  if (labeled) ts.labels.resize(T);
  for (std::size_t r = 0; r < T; ++r) {
    const auto& row = rows[first + r];
    if (row.size() != ncols)
      throw InvalidArgument("read_csv: ragged row " + std::to_string(first + r + 1) +
                            " in " + path);
    for (std::size_t c = 0; c < D; ++c) {
      double v;
      if (!parse_double(row[c], v))
        throw InvalidArgument("read_csv: bad numeric field '" + row[c] + "' in " + path);
      ts.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    if (labeled) {
      double v;
      if (!parse_double(row[D], v) || v != static_cast<int>(v))
        throw InvalidArgument("read_csv: bad label '" + row[D] + "' in " + path);
      ts.labels[r] = static_cast<int>(v);
    }
  }
  return ts;
}

void write_csv(const TimeSeries& ts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_csv: cannot open " + path);
  const int D = ts.D();
  for (int c = 0; c < D; ++c) out << (c ? ",x" : "x") << c;
  if (ts.labeled()) out << ",label";
  out << '\n';
  char buf[40];
  for (int t = 0; t < ts.T(); ++t) {
    for (int c = 0; c < D; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", ts.data(t, c));
      if (c) out << ',';
      out << buf;
    }
    if (ts.labeled()) out << ',' << ts.labels[static_cast<std::size_t>(t)];
    out << '\n';
  }
  if (!out) throw InvalidArgument("write_csv: failed writing " + path);
}

}  // namespace nonstat
