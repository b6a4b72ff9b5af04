#include "qdm/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "qdm/error.hpp"

namespace qdm {

namespace {

std::string row_error(const std::string& source, std::size_t row, const std::string& what) {
  return source + ": row " + std::to_string(row) + ": " + what;
}

bool parse_double(std::string_view text, double& value) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  require_compatible(data.bhd1, data.bhd2);
  out << "t,bhd1,bhd2\n";
  char line[128];
  const double fs = data.bhd1.sample_rate();
  for (Eigen::Index i = 0; i < data.bhd1.size(); ++i) {
    std::snprintf(line, sizeof line, "%.9f,%.9g,%.9g\n", double(i) / fs, data.bhd1[i], data.bhd2[i]);
    out << line;
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_for_writing(path);
  write_dataset_csv(out, data);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Dataset read_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,bhd1,bhd2") {
    throw Error(ErrorCode::Parse, row_error(source, 1, "expected header `t,bhd1,bhd2`"));
  }
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> b;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw Error(ErrorCode::Parse, row_error(source, row, "expected 3 columns"));
    }
    const std::string_view view(line);
    double values[3];
    const std::string_view fields[3] = {view.substr(0, c1), view.substr(c1 + 1, c2 - c1 - 1), view.substr(c2 + 1)};
    static constexpr const char* kNames[3] = {"t", "bhd1", "bhd2"};
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(fields[k], values[k])) {
        throw Error(ErrorCode::Parse, row_error(source, row, std::string("column ") + kNames[k] + " is not a number"));
      }
      if (!std::isfinite(values[k])) {
        throw Error(ErrorCode::Parse, row_error(source, row, std::string("column ") + kNames[k] + " is not finite"));
      }
    }
    t.push_back(values[0]);
    a.push_back(values[1]);
    b.push_back(values[2]);
  }
  if (t.size() < 2) throw Error(ErrorCode::Parse, source + ": need at least 2 data rows");

  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw Error(ErrorCode::Parse, source + ": time column is not increasing");
  double fs = double(t.size() - 1) / span;
  if (std::abs(fs - std::round(fs)) <= 1e-6 * fs) fs = std::round(fs);
  const double dt = 1.0 / fs;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - t.front() - double(i) * dt) > 0.01 * dt + 1e-9) {
      throw Error(ErrorCode::Parse, row_error(source, i + 2, "time stamp breaks uniform sampling"));
    }
  }
  const auto n = Eigen::Index(t.size());
  return {TimeSeries(fs, Eigen::Map<Eigen::VectorXd>(a.data(), n)),
          TimeSeries(fs, Eigen::Map<Eigen::VectorXd>(b.data(), n))};
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_dataset_csv(in, path.string());
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec) {
  auto out = open_for_writing(path);
  out << (spec.scale == SpectrumScale::Linear ? "freq_hz,psd\n" : "freq_hz,db_rel_shot\n");
  char line[96];
  for (Eigen::Index k = 0; k < spec.frequencies.size(); ++k) {
    std::snprintf(line, sizeof line, "%.9g,%.9g\n", spec.frequencies[k], spec.psd[k]);
    out << line;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

KeyValueFile spectrum_metadata(const Spectrum& spec) {
  KeyValueFile kv;
  kv.set("estimator", "welch");
  kv.set("window", std::string(to_string(spec.window)));
  kv.set("segment_length", std::to_string(spec.segment_length));
  kv.set("overlap_fraction", format_exact(spec.overlap_fraction));
  kv.set("n_averages", std::to_string(spec.n_averages));
  kv.set("sample_rate", format_exact(spec.sample_rate));
  kv.set("resolution_hz", format_exact(spec.resolution()));
  kv.set("scale", spec.scale == SpectrumScale::Linear ? "linear" : "db_rel_shot");
  return kv;
}

}  // namespace qdm
