#include "qdm/run_config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "qdm/error.hpp"

namespace qdm {

namespace {

struct Field {
  std::function<bool(RunConfig&, const std::string&)> assign;
  std::function<std::string(const RunConfig&)> show;
};

bool read_number(const std::string& text, double& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size() && std::isfinite(out);
}

template <typename Int>
bool read_integer(const std::string& text, Int& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

bool read_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0") {
    out = false;
    return true;
  }
  return false;
}

Field real(std::function<double&(RunConfig&)> ref) {
  return {[ref](RunConfig& c, const std::string& s) { return read_number(s, ref(c)); },
          [ref](const RunConfig& c) { return format_exact(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Int>
Field integer(std::function<Int&(RunConfig&)> ref) {
  return {[ref](RunConfig& c, const std::string& s) { return read_integer(s, ref(c)); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

Field boolean(std::function<bool&(RunConfig&)> ref) {
  return {[ref](RunConfig& c, const std::string& s) { return read_bool(s, ref(c)); },
          [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

// Noise specs are immutable, so squeezing (dB) and eta are staged here and
// turned into NoiseSpec after parsing.
struct NoiseStage {
  double bhd1_db;
  double bhd1_eta;
  double bhd2_db;
  double bhd2_eta;
};

const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("seed", integer<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.sim.noise.seed; }));
    t.emplace_back("sample_rate", real([](RunConfig& c) -> double& { return c.sim.sample_rate; }));
    t.emplace_back("duration", real([](RunConfig& c) -> double& { return c.sim.duration; }));
    t.emplace_back("marker.amplitude", real([](RunConfig& c) -> double& { return c.sim.marker_amplitude; }));
    t.emplace_back("marker.frequency", real([](RunConfig& c) -> double& { return c.sim.marker_frequency; }));
    t.emplace_back("chirp.f_start", real([](RunConfig& c) -> double& { return c.sim.chirp.f_start; }));
    t.emplace_back("chirp.t_coalesce", real([](RunConfig& c) -> double& { return c.sim.chirp.t_coalesce; }));
    t.emplace_back("chirp.amplitude_scale", real([](RunConfig& c) -> double& { return c.sim.chirp.amplitude_scale; }));
    t.emplace_back("scatter.amplitude", real([](RunConfig& c) -> double& { return c.sim.scatter.amplitude; }));
    t.emplace_back("scatter.phi0", real([](RunConfig& c) -> double& { return c.sim.scatter.phi0; }));
    t.emplace_back("scatter.f", real([](RunConfig& c) -> double& { return c.sim.scatter.frequency; }));
    t.emplace_back("scatter.lambda", real([](RunConfig& c) -> double& { return c.sim.scatter.wavelength; }));
    for (int n = 0; n < kScatterOrders; ++n) {
      t.emplace_back("scatter.m" + std::to_string(n + 1),
                     real([n](RunConfig& c) -> double& { return c.sim.scatter.depth[std::size_t(n)]; }));
    }
    for (int n = 0; n < kScatterOrders; ++n) {
      t.emplace_back("scatter.phi" + std::to_string(n + 1),
                     real([n](RunConfig& c) -> double& { return c.sim.scatter.phase[std::size_t(n)]; }));
    }
    t.emplace_back("scatter.a_prime", real([](RunConfig& c) -> double& { return c.sim.scatter.a_prime; }));
    t.emplace_back("scatter.delta_phi", real([](RunConfig& c) -> double& { return c.sim.scatter.delta_phi; }));
    t.emplace_back("fit.f_seed", real([](RunConfig& c) -> double& { return c.fit.f_seed; }));
    t.emplace_back("fit.max_iterations", integer<int>([](RunConfig& c) -> int& { return c.fit.max_iterations; }));
    t.emplace_back("fit.cost_tolerance", real([](RunConfig& c) -> double& { return c.fit.cost_tolerance; }));
    t.emplace_back("fit.param_tolerance", real([](RunConfig& c) -> double& { return c.fit.param_tolerance; }));
    t.emplace_back("fit.multistart_count", integer<int>([](RunConfig& c) -> int& { return c.fit.multistart_count; }));
    t.emplace_back("fit.damping_init", real([](RunConfig& c) -> double& { return c.fit.damping_init; }));
    t.emplace_back("fit.fix_f", boolean([](RunConfig& c) -> bool& { return c.fit.fix_f; }));
    t.emplace_back("fit.max_depth", real([](RunConfig& c) -> double& { return c.fit.max_depth; }));
    t.emplace_back("fit.detection_snr", real([](RunConfig& c) -> double& { return c.fit.detection_snr; }));
    t.emplace_back("spectral.segment_length",
                   integer<Eigen::Index>([](RunConfig& c) -> Eigen::Index& { return c.spectral.segment_length; }));
    t.emplace_back("spectral.overlap", real([](RunConfig& c) -> double& { return c.spectral.overlap_fraction; }));
    t.emplace_back("analysis.high_band_lo", real([](RunConfig& c) -> double& { return c.high_band_lo; }));
    t.emplace_back("analysis.high_band_hi", real([](RunConfig& c) -> double& { return c.high_band_hi; }));
    t.emplace_back("analysis.low_band_lo", real([](RunConfig& c) -> double& { return c.low_band_lo; }));
    t.emplace_back("analysis.low_band_hi", real([](RunConfig& c) -> double& { return c.low_band_hi; }));
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_run_config(const KeyValueFile& kv) {
  RunConfig cfg;
  std::vector<std::string> problems;
  NoiseStage noise{cfg.sim.noise.bhd1.squeezing_db(), cfg.sim.noise.bhd1.eta(), cfg.sim.noise.bhd2.squeezing_db(),
                   cfg.sim.noise.bhd2.eta()};
  const std::map<std::string, double*> noise_keys = {{"noise.bhd1.squeezing_db", &noise.bhd1_db},
                                                     {"noise.bhd1.eta", &noise.bhd1_eta},
                                                     {"noise.bhd2.squeezing_db", &noise.bhd2_db},
                                                     {"noise.bhd2.eta", &noise.bhd2_eta}};

  const auto& table = field_table();
  for (const auto& [key, value] : kv.entries) {
    if (key == "spectral.window") {
      if (value == "hann" || value == "rectangular") {
        cfg.spectral.window = parse_window(value);
      } else {
        problems.push_back("spectral.window: unknown window '" + value + "'");
      }
      continue;
    }
    if (key == "output.dir") {
      cfg.output_dir = value;
      continue;
    }
    if (auto it = noise_keys.find(key); it != noise_keys.end()) {
      if (!read_number(value, *it->second)) problems.push_back(key + ": not a number: '" + value + "'");
      continue;
    }
    const auto field = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
    if (field == table.end()) {
      problems.push_back(key + ": unknown key");
      continue;
    }
    if (!field->second.assign(cfg, value)) problems.push_back(key + ": cannot parse '" + value + "'");
  }

  // range checks, each naming its key
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  const auto& s = cfg.sim;
  check(s.sample_rate > 0.0, "sample_rate: must be > 0");
  check(s.duration > 0.0, "duration: must be > 0");
  check(s.sample_rate * s.duration >= 2.0 || !(s.sample_rate > 0.0 && s.duration > 0.0),
        "duration: grid needs at least 2 samples");
  check(s.marker_frequency >= 0.0, "marker.frequency: must be >= 0");
  check(s.chirp.f_start > 0.0, "chirp.f_start: must be > 0");
  check(s.chirp.t_coalesce > s.duration, "chirp.t_coalesce: must exceed duration");
  check(s.scatter.amplitude >= 0.0, "scatter.amplitude: must be >= 0");
  check(s.scatter.a_prime >= 0.0, "scatter.a_prime: must be >= 0");
  check(s.scatter.frequency > 0.0, "scatter.f: must be > 0");
  check(s.scatter.wavelength > 0.0, "scatter.lambda: must be > 0");
  check(noise.bhd1_db >= 0.0, "noise.bhd1.squeezing_db: must be >= 0");
  check(noise.bhd2_db >= 0.0, "noise.bhd2.squeezing_db: must be >= 0");
  check(noise.bhd1_eta > 0.0 && noise.bhd1_eta <= 1.0, "noise.bhd1.eta: must lie in (0, 1]");
  check(noise.bhd2_eta > 0.0 && noise.bhd2_eta <= 1.0, "noise.bhd2.eta: must lie in (0, 1]");
  check(cfg.fit.f_seed > 0.0, "fit.f_seed: must be > 0");
  check(cfg.fit.max_iterations > 0, "fit.max_iterations: must be > 0");
  check(cfg.fit.cost_tolerance > 0.0, "fit.cost_tolerance: must be > 0");
  check(cfg.fit.param_tolerance > 0.0, "fit.param_tolerance: must be > 0");
  check(cfg.fit.multistart_count >= 1, "fit.multistart_count: must be >= 1");
  check(cfg.fit.damping_init > 0.0, "fit.damping_init: must be > 0");
  check(cfg.fit.max_depth > 0.0, "fit.max_depth: must be > 0");
  check(cfg.fit.detection_snr > 0.0, "fit.detection_snr: must be > 0");
  check(cfg.spectral.segment_length >= 4, "spectral.segment_length: must be >= 4");
  check(cfg.spectral.segment_length <= Eigen::Index(std::llround(s.sample_rate * s.duration)) || !(s.duration > 0.0),
        "spectral.segment_length: longer than the record");
  check(cfg.spectral.overlap_fraction >= 0.0 && cfg.spectral.overlap_fraction <= 0.9,
        "spectral.overlap: must lie in [0, 0.9]");
  check(cfg.high_band_lo < cfg.high_band_hi, "analysis.high_band_lo: must be below analysis.high_band_hi");
  check(cfg.low_band_lo < cfg.low_band_hi, "analysis.low_band_lo: must be below analysis.low_band_hi");

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << problems.size() << " configuration error(s):";
    for (const auto& p : problems) msg << "\n  " << p;
    throw Error(ErrorCode::Config, msg.str());
  }

  cfg.sim.chirp.duration = cfg.sim.duration;
  cfg.sim.noise.bhd1 = NoiseSpec::from_db(noise.bhd1_db, noise.bhd1_eta);
  cfg.sim.noise.bhd2 = NoiseSpec::from_db(noise.bhd2_db, noise.bhd2_eta);
  cfg.fit.wavelength = cfg.sim.scatter.wavelength;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_key_values(path)); }

KeyValueFile to_key_values(const RunConfig& cfg) {
  KeyValueFile kv;
  for (const auto& [key, field] : field_table()) {
    kv.set(key, field.show(cfg));
    if (key == "scatter.delta_phi") {
      kv.set("noise.bhd1.squeezing_db", format_exact(cfg.sim.noise.bhd1.squeezing_db()));
      kv.set("noise.bhd1.eta", format_exact(cfg.sim.noise.bhd1.eta()));
      kv.set("noise.bhd2.squeezing_db", format_exact(cfg.sim.noise.bhd2.squeezing_db()));
      kv.set("noise.bhd2.eta", format_exact(cfg.sim.noise.bhd2.eta()));
    }
  }
  kv.set("spectral.window", std::string(to_string(cfg.spectral.window)));
  kv.set("output.dir", cfg.output_dir.string());
  return kv;
}

}  // namespace qdm
