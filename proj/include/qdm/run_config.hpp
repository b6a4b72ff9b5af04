#pragma once

#include <filesystem>
#include <string>

#include "qdm/kv_file.hpp"
#include "qdm/scatter_fit.hpp"
#include "qdm/spectral.hpp"
#include "qdm/synth.hpp"

namespace qdm {

/// Everything a command needs. Defaults reproduce the table-top setting:
/// 5 s at 16384 Hz, a 55 Hz chirp, a 5 Hz scatter drive at 3 lambda,
/// a 1 kHz marker and 5 dB of squeezing on both detectors.
struct RunConfig {
  SimulationInputs sim;
  FitConfig fit;
  WelchSettings spectral;
  std::filesystem::path output_dir = "out";
  double high_band_lo = 300.0;   // Hz
  double high_band_hi = 2000.0;
  double low_band_lo = 20.0;
  double low_band_hi = 200.0;
};

/// Builds a config from `key = value` entries on top of the defaults.
/// Unknown keys, unparsable values and range violations are all collected
/// and reported together in one Config error.
RunConfig parse_run_config(const KeyValueFile& kv);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every key with its current value, in the order parse_run_config accepts.
KeyValueFile to_key_values(const RunConfig& cfg);

}  // namespace qdm
