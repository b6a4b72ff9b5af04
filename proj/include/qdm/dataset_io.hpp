#pragma once

#include <filesystem>
#include <iosfwd>

#include "qdm/kv_file.hpp"
#include "qdm/spectral.hpp"
#include "qdm/synth.hpp"

namespace qdm {

/// Dataset CSV: header `t,bhd1,bhd2`, time with 9 decimals, values with 9
/// significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

/// Parses the dataset schema. The sample rate is (rows - 1) / (t_last - t_0),
/// snapped to an integer when within 1e-6 relative. Rejects non-finite
/// values, short rows and non-uniform time stamps, naming the row.
Dataset read_dataset_csv(std::istream& in, const std::string& source = "<input>");
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Spectrum CSV: `freq_hz,psd` for linear spectra, `freq_hz,db_rel_shot`
/// for shot-normalized ones.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec);

/// Estimator settings as key/value metadata.
KeyValueFile spectrum_metadata(const Spectrum& spec);

}  // namespace qdm
