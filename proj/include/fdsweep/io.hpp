#pragma once

// Persistence and interchange: sweep archives (for resuming interrupted
// runs), rational-model JSON, and CSV exports for spectra and time series.
// All exports are deterministic byte-for-byte for identical inputs.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdsweep/afs.hpp"
#include "fdsweep/types.hpp"
#include "fdsweep/vecfit.hpp"

namespace fdsweep {

inline constexpr int kArchiveVersion = 1;

struct SweepArchive {
    int version = kArchiveVersion;
    AfsConfig config;
    std::vector<FrequencySample> samples;
    std::optional<RationalModel> model;

    bool operator==(const SweepArchive&) const = default;
};

void save_archive(const SweepArchive& archive, const std::filesystem::path& path);
SweepArchive load_archive(const std::filesystem::path& path);

// Model JSON: {"poles": [[re, im], ...], "residues": {"label": [[re, im], ...]}}.
// Channel order follows key order; numbers round-trip exactly.
std::string model_to_json(const RationalModel& model);
RationalModel model_from_json(const std::string& json_text);
void save_model(const RationalModel& model, const std::filesystem::path& path);
RationalModel load_model(const std::filesystem::path& path);

// Spectrum CSV: header "omega,channel,re,im,abs"; one row per sample and
// channel, sorted by omega ascending then channel label.
std::string spectrum_csv(std::span<const FrequencySample> samples,
                         std::span<const std::string> channel_labels);

// Time-series CSV: header "t,<label1>,<label2>,..."; one row per time.
std::string timeseries_csv(const TimeSeries& series);
TimeSeries parse_timeseries_csv(const std::string& text);
TimeSeries load_timeseries_csv(const std::filesystem::path& path);

// Writes via a temp file in the destination directory plus a rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);
std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit content hash, rendered as "fnv1a64:<hex>".
std::string content_hash(const std::string& bytes);

}  // namespace fdsweep
