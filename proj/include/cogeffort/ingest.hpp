#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cogeffort/core.hpp"

namespace cogeffort::ingest {

/// Canonicalizes column names: trims, collapses whitespace, lower-cases.
/// Optode columns ("Optode 3", "optode3", " OPTODE  3 ") become "optode_3";
/// two-wavelength intensity columns ("Optode 3 730nm") become
/// "optode_3_730". Anything else is lower snake-cased ("Participant ID" ->
/// "participant_id"). Two names mapping to the same signal column raise
/// DataError.
std::vector<std::string> clean_column_names(const std::vector<std::string>& names);

enum class SignalKind { Hbo, Intensity };

/// One trial file: canonical column names, one row per sample (missing
/// cells are nullopt) and the manifest metadata.
struct RawTrialTable {
  TrialMeta meta;
  std::vector<std::string> column_names;
  std::vector<std::vector<std::optional<double>>> rows;
  ChannelMask channel_mask = all_channels();

  std::size_t row_count() const { return rows.size(); }
  bool operator==(const RawTrialTable&) const = default;
};

/// Positions of the signal columns in a table. For Hbo tables only `hbo` is
/// used; for Intensity tables `wl730` and `wl850`.
struct SignalColumns {
  SignalKind kind = SignalKind::Hbo;
  std::array<std::size_t, kChannels> hbo{};
  std::array<std::size_t, kChannels> wl730{};
  std::array<std::size_t, kChannels> wl850{};
};

/// Locates the signal columns; DataError unless exactly optode_1..optode_16
/// (or optode_N_730 / optode_N_850 for every N) are present.
SignalColumns signal_columns(const RawTrialTable& t);

/// Values of one column; DataError on any missing cell.
std::vector<double> column_values(const RawTrialTable& t, std::size_t column);

/// Replaces each missing signal cell by the mean of that column's observed
/// values within the trial. A column with no observed value is filled with
/// zeros and its channel masked out. Non-signal columns are left alone.
RawTrialTable impute_missing(RawTrialTable t);

/// Keeps the first n rows; shorter tables are padded by repeating the last
/// row and a warning is appended. DataError on an empty table.
RawTrialTable window_table(const RawTrialTable& t, std::size_t n,
                           std::vector<std::string>* warnings = nullptr);

/// window_table followed by conversion of an Hbo table into a TrialRecord.
/// The table must be complete (see impute_missing).
TrialRecord window_trial(const RawTrialTable& t, std::size_t n = kWindow,
                         std::vector<std::string>* warnings = nullptr);

/// Parses a trial CSV body. `source` is used in error messages.
RawTrialTable parse_trial_csv(std::string_view text, const std::string& source, const TrialMeta& meta);

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  TrialMeta meta;
};

inline constexpr const char* kManifestName = "manifest.csv";

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestEntry>& entries);

struct LoadOptions {
  std::size_t window = kWindow;
  int jobs = 1;
};

/// Reads every manifest entry of a dataset directory (no imputation).
/// DataError for an empty directory, for files the manifest names but that
/// do not exist, and for trial CSVs present on disk but absent from the
/// manifest.
std::vector<RawTrialTable> load_raw_tables(const std::filesystem::path& dir, const LoadOptions& opts = {});

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Parses, imputes and windows every trial of a delta-HbO dataset
/// directory, then validates the assembled Dataset (DataError listing the
/// violations if it does not pass).
LoadedDataset load_dataset(const std::filesystem::path& dir, const LoadOptions& opts = {});

std::string trial_file_name(const TrialKey& key);

/// Serializes a trial window; masked channels are written as empty cells.
std::string format_trial_csv(const TrialRecord& t);
std::string format_table_csv(const RawTrialTable& t);

/// Writes trial CSVs plus manifest.csv in the format load_dataset reads.
void write_dataset(const std::filesystem::path& dir, const Dataset& d);
void write_tables(const std::filesystem::path& dir, const std::vector<RawTrialTable>& tables);

}  // namespace cogeffort::ingest
