#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogeffort/core.hpp"

namespace cogeffort::features {

enum class FeatureSet { Basic, ST, FC, ST_FC, Temporal };

std::string_view to_string(FeatureSet id);
/// Accepts basic|st|fc|st_fc|temporal (case-insensitive, "st+fc" too).
FeatureSet parse_feature_set(std::string_view name);

inline constexpr std::size_t kStatCount = 8;
inline constexpr std::array<std::string_view, kStatCount> kStatNames = {
    "mean", "std", "max", "min", "grad_mean", "sq_grad_mean", "skew", "kurt"};

/// [mean, std, max, min, mean first difference, mean squared first
/// difference, skewness, kurtosis]. Population moments; skewness m3/m2^1.5,
/// non-excess kurtosis m4/m2^2, both 0 for a constant series. Requires at
/// least two samples.
std::array<double, kStatCount> stat_features(std::span<const double> series);

struct FeatureVector {
  TrialKey key;
  std::vector<std::string> names;
  std::vector<double> values;
};

/// 16 x 8 statistics, names "opt{c}_{stat}"; masked channels give zeros.
FeatureVector st_features(const TrialRecord& trial);

using FcMatrix = std::array<std::array<double, kChannels>, kChannels>;

/// Pearson correlation between channels over the window. Diagonal is 1 for
/// usable channels; any pair touching a masked or constant channel is 0.
FcMatrix fc_matrix(const TrialRecord& trial);

/// Upper triangle of fc_matrix in row-major order, names "fc_{i}_{j}".
FeatureVector fc_features(const TrialRecord& trial);

/// Per-channel means, names "opt{c}_mean"; masked channels give zeros.
FeatureVector basic_features(const TrialRecord& trial);

struct FeatureRow {
  TrialKey key;
  int label = 0;
  std::vector<double> values;

  bool operator==(const FeatureRow&) const = default;
};

struct FeatureTable {
  FeatureSet id = FeatureSet::ST_FC;
  std::vector<std::string> names;
  std::vector<FeatureRow> rows;

  std::size_t cols() const { return names.size(); }
  bool operator==(const FeatureTable&) const = default;
};

struct DeltaOptions {
  /// Keep the delta between the last question of session 1 and the first
  /// of session 2.
  bool cross_session = true;
};

/// Consecutive-question differences per participant (rows sorted by
/// participant then question order). Each delta row takes the later
/// question's key and label; every participant's first question yields no
/// row. Participants with a single trial are skipped with a warning.
FeatureTable delta_features(const FeatureTable& table, const Dataset& dataset, const DeltaOptions& opts = {},
                            std::vector<std::string>* warnings = nullptr);

struct AssembleOptions {
  DeltaOptions delta;
  int jobs = 1;
};

/// Basic (16 cols), ST (128), FC (120), ST_FC (248, ST then FC) or
/// Temporal (deltas of ST_FC).
FeatureTable assemble(FeatureSet id, const Dataset& dataset, const AssembleOptions& opts = {},
                      std::vector<std::string>* warnings = nullptr);

/// Header: participant_id,question_order,label,<feature names>. Values use
/// 17 significant digits so read_table(format_table(t)) == t.
std::string format_table(const FeatureTable& t);
FeatureTable parse_table(std::string_view text, const std::string& source, FeatureSet id);
void write_table(const std::filesystem::path& path, const FeatureTable& t);
FeatureTable read_table(const std::filesystem::path& path, FeatureSet id);

}  // namespace cogeffort::features
