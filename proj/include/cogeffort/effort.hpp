#pragma once

// Cognitive-effort metrics per participant x segment.
//
// Performance and neural effort are z-scored against a comparison group
// and rotated by 45 degrees into relative neural efficiency (RNE) and
// relative neural involvement (RNI):
//
//   P_z  = (score - GM(score)) / (SD(score) + eps)
//   CE_z = (1/x - 1/GM(x)) / (1/SD(x) + eps)      x = mean delta-HbO  (reciprocal)
//   CE_z = -(x - GM(x)) / (SD(x) + eps)                                (negation)
//   RNE  = (P_z - CE_z) / sqrt(2)
//   RNI  = (P_z + CE_z) / sqrt(2)
//
// GM and SD are the group mean and population standard deviation.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogeffort/core.hpp"

namespace cogeffort::effort {

inline constexpr double kEpsilon = 0.001;
inline constexpr double kHboFloor = 1e-6;

struct SegmentSummary {
  std::string participant_id;
  int segment = 0;
  int score = 0;        // correct answers among the segment's questions
  double mean_hbo = 0;  // over all samples, usable channels and trials
};

/// Label per trial, e.g. actual labels or classifier predictions.
using LabelSource = std::map<TrialKey, int>;

LabelSource actual_labels(const Dataset& d);

/// One summary per (participant, segment) in key order. DataError if a
/// segment lacks any of its four questions, or a trial has no label.
std::vector<SegmentSummary> summarize_segments(const Dataset& d, const LabelSource& labels);

enum class EffortMode { Reciprocal, Negation };
std::string_view to_string(EffortMode m);
EffortMode parse_effort_mode(std::string_view s);

enum class Grouping { All, PerSegment };
std::string_view to_string(Grouping g);
Grouping parse_grouping(std::string_view s);

/// DomainError on an empty group.
std::vector<double> performance_z(std::span<const double> scores, double eps = kEpsilon);

/// Reciprocal mode clamps |x| below at hbo_floor (sign kept, 0 -> +floor).
/// A group with identical values gives all zeros in either mode. In
/// reciprocal mode a group mean within hbo_floor of zero raises DomainError
/// (use negation mode instead).
std::vector<double> effort_z(std::span<const double> mean_hbos, EffortMode mode, double eps = kEpsilon,
                             double hbo_floor = kHboFloor);

struct Coordinates {
  double rne = 0.0;
  double rni = 0.0;
};

Coordinates rne_rni(double p_z, double ce_z);

enum class State { HE_HI, HE_LI, LE_HI, LE_LI };
std::string_view to_string(State s);
State parse_state(std::string_view s);

/// HE iff rne > 0, HI iff rni > 0; zero falls to the low state.
State classify_state(double rne, double rni);

struct EffortPoint {
  std::string participant_id;
  int segment = 0;
  int score = 0;
  double mean_hbo = 0.0;
  double p_z = 0.0;
  double ce_z = 0.0;
  double rne = 0.0;
  double rni = 0.0;
  State state = State::LE_LI;
};

struct EffortOptions {
  EffortMode mode = EffortMode::Reciprocal;
  Grouping grouping = Grouping::All;
  double eps = kEpsilon;
  double hbo_floor = kHboFloor;
};

std::vector<EffortPoint> compute_effort(const std::vector<SegmentSummary>& summaries, const EffortOptions& opts = {});

struct AgreementReport {
  double mae_rne = 0.0;
  double mae_rni = 0.0;
  double pearson_rne = 0.0;
  double pearson_rni = 0.0;
  int quadrant_matches = 0;
  int quadrant_total = 0;
};

/// Pearson correlation; if either side is constant it is 1 when the series
/// are identical and 0 otherwise.
double pearson(std::span<const double> a, std::span<const double> b);

/// Pairs points by (participant, segment). DataError listing keys present
/// on only one side.
AgreementReport compare(const std::vector<EffortPoint>& actual, const std::vector<EffortPoint>& predicted);

/// participant_id,segment,score,mean_hbo,p_z,ce_z,rne,rni,state
std::string format_effort(const std::vector<EffortPoint>& points);
std::vector<EffortPoint> parse_effort(std::string_view text, const std::string& source);
std::vector<EffortPoint> read_effort(const std::filesystem::path& path);

std::string format_agreement_csv(const AgreementReport& r);
std::string format_agreement_text(const AgreementReport& r);

}  // namespace cogeffort::effort
