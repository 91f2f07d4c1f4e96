#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cogeffort {

inline constexpr std::size_t kChannels = 16;

/// Session timing of the quiz protocol. All values are fixed by the
/// recording setup.
struct SessionStructure {
  static constexpr int sampling_rate_hz = 10;
  static constexpr int question_duration_s = 30;
  static constexpr int feedback_s = 5;
  static constexpr int questions_per_segment = 4;
  static constexpr int segments_per_session = 2;
  static constexpr int sessions = 2;
  static constexpr int segment_duration_s = 140;
  static constexpr int inter_segment_rest_s = 20;
  static constexpr std::size_t analysis_window_samples = 200;

  static constexpr int segments = segments_per_session * sessions;
  static constexpr int questions = questions_per_segment * segments;
  static constexpr std::size_t question_samples =
      std::size_t{question_duration_s} * sampling_rate_hz;
};

static_assert(SessionStructure::segment_duration_s ==
              SessionStructure::questions_per_segment *
                  (SessionStructure::question_duration_s + SessionStructure::feedback_s));
static_assert(SessionStructure::analysis_window_samples <= SessionStructure::question_samples);

inline constexpr std::size_t kWindow = SessionStructure::analysis_window_samples;

enum class Region { LPFC, VMPFC };

/// Headband layout: channels 1-4 and 13-16 sit over the lateral PFC,
/// channels 5-12 over the ventromedial PFC. Channels are 1-based.
struct ChannelLayout {
  static constexpr std::size_t channel_count = kChannels;
  static Region region_of(int channel);
};

const char* to_string(Region r);

/// Segment (1..4) containing the given presentation position (1..16).
/// Throws DomainError outside 1..16.
int segment_of(int question_order);

/// Session (1..2) containing the given segment (1..4).
int session_of_segment(int segment);

/// Samples x channels matrix stored channel-major so each channel's time
/// series is contiguous.
class SignalMatrix {
public:
  SignalMatrix() = default;
  SignalMatrix(std::size_t samples, std::size_t channels, double fill = 0.0)
      : samples_(samples), channels_(channels), data_(samples * channels, fill) {}

  std::size_t samples() const { return samples_; }
  std::size_t channels() const { return channels_; }

  double& at(std::size_t sample, std::size_t channel) {
    return data_[channel * samples_ + sample];
  }
  double at(std::size_t sample, std::size_t channel) const {
    return data_[channel * samples_ + sample];
  }

  std::span<double> channel(std::size_t c) {
    return {data_.data() + c * samples_, samples_};
  }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * samples_, samples_};
  }

  bool operator==(const SignalMatrix&) const = default;

private:
  std::size_t samples_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

using ChannelMask = std::array<bool, kChannels>;

inline ChannelMask all_channels() {
  ChannelMask m;
  m.fill(true);
  return m;
}

struct TrialKey {
  std::string participant_id;
  int question_order = 0;

  auto operator<=>(const TrialKey&) const = default;
  bool operator==(const TrialKey&) const = default;
};

std::string to_string(const TrialKey& key);

/// Per-trial metadata as carried by a manifest row.
struct TrialMeta {
  std::string participant_id;
  std::string question_id;
  int question_order = 0;
  int session = 0;
  int label = 0;

  TrialKey key() const { return {participant_id, question_order}; }
  bool operator==(const TrialMeta&) const = default;
};

/// One participant x question unit: the analysis window of delta-HbO for all
/// channels plus metadata and correctness label (1 correct, 0 incorrect).
struct TrialRecord {
  std::string participant_id;
  int session = 0;
  int segment = 0;
  std::string question_id;
  int question_order = 0;
  int label = 0;
  SignalMatrix hbo;
  ChannelMask channel_mask = all_channels();

  TrialKey key() const { return {participant_id, question_order}; }
  TrialMeta meta() const { return {participant_id, question_id, question_order, session, label}; }
  bool operator==(const TrialRecord&) const = default;
};

/// Collection of trials. Trials are kept sorted by key; participants lists
/// the distinct participant ids in sorted order.
class Dataset {
public:
  Dataset() = default;
  explicit Dataset(std::vector<TrialRecord> trials);

  const std::vector<TrialRecord>& trials() const { return trials_; }
  const std::vector<std::string>& participants() const { return participants_; }
  std::size_t size() const { return trials_.size(); }

  std::size_t count_label(int label) const;

  /// Index of the trial with this key, or npos.
  std::size_t find(const TrialKey& key) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const Dataset&) const = default;

private:
  std::vector<TrialRecord> trials_;
  std::vector<std::string> participants_;
};

struct Violation {
  std::string trial;  // formatted trial key, empty for dataset-level rules
  std::string rule;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Checks every TrialRecord and Dataset invariant; never throws.
ValidationReport validate_dataset(const Dataset& d);

std::string format_report(const ValidationReport& report);

}  // namespace cogeffort
