#include "cogeffort/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogeffort/error.hpp"

namespace cogeffort {

Region ChannelLayout::region_of(int channel) {
  if (channel < 1 || channel > static_cast<int>(kChannels)) {
    throw DomainError("channel " + std::to_string(channel) + " outside 1..16");
  }
  return (channel >= 5 && channel <= 12) ? Region::VMPFC : Region::LPFC;
}

const char* to_string(Region r) { return r == Region::LPFC ? "LPFC" : "VMPFC"; }

int segment_of(int question_order) {
  if (question_order < 1 || question_order > SessionStructure::questions) {
    throw DomainError("question_order " + std::to_string(question_order) +
                      " outside 1.." + std::to_string(SessionStructure::questions));
  }
  return (question_order + SessionStructure::questions_per_segment - 1) /
         SessionStructure::questions_per_segment;
}

int session_of_segment(int segment) {
  if (segment < 1 || segment > SessionStructure::segments) {
    throw DomainError("segment " + std::to_string(segment) + " outside 1..4");
  }
  return (segment + SessionStructure::segments_per_session - 1) /
         SessionStructure::segments_per_session;
}

std::string to_string(const TrialKey& key) {
  return "(" + key.participant_id + ", q" + std::to_string(key.question_order) + ")";
}

Dataset::Dataset(std::vector<TrialRecord> trials) : trials_(std::move(trials)) {
  std::stable_sort(trials_.begin(), trials_.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return a.key() < b.key(); });
  for (const auto& t : trials_) {
    if (participants_.empty() || participants_.back() != t.participant_id) {
      participants_.push_back(t.participant_id);
    }
  }
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(
      trials_.begin(), trials_.end(), [label](const TrialRecord& t) { return t.label == label; }));
}

std::size_t Dataset::find(const TrialKey& key) const {
  auto it = std::lower_bound(trials_.begin(), trials_.end(), key,
                             [](const TrialRecord& t, const TrialKey& k) { return t.key() < k; });
  if (it == trials_.end() || it->key() != key) return npos;
  return static_cast<std::size_t>(it - trials_.begin());
}

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  auto add = [&](const TrialRecord& t, std::string rule, std::string message) {
    report.push_back({to_string(t.key()), std::move(rule), std::move(message)});
  };

  for (std::size_t i = 0; i < d.trials().size(); ++i) {
    const auto& t = d.trials()[i];
    if (t.participant_id.empty()) add(t, "participant_id", "empty participant id");
    if (t.hbo.samples() != kWindow) {
      add(t, "window_length",
          "window length " + std::to_string(t.hbo.samples()) + " != " + std::to_string(kWindow));
    }
    if (t.hbo.channels() != kChannels) {
      add(t, "channel_count",
          "channel count " + std::to_string(t.hbo.channels()) + " != " + std::to_string(kChannels));
    }
    const bool order_ok = t.question_order >= 1 && t.question_order <= SessionStructure::questions;
    if (!order_ok) {
      add(t, "question_order", "question_order " + std::to_string(t.question_order) + " outside 1..16");
    } else {
      const int seg = segment_of(t.question_order);
      if (t.segment != seg) {
        add(t, "segment",
            "segment " + std::to_string(t.segment) + " != ceil(order/4) = " + std::to_string(seg));
      }
      if (t.session != session_of_segment(seg)) {
        add(t, "session", "session " + std::to_string(t.session) + " inconsistent with segment");
      }
    }
    if (t.label != 0 && t.label != 1) {
      add(t, "label", "label " + std::to_string(t.label) + " not in {0,1}");
    }
    bool finite = true;
    for (std::size_t c = 0; c < t.hbo.channels() && finite; ++c) {
      for (double v : t.hbo.channel(c)) {
        if (!std::isfinite(v)) {
          finite = false;
          break;
        }
      }
    }
    if (!finite) add(t, "finite", "non-finite value in signal");
    if (i > 0 && d.trials()[i - 1].key() == t.key()) {
      add(t, "duplicate", "duplicate trial key");
    }
  }

  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& v : report) {
    os << (v.trial.empty() ? "<dataset>" : v.trial) << " [" << v.rule << "] " << v.message << '\n';
  }
  return os.str();
}

}  // namespace cogeffort
