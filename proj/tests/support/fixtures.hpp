#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cogeffort/core.hpp"
#include "cogeffort/synth.hpp"

namespace fixture {

inline cogeffort::TrialRecord trial(const std::string& pid, int order, int label, double level = 0.0) {
  cogeffort::TrialRecord t;
  t.participant_id = pid;
  t.question_order = order;
  t.segment = cogeffort::segment_of(order);
  t.session = cogeffort::session_of_segment(t.segment);
  t.question_id = "Q" + std::to_string(order);
  t.label = label;
  t.hbo = cogeffort::SignalMatrix(cogeffort::kWindow, cogeffort::kChannels);
  for (std::size_t c = 0; c < cogeffort::kChannels; ++c) {
    for (std::size_t s = 0; s < cogeffort::kWindow; ++s) {
      t.hbo.at(s, c) = level + std::sin(0.05 * static_cast<double>(s * (c + 1)) + static_cast<double>(order));
    }
  }
  return t;
}

/// Full 16 x 16 grid of fixture trials with alternating labels.
inline cogeffort::Dataset grid(int participants = 16) {
  std::vector<cogeffort::TrialRecord> trials;
  for (int p = 1; p <= participants; ++p) {
    for (int q = 1; q <= cogeffort::SessionStructure::questions; ++q) {
      trials.push_back(trial("P" + std::to_string(p < 10 ? 0 : 1) + std::to_string(p % 10), q, (p + q) % 2));
    }
  }
  return cogeffort::Dataset(std::move(trials));
}

inline cogeffort::synth::SynthOutput small_synth(int participants = 4, std::uint64_t seed = 11) {
  auto spec = cogeffort::synth::SynthSpec::preset("default");
  spec.n_participants = participants;
  spec.seed = seed;
  return cogeffort::synth::generate(spec);
}

}  // namespace fixture
