#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cogeffort/core.hpp"
#include "cogeffort/ingest.hpp"
#include "cogeffort/preprocess.hpp"

namespace cogeffort::synth {

enum class Emit { Hbo, RawIntensity };
std::string_view to_string(Emit e);
Emit parse_emit(std::string_view s);

/// Generator parameters. Amplitudes are in uM, drift in uM/s.
struct SynthSpec {
  int n_participants = 16;
  int questions = SessionStructure::questions;
  double baseline_amplitude = 1.0;  // activation of incorrect (label 0) trials
  double effect_size = 0.2;         // extra activation of correct trials
  double noise_sd = 1.0;
  double drift_slope_range = 0.02;  // slope drawn uniformly in [-range, range]
  double cardiac_hz = 1.1;
  double cardiac_amp = 0.3;
  double respiration_hz = 0.3;
  double respiration_amp = 0.2;
  double label_rate = 168.0 / 256.0;
  double region_contrast = 1.5;  // LPFC amplitude / VMPFC amplitude
  std::uint64_t seed = 4;
  Emit emit = Emit::Hbo;
  double intensity_730 = 1000.0;  // baseline light intensity, arbitrary units
  double intensity_850 = 1200.0;

  /// "default", "high-snr" (effect_size 2, noise_sd 0.1) or "null"
  /// (effect_size 0, label_rate 0.5).
  static SynthSpec preset(std::string_view name);

  /// DomainError naming the first invalid field.
  void validate() const;
};

/// Canonical double-gamma response (shapes 7 and 17, undershoot ratio 1/6),
/// scaled to a peak of 1. Zero for t <= 0.
double hrf(double t);

struct TrialTruth {
  TrialKey key;
  int label = 0;
  double amplitude = 0.0;  // baseline_amplitude + effect_size * label
  std::array<double, kChannels> channel_amplitude{};
};

struct GroundTruth {
  std::vector<TrialTruth> trials;  // sorted by key
};

struct SynthOutput {
  Dataset dataset;  // planted delta-HbO, first kWindow samples of each question
  GroundTruth truth;
  std::vector<ingest::RawTrialTable> intensity;  // full questions, only for Emit::RawIntensity
};

SynthOutput generate(const SynthSpec& spec, int jobs = 1);

/// Writes the emitted form (delta-HbO trials or intensity tables) plus
/// manifest.csv.
void write(const std::filesystem::path& dir, const SynthOutput& out, Emit emit);

}  // namespace cogeffort::synth
