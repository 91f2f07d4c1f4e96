#include "cogeffort/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cogeffort/error.hpp"
#include "cogeffort/parallel.hpp"
#include "cogeffort/rng.hpp"

namespace cogeffort::synth {

namespace {

constexpr double kPeakShape = 7.0;
constexpr double kUndershootShape = 17.0;
constexpr double kUndershootRatio = 1.0 / 6.0;
constexpr double kStimulusSeconds = 20.0;
constexpr double kHbrRatio = -0.3;

double gamma_pdf(double t, double shape) { return std::pow(t, shape - 1.0) * std::exp(-t) / std::tgamma(shape); }

double hrf_raw(double t) {
  if (t <= 0.0) return 0.0;
  return gamma_pdf(t, kPeakShape) - kUndershootRatio * gamma_pdf(t, kUndershootShape);
}

double hrf_peak() {
  double lo = 3.0, hi = 9.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (hrf_raw(m1) < hrf_raw(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return hrf_raw(0.5 * (lo + hi));
}

// Stimulus boxcar over the first 20 s convolved with the HRF, scaled to a
// peak of 1.
std::vector<double> activation_template(std::size_t n, double fs) {
  const double dt = 1.0 / fs;
  const auto stim = static_cast<std::size_t>(std::lround(kStimulusSeconds * fs));
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = hrf(static_cast<double>(i) * dt);
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m <= std::min(i, stim - 1); ++m) r[i] += h[i - m] * dt;
  }
  const double peak = *std::max_element(r.begin(), r.end());
  for (auto& v : r) v /= peak;
  return r;
}

std::string two_digit(const char* prefix, int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, n);
  return buf;
}

}  // namespace

std::string_view to_string(Emit e) { return e == Emit::Hbo ? "hbo" : "raw_intensity"; }

Emit parse_emit(std::string_view s) {
  if (s == "hbo") return Emit::Hbo;
  if (s == "raw_intensity" || s == "raw-intensity" || s == "intensity") return Emit::RawIntensity;
  throw DomainError("unknown emit '" + std::string(s) + "' (expected hbo|raw_intensity)");
}

SynthSpec SynthSpec::preset(std::string_view name) {
  SynthSpec s;
  if (name == "default") return s;
  if (name == "high-snr") {
    s.effect_size = 2.0;
    s.noise_sd = 0.1;
    return s;
  }
  if (name == "null") {
    s.effect_size = 0.0;
    s.label_rate = 0.5;
    return s;
  }
  throw DomainError("unknown preset '" + std::string(name) + "' (expected default|high-snr|null)");
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw DomainError("invalid synth spec: " + m); };
  if (n_participants < 1) fail("n_participants must be >= 1");
  if (questions != SessionStructure::questions) {
    fail("questions must be " + std::to_string(SessionStructure::questions));
  }
  const double nyquist = SessionStructure::sampling_rate_hz / 2.0;
  for (auto [v, n] : {std::pair{baseline_amplitude, "baseline_amplitude"}, {effect_size, "effect_size"},
                      {noise_sd, "noise_sd"}, {drift_slope_range, "drift_slope_range"},
                      {cardiac_amp, "cardiac_amp"}, {respiration_amp, "respiration_amp"},
                      {region_contrast, "region_contrast"}}) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string(n) + " must be finite and >= 0");
  }
  for (auto [v, n] : {std::pair{cardiac_hz, "cardiac_hz"}, {respiration_hz, "respiration_hz"}}) {
    if (!(v > 0.0 && v < nyquist)) fail(std::string(n) + " must lie in (0, 5) Hz");
  }
  if (!(label_rate > 0.0 && label_rate < 1.0)) fail("label_rate must lie in (0, 1)");
  if (!(intensity_730 > 0.0) || !(intensity_850 > 0.0)) fail("baseline intensities must be > 0");
}

double hrf(double t) {
  static const double peak = hrf_peak();
  return hrf_raw(t) / peak;
}

SynthOutput generate(const SynthSpec& spec, int jobs) {
  spec.validate();
  const double fs = SessionStructure::sampling_rate_hz;
  const std::size_t n = SessionStructure::question_samples;
  const std::vector<double> act = activation_template(n, fs);
  const auto np = static_cast<std::size_t>(spec.n_participants);
  const auto nq = static_cast<std::size_t>(spec.questions);

  // Question ids are presented in a participant-specific order.
  std::vector<std::vector<int>> presented(np);
  for (std::size_t p = 0; p < np; ++p) {
    presented[p].resize(nq);
    for (std::size_t q = 0; q < nq; ++q) presented[p][q] = static_cast<int>(q) + 1;
    Rng rng(derive_seed(spec.seed, 0x5000 + p));
    rng.shuffle(presented[p]);
  }

  const bool raw = spec.emit == Emit::RawIntensity;
  std::vector<TrialRecord> trials(np * nq);
  std::vector<TrialTruth> truth(np * nq);
  std::vector<ingest::RawTrialTable> tables(raw ? np * nq : 0);

  parallel_for(np * nq, jobs, [&](std::size_t i) {
    const std::size_t p = i / nq;
    const int order = static_cast<int>(i % nq) + 1;
    Rng rng(derive_seed(spec.seed, i));

    TrialRecord& t = trials[i];
    t.participant_id = two_digit("P", static_cast<int>(p) + 1);
    t.question_order = order;
    t.segment = segment_of(order);
    t.session = session_of_segment(t.segment);
    t.question_id = two_digit("Q", presented[p][static_cast<std::size_t>(order - 1)]);
    t.label = rng.bernoulli(spec.label_rate) ? 1 : 0;

    TrialTruth& tt = truth[i];
    tt.key = t.key();
    tt.label = t.label;
    tt.amplitude = spec.baseline_amplitude + spec.effect_size * t.label;

    SignalMatrix full(n, kChannels);
    for (std::size_t c = 0; c < kChannels; ++c) {
      const bool lateral = ChannelLayout::region_of(static_cast<int>(c) + 1) == Region::LPFC;
      const double amp = tt.amplitude * (lateral ? spec.region_contrast : 1.0);
      tt.channel_amplitude[c] = amp;
      const double slope = rng.uniform(-spec.drift_slope_range, spec.drift_slope_range);
      const double phase_c = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double phase_r = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t s = 0; s < n; ++s) {
        const double time = static_cast<double>(s) / fs;
        full.at(s, c) = amp * act[s] + slope * time +
                        spec.cardiac_amp * std::sin(2.0 * std::numbers::pi * spec.cardiac_hz * time + phase_c) +
                        spec.respiration_amp *
                            std::sin(2.0 * std::numbers::pi * spec.respiration_hz * time + phase_r) +
                        spec.noise_sd * rng.normal();
      }
    }

    t.hbo = SignalMatrix(kWindow, kChannels);
    for (std::size_t c = 0; c < kChannels; ++c) {
      std::copy_n(full.channel(c).begin(), kWindow, t.hbo.channel(c).begin());
    }

    if (raw) {
      ingest::RawTrialTable& tab = tables[i];
      tab.meta = t.meta();
      tab.column_names.push_back("time_s");
      for (std::size_t c = 1; c <= kChannels; ++c) {
        tab.column_names.push_back("optode_" + std::to_string(c) + "_730");
        tab.column_names.push_back("optode_" + std::to_string(c) + "_850");
      }
      tab.rows.assign(n, std::vector<std::optional<double>>(1 + 2 * kChannels));
      for (std::size_t s = 0; s < n; ++s) tab.rows[s][0] = static_cast<double>(s) / fs;
      for (std::size_t c = 0; c < kChannels; ++c) {
        const auto hbo = full.channel(c);
        std::vector<double> hbr(hbo.begin(), hbo.end());
        for (auto& v : hbr) v *= kHbrRatio;
        const auto in = preprocess::mbll_forward(hbo, hbr, spec.intensity_730, spec.intensity_850);
        for (std::size_t s = 0; s < n; ++s) {
          tab.rows[s][1 + 2 * c] = in.wl730[s];
          tab.rows[s][2 + 2 * c] = in.wl850[s];
        }
      }
    }
  });

  SynthOutput out;
  out.dataset = Dataset(std::move(trials));
  std::sort(truth.begin(), truth.end(), [](const TrialTruth& a, const TrialTruth& b) { return a.key < b.key; });
  out.truth.trials = std::move(truth);
  out.intensity = std::move(tables);
  return out;
}

void write(const std::filesystem::path& dir, const SynthOutput& out, Emit emit) {
  if (emit == Emit::Hbo) {
    ingest::write_dataset(dir, out.dataset);
    return;
  }
  if (out.intensity.empty()) throw DomainError("no intensity tables were generated (emit was hbo)");
  ingest::write_tables(dir, out.intensity);
}

}  // namespace cogeffort::synth
