#include "cogeffort/preprocess.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "cogeffort/error.hpp"
#include "cogeffort/kernels.hpp"

namespace cogeffort::preprocess {

FilterTaps design_lowpass_fir(int order, double cutoff_hz, double fs_hz) {
  if (order < 2 || order % 2 != 0) {
    throw DomainError("filter order must be even and >= 2, got " + std::to_string(order));
  }
  if (!(fs_hz > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < fs_hz / 2.0)) {
    throw DomainError("cutoff must lie in (0, fs/2)");
  }
  const double fc = cutoff_hz / fs_hz;  // cycles per sample
  const double half = order / 2.0;
  FilterTaps taps{std::vector<double>(static_cast<std::size_t>(order) + 1), cutoff_hz, fs_hz};
  double sum = 0.0;
  for (int n = 0; n <= order; ++n) {
    const double m = n - half;
    const double x = 2.0 * fc * m;
    const double sinc = (m == 0.0) ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / order);
    taps.coefficients[static_cast<std::size_t>(n)] = 2.0 * fc * sinc * window;
    sum += taps.coefficients[static_cast<std::size_t>(n)];
  }
  for (auto& c : taps.coefficients) c /= sum;
  // Enforce exact symmetry after normalization.
  for (int n = 0; n < order / 2; ++n) {
    auto& a = taps.coefficients[static_cast<std::size_t>(n)];
    auto& b = taps.coefficients[static_cast<std::size_t>(order - n)];
    a = b = 0.5 * (a + b);
  }
  return taps;
}

double magnitude_response(const FilterTaps& taps, double f_hz) {
  const double w = 2.0 * std::numbers::pi * f_hz / taps.sampling_rate_hz;
  std::complex<double> h{0.0, 0.0};
  for (std::size_t n = 0; n < taps.coefficients.size(); ++n) {
    h += taps.coefficients[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return std::abs(h);
}

std::vector<double> apply_filter(std::span<const double> series, const FilterTaps& taps) {
  const std::size_t order = taps.order();
  if (series.size() < taps.coefficients.size()) {
    throw DomainError("series of " + std::to_string(series.size()) + " samples is shorter than the " +
                      std::to_string(taps.coefficients.size()) + "-tap filter");
  }
  std::vector<double> padded(series.size() + order);
  for (std::size_t j = 0; j < order; ++j) padded[j] = series[order - j];
  std::copy(series.begin(), series.end(), padded.begin() + static_cast<std::ptrdiff_t>(order));
  std::vector<double> out(series.size());
  kernels::fir_valid(padded, taps.coefficients, out);
  return out;
}

namespace {

struct Solver2x2 {
  double a, b, c, d, det;
};

Solver2x2 mbll_system(const MbllParams& p) {
  const double scale = p.source_detector_distance_cm * p.differential_pathlength_factor;
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("source-detector distance and DPF must be positive");
  }
  const auto& e = p.extinction;
  Solver2x2 s{e[0][0] * scale, e[0][1] * scale, e[1][0] * scale, e[1][1] * scale, 0.0};
  s.det = s.a * s.d - s.b * s.c;
  const double norm = std::abs(s.a) + std::abs(s.b) + std::abs(s.c) + std::abs(s.d);
  if (!std::isfinite(s.det) || std::abs(s.det) <= 1e-12 * norm * norm) {
    throw DomainError("extinction matrix is singular");
  }
  return s;
}

double mean_over(std::span<const double> x, SampleRange r) {
  double s = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) s += x[i];
  return s / static_cast<double>(r.end - r.begin);
}

}  // namespace

HemoglobinChange mbll_convert(std::span<const double> i730, std::span<const double> i850, SampleRange baseline,
                              const MbllParams& p) {
  if (i730.size() != i850.size()) throw DomainError("wavelength series differ in length");
  if (baseline.begin >= baseline.end || baseline.end > i730.size()) {
    throw DomainError("baseline window empty or out of range");
  }
  for (std::size_t i = 0; i < i730.size(); ++i) {
    if (!(i730[i] > 0.0) || !(i850[i] > 0.0)) {
      throw DataError("non-positive light intensity at sample " + std::to_string(i));
    }
  }
  const Solver2x2 s = mbll_system(p);
  const double base730 = mean_over(i730, baseline);
  const double base850 = mean_over(i850, baseline);

  HemoglobinChange out{std::vector<double>(i730.size()), std::vector<double>(i730.size())};
  for (std::size_t i = 0; i < i730.size(); ++i) {
    const double od730 = -std::log10(i730[i] / base730);
    const double od850 = -std::log10(i850[i] / base850);
    // Cramer's rule, mM -> uM.
    out.hbo[i] = 1000.0 * (s.d * od730 - s.b * od850) / s.det;
    out.hbr[i] = 1000.0 * (s.a * od850 - s.c * od730) / s.det;
  }
  return out;
}

Intensities mbll_forward(std::span<const double> hbo_um, std::span<const double> hbr_um, double i0_730,
                         double i0_850, const MbllParams& p) {
  if (hbo_um.size() != hbr_um.size()) throw DomainError("concentration series differ in length");
  const Solver2x2 s = mbll_system(p);
  Intensities out{std::vector<double>(hbo_um.size()), std::vector<double>(hbo_um.size())};
  for (std::size_t i = 0; i < hbo_um.size(); ++i) {
    const double hbo = hbo_um[i] / 1000.0;
    const double hbr = hbr_um[i] / 1000.0;
    out.wl730[i] = i0_730 * std::pow(10.0, -(s.a * hbo + s.b * hbr));
    out.wl850[i] = i0_850 * std::pow(10.0, -(s.c * hbo + s.d * hbr));
  }
  return out;
}

std::vector<double> detrend_linear(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw DomainError("detrending needs at least 2 samples");
  const double mean = kernels::sum(series) / static_cast<double>(n);
  const double t_mid = (static_cast<double>(n) - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - t_mid;
    sxy += t * (series[i] - mean);
    sxx += t * t;
  }
  const double slope = sxy / sxx;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = series[i] - mean - slope * (static_cast<double>(i) - t_mid);
  }
  return out;
}

ChannelMask reject_channels(const TrialRecord& trial, double variance_floor, double saturation_ceiling) {
  ChannelMask mask = trial.channel_mask;
  for (std::size_t c = 0; c < trial.hbo.channels() && c < kChannels; ++c) {
    if (!mask[c]) continue;
    const auto x = trial.hbo.channel(c);
    if (x.empty()) {
      mask[c] = false;
      continue;
    }
    const double mean = kernels::sum(x) / static_cast<double>(x.size());
    const double var = kernels::sum_squared_deviation(x, mean) / static_cast<double>(x.size());
    std::size_t saturated = 0;
    for (double v : x) {
      if (std::abs(v) > saturation_ceiling) ++saturated;
    }
    const bool flat = !(var >= variance_floor);
    const bool clipped = static_cast<double>(saturated) > 0.05 * static_cast<double>(x.size());
    if (flat || clipped) mask[c] = false;
  }
  return mask;
}

TrialRecord process_hbo_trial(TrialRecord trial, const Params& p) {
  trial.channel_mask = reject_channels(trial, p.variance_floor, p.saturation_ceiling);
  for (std::size_t c = 0; c < kChannels; ++c) {
    auto ch = trial.hbo.channel(c);
    if (!trial.channel_mask[c]) {
      std::fill(ch.begin(), ch.end(), 0.0);
      continue;
    }
    const auto d = detrend_linear(ch);
    std::copy(d.begin(), d.end(), ch.begin());
  }
  return trial;
}

TrialRecord process_intensity_table(const ingest::RawTrialTable& table, const Params& p) {
  const auto cols = ingest::signal_columns(table);
  if (cols.kind != ingest::SignalKind::Intensity) {
    throw DataError(to_string(table.meta.key()) + ": not a two-wavelength intensity table");
  }
  const FilterTaps taps = design_lowpass_fir(p.filter_order, p.cutoff_hz, p.sampling_rate_hz);
  const std::size_t n = table.row_count();
  if (p.baseline_samples == 0 || p.baseline_samples > n) {
    throw DomainError("baseline window does not fit in the trial");
  }

  TrialRecord rec;
  rec.participant_id = table.meta.participant_id;
  rec.question_id = table.meta.question_id;
  rec.question_order = table.meta.question_order;
  rec.session = table.meta.session;
  rec.label = table.meta.label;
  rec.segment = segment_of(table.meta.question_order);
  rec.channel_mask = table.channel_mask;
  rec.hbo = SignalMatrix(p.window, kChannels);

  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!rec.channel_mask[c]) continue;
    const auto raw730 = ingest::column_values(table, cols.wl730[c]);
    const auto raw850 = ingest::column_values(table, cols.wl850[c]);
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) positive = positive && raw730[i] > 0.0 && raw850[i] > 0.0;
    if (!positive) {
      // Dead optode: nothing to convert.
      rec.channel_mask[c] = false;
      continue;
    }
    const auto f730 = apply_filter(raw730, taps);
    const auto f850 = apply_filter(raw850, taps);
    const auto conc = mbll_convert(f730, f850, {0, p.baseline_samples}, p.mbll);
    auto dst = rec.hbo.channel(c);
    for (std::size_t s = 0; s < p.window; ++s) dst[s] = conc.hbo[std::min(s, n - 1)];
  }
  return process_hbo_trial(std::move(rec), p);
}

Params load_params(const std::filesystem::path& path, Params base) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    if (j.contains("filter")) {
      const auto& f = j["filter"];
      base.filter_order = f.value("order", base.filter_order);
      base.cutoff_hz = f.value("cutoff_hz", base.cutoff_hz);
      base.sampling_rate_hz = f.value("sampling_rate_hz", base.sampling_rate_hz);
    }
    if (j.contains("mbll")) {
      const auto& m = j["mbll"];
      base.mbll.source_detector_distance_cm = m.value("distance_cm", base.mbll.source_detector_distance_cm);
      base.mbll.differential_pathlength_factor = m.value("dpf", base.mbll.differential_pathlength_factor);
      if (m.contains("extinction")) {
        const auto& e = m["extinction"];
        const char* wl[2] = {"730", "850"};
        for (int r = 0; r < 2; ++r) {
          if (!e.contains(wl[r])) continue;
          base.mbll.extinction[r][0] = e[wl[r]].value("hbo", base.mbll.extinction[r][0]);
          base.mbll.extinction[r][1] = e[wl[r]].value("hbr", base.mbll.extinction[r][1]);
        }
      }
    }
    if (j.contains("rejection")) {
      const auto& r = j["rejection"];
      base.variance_floor = r.value("variance_floor", base.variance_floor);
      base.saturation_ceiling = r.value("saturation_ceiling", base.saturation_ceiling);
    }
    base.baseline_samples = j.value("baseline_samples", base.baseline_samples);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return base;
}

}  // namespace cogeffort::preprocess
