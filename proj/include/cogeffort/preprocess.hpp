#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "cogeffort/core.hpp"
#include "cogeffort/ingest.hpp"

namespace cogeffort::preprocess {

/// Linear-phase low-pass FIR taps.
struct FilterTaps {
  std::vector<double> coefficients;
  double nominal_cutoff_hz = 0.0;
  double sampling_rate_hz = 0.0;

  std::size_t order() const { return coefficients.size() - 1; }
};

/// Windowed-sinc low-pass design with a Hamming window, normalized to unit
/// DC gain. Requires an even order >= 2 and 0 < cutoff_hz < fs_hz / 2.
FilterTaps design_lowpass_fir(int order = 20, double cutoff_hz = 0.1, double fs_hz = 10.0);

/// |H(f)| of the taps, evaluated from the discrete-time Fourier transform.
double magnitude_response(const FilterTaps& taps, double f_hz);

/// Causal convolution y[n] = sum_k h[k] x[n-k]. Samples before the start are
/// taken from the signal mirrored about its first sample (x[-j] = x[j]).
/// Output has the input's length; the input must be at least as long as the
/// tap vector.
std::vector<double> apply_filter(std::span<const double> series, const FilterTaps& taps);

/// Modified Beer-Lambert constants. Extinction coefficients are in
/// 1/(mM*cm), rows are wavelengths {730, 850}, columns {HbO, HbR}.
struct MbllParams {
  double source_detector_distance_cm = 2.5;
  double differential_pathlength_factor = 6.0;
  std::array<std::array<double, 2>, 2> extinction{{{0.3900, 1.1022}, {1.0580, 0.69132}}};
};

/// Concentration changes in micromolar.
struct HemoglobinChange {
  std::vector<double> hbo;
  std::vector<double> hbr;
};

struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

/// Optical density change dOD = -log10(I / mean(I over baseline)) per
/// wavelength, then per sample solves
///   [dOD730; dOD850] = E * [dHbO; dHbR] * d * DPF
/// Concentrations are returned in uM (the mM solution times 1000).
HemoglobinChange mbll_convert(std::span<const double> intensity_730, std::span<const double> intensity_850,
                              SampleRange baseline, const MbllParams& p = {});

/// Forward model matching mbll_convert: intensities produced by concentration
/// changes (uM) relative to baseline intensities i0_730 / i0_850.
struct Intensities {
  std::vector<double> wl730;
  std::vector<double> wl850;
};
Intensities mbll_forward(std::span<const double> hbo_um, std::span<const double> hbr_um, double i0_730,
                         double i0_850, const MbllParams& p = {});

/// Removes the least-squares line. Requires at least two samples.
std::vector<double> detrend_linear(std::span<const double> series);

/// A channel is rejected when its population variance is below
/// variance_floor, or when more than 5% of its samples exceed
/// saturation_ceiling in absolute value. Channels already masked stay masked.
ChannelMask reject_channels(const TrialRecord& trial, double variance_floor, double saturation_ceiling);

struct Params {
  int filter_order = 20;
  double cutoff_hz = 0.1;
  double sampling_rate_hz = SessionStructure::sampling_rate_hz;
  std::size_t baseline_samples = 20;
  double variance_floor = 1e-12;
  double saturation_ceiling = 1e3;
  std::size_t window = kWindow;
  MbllParams mbll;
};

/// Reads MBLL constants and filter settings from a JSON config, keeping
/// defaults for absent keys. DataError on malformed input.
Params load_params(const std::filesystem::path& path, Params base = {});

/// Delta-HbO trial: rejection, then per-channel detrending of unmasked
/// channels. Masked channels are zeroed.
TrialRecord process_hbo_trial(TrialRecord trial, const Params& p = {});

/// Two-wavelength intensity table (complete, see ingest::impute_missing):
/// low-pass filter each intensity series, convert with MBLL against the
/// first baseline_samples, window, then process_hbo_trial.
TrialRecord process_intensity_table(const ingest::RawTrialTable& table, const Params& p = {});

}  // namespace cogeffort::preprocess
