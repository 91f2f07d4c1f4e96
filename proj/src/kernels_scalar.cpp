#include "cogeffort/kernels.hpp"

namespace cogeffort::kernels::scalar {

double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_squared_deviation(std::span<const double> x, double center) {
  double s = 0.0;
  for (double v : x) {
    const double d = v - center;
    s += d * d;
  }
  return s;
}

void fir_valid(std::span<const double> padded, std::span<const double> taps, std::span<double> out) {
  const std::size_t last = taps.size() - 1;
  for (std::size_t n = 0; n < out.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * padded[n + last - k];
    out[n] = acc;
  }
}

}  // namespace cogeffort::kernels::scalar
