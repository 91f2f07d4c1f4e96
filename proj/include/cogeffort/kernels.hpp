#pragma once

// Arithmetic inner loops shared by the signal, feature and classifier code.
//
// Every kernel has a portable scalar reference implementation and, on x86-64
// builds, an AVX2+FMA variant. The variant is chosen once at runtime from the
// CPU feature bits; COGEFFORT_SIMD=scalar in the environment (or
// set_backend) forces the reference path. The two paths agree to rounding
// but not bit-for-bit, since vector lanes change the summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace cogeffort::kernels {

enum class Backend { Scalar, Avx2 };

/// Backend in use by the dispatching entry points below.
Backend active_backend();

/// True when the running CPU and the build both support the backend.
bool backend_available(Backend b);

/// Overrides runtime selection. Throws DomainError if unavailable.
void set_backend(Backend b);

std::string_view backend_name(Backend b);

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Sum of (x[i] - center)^2.
double sum_squared_deviation(std::span<const double> x, double center);

/// Valid-mode correlation of a padded input with reversed taps:
///   out[n] = sum_k taps[k] * padded[n + taps.size() - 1 - k]
/// padded.size() must equal out.size() + taps.size() - 1.
void fir_valid(std::span<const double> padded, std::span<const double> taps, std::span<double> out);

namespace scalar {
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double sum_squared_deviation(std::span<const double> x, double center);
void fir_valid(std::span<const double> padded, std::span<const double> taps, std::span<double> out);
}  // namespace scalar

namespace avx2 {
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double sum_squared_deviation(std::span<const double> x, double center);
void fir_valid(std::span<const double> padded, std::span<const double> taps, std::span<double> out);
}  // namespace avx2

}  // namespace cogeffort::kernels
