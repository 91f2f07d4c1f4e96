#include "cogeffort/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "cogeffort/error.hpp"

namespace cogeffort::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(COGEFFORT_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("COGEFFORT_SIMD")) {
    if (std::string(env) == "scalar") return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

Backend active_backend() { return current().load(std::memory_order_relaxed); }

bool backend_available(Backend b) { return b == Backend::Scalar || cpu_has_avx2(); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw DomainError(std::string("SIMD backend unavailable: ") + std::string(backend_name(b)));
  }
  current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) { return b == Backend::Scalar ? "scalar" : "avx2"; }

#if defined(COGEFFORT_WITH_AVX2)
#define COGEFFORT_DISPATCH(fn, ...) \
  (active_backend() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define COGEFFORT_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum(std::span<const double> x) { return COGEFFORT_DISPATCH(sum, x); }

double dot(std::span<const double> a, std::span<const double> b) {
  return COGEFFORT_DISPATCH(dot, a, b);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  return COGEFFORT_DISPATCH(squared_distance, a, b);
}

double sum_squared_deviation(std::span<const double> x, double center) {
  return COGEFFORT_DISPATCH(sum_squared_deviation, x, center);
}

void fir_valid(std::span<const double> padded, std::span<const double> taps, std::span<double> out) {
  COGEFFORT_DISPATCH(fir_valid, padded, taps, out);
}

#undef COGEFFORT_DISPATCH

#if !defined(COGEFFORT_WITH_AVX2)
// Non-x86 builds: keep the avx2 namespace linkable for the equivalence tests,
// routed to the reference path (backend_available reports false).
namespace avx2 {
double sum(std::span<const double> x) { return scalar::sum(x); }
double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
double squared_distance(std::span<const double> a, std::span<const double> b) {
  return scalar::squared_distance(a, b);
}
double sum_squared_deviation(std::span<const double> x, double c) {
  return scalar::sum_squared_deviation(x, c);
}
void fir_valid(std::span<const double> p, std::span<const double> t, std::span<double> o) {
  scalar::fir_valid(p, t, o);
}
}  // namespace avx2
#endif

}  // namespace cogeffort::kernels
