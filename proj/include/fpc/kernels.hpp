#pragma once

#include <cstddef>

// Data-parallel inner loops used by the dense linear algebra layer.
// Every kernel exists as a scalar reference implementation and, where the
// hardware supports it, a SIMD variant (AVX2+FMA on x86-64, NEON on arm64).
// The front-door functions dispatch through a pointer table chosen once at
// startup; tests compare the variants against the scalar reference.

namespace fpc::kernels {

enum class Backend {
  Auto,    // pick the best variant the CPU supports
  Scalar,
  Avx2,
  Neon,
};

// Overrides the dispatch table. Backend::Auto re-runs detection. Throws
// std::invalid_argument if the requested backend is unavailable on this CPU.
void set_backend(Backend b);
Backend active_backend();
const char* backend_name();

// y += a*x
void axpy(double a, const double* x, double* y, std::size_t n);
// x *= a
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
// sum((x-y)^2)
double sumsq_diff(const double* x, const double* y, std::size_t n);
// out = x - a*g
void sub_scaled(const double* x, double a, const double* g, double* out,
                std::size_t n);
// out = x .* y
void mul_elem(const double* x, const double* y, double* out, std::size_t n);
// Givens rotation applied to a vector pair:
//   x' = c*x - s*y
//   y' = s*x + c*y
void rot(double* x, double* y, double c, double s, std::size_t n);

// Reference implementations, always available. The dispatched front door
// falls back to these when no SIMD variant applies.
namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sumsq_diff(const double* x, const double* y, std::size_t n);
void sub_scaled(const double* x, double a, const double* g, double* out,
                std::size_t n);
void mul_elem(const double* x, const double* y, double* out, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FPC_HAVE_AVX2_KERNELS 1
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sumsq_diff(const double* x, const double* y, std::size_t n);
void sub_scaled(const double* x, double a, const double* g, double* out,
                std::size_t n);
void mul_elem(const double* x, const double* y, double* out, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define FPC_HAVE_NEON_KERNELS 1
namespace neon {
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sumsq_diff(const double* x, const double* y, std::size_t n);
void sub_scaled(const double* x, double a, const double* g, double* out,
                std::size_t n);
void mul_elem(const double* x, const double* y, double* out, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace neon
#endif

}  // namespace fpc::kernels
