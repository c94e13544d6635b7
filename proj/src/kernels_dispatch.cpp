#include "fpc/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace fpc::kernels {

namespace {

struct Table {
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*sumsq_diff)(const double*, const double*, std::size_t);
  void (*sub_scaled)(const double*, double, const double*, double*, std::size_t);
  void (*mul_elem)(const double*, const double*, double*, std::size_t);
  void (*rot)(double*, double*, double, double, std::size_t);
};

constexpr Table kScalarTable = {
    scalar::axpy,  scalar::scal,       scalar::dot,      scalar::sumsq,
    scalar::sumsq_diff, scalar::sub_scaled, scalar::mul_elem, scalar::rot};

#ifdef FPC_HAVE_AVX2_KERNELS
constexpr Table kAvx2Table = {
    avx2::axpy,  avx2::scal,       avx2::dot,      avx2::sumsq,
    avx2::sumsq_diff, avx2::sub_scaled, avx2::mul_elem, avx2::rot};

bool cpu_has_avx2_fma() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#ifdef FPC_HAVE_NEON_KERNELS
constexpr Table kNeonTable = {
    neon::axpy,  neon::scal,       neon::dot,      neon::sumsq,
    neon::sumsq_diff, neon::sub_scaled, neon::mul_elem, neon::rot};
#endif

Backend detect() {
#ifdef FPC_HAVE_AVX2_KERNELS
  if (cpu_has_avx2_fma()) return Backend::Avx2;
#endif
#ifdef FPC_HAVE_NEON_KERNELS
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

// Selection happens once at startup; set_backend is a test/benchmark hook and
// is not expected to race with in-flight kernels.
std::atomic<const Table*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &kScalarTable;
    case Backend::Avx2:
#ifdef FPC_HAVE_AVX2_KERNELS
      if (cpu_has_avx2_fma()) return &kAvx2Table;
#endif
      return nullptr;
    case Backend::Neon:
#ifdef FPC_HAVE_NEON_KERNELS
      return &kNeonTable;
#else
      return nullptr;
#endif
    case Backend::Auto:
      break;
  }
  return nullptr;
}

const Table& active() {
  const Table* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    const Backend b = detect();
    t = table_for(b);
    if (t == nullptr) t = &kScalarTable;
    g_table.store(t, std::memory_order_release);
    g_backend.store(t == &kScalarTable ? Backend::Scalar : b,
                    std::memory_order_release);
  }
  return *t;
}

}  // namespace

void set_backend(Backend b) {
  if (b == Backend::Auto) {
    g_table.store(nullptr, std::memory_order_release);
    active();
    return;
  }
  const Table* t = table_for(b);
  if (t == nullptr) {
    throw std::invalid_argument("requested kernel backend is not available on this CPU");
  }
  g_table.store(t, std::memory_order_release);
  g_backend.store(b, std::memory_order_release);
}

Backend active_backend() {
  active();
  return g_backend.load(std::memory_order_acquire);
}

const char* backend_name() {
  switch (active_backend()) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    case Backend::Auto: break;
  }
  return "auto";
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
void scal(double a, double* x, std::size_t n) { active().scal(a, x, n); }
double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }
double sumsq_diff(const double* x, const double* y, std::size_t n) {
  return active().sumsq_diff(x, y, n);
}
void sub_scaled(const double* x, double a, const double* g, double* out,
                std::size_t n) {
  active().sub_scaled(x, a, g, out, n);
}
void mul_elem(const double* x, const double* y, double* out, std::size_t n) {
  active().mul_elem(x, y, out, n);
}
void rot(double* x, double* y, double c, double s, std::size_t n) {
  active().rot(x, y, c, s, n);
}

}  // namespace fpc::kernels
