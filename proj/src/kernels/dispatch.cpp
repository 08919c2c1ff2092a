#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bsqkd/kernels.hpp"

namespace bsqkd::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(BSQKD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("BSQKD_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return detected_isa();
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_sizes(std::size_t in, std::size_t out) {
  if (in != out) throw std::invalid_argument("kernel: input and output spans differ in length");
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

Isa detected_isa() noexcept {
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("kernel variant '" + std::string(to_string(isa)) +
                                "' is not supported on this machine");
  }
  active().store(isa, std::memory_order_relaxed);
}

void scan(const Chi0Objective& obj, std::span<const double> xs, std::span<double> out) {
  check_sizes(xs.size(), out.size());
#if defined(BSQKD_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::scan(obj, xs, out);
#endif
  scalar::scan(obj, xs, out);
}

void binary_entropy(std::span<const double> x, std::span<double> out) {
  check_sizes(x.size(), out.size());
#if defined(BSQKD_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::binary_entropy(x, out);
#endif
  scalar::binary_entropy(x, out);
}

}  // namespace bsqkd::kernels
