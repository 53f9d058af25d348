#include <cstdlib>
#include <string>

#include "psim/simd/minhash.hpp"

namespace psim::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Avx512: return "avx512";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2:
      return __builtin_cpu_supports("avx2");
    case Isa::Avx512:
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq");
#endif
#if defined(__aarch64__)
    case Isa::Neon:
      return true;
#endif
    default:
      return false;
  }
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512, Isa::Neon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

namespace {

Isa detect() {
  if (const char* forced = std::getenv("PSIM_SIMD")) {
    const std::string want(forced);
    for (Isa isa : available_isas()) {
      if (isa_name(isa) == want) return isa;
    }
  }
  for (Isa isa : {Isa::Avx512, Isa::Avx2, Isa::Neon}) {
    if (isa_available(isa)) return isa;
  }
  return Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

FeedKernel feed_kernel(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return &feed_avx2;
    case Isa::Avx512: return &feed_avx512;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return &feed_neon;
#endif
    default: return &feed_scalar;
  }
}

}  // namespace psim::simd
