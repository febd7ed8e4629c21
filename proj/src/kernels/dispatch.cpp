#include <atomic>
#include <cstdlib>
#include <string>

#include "rcov/error.hpp"
#include "rcov/kernels.hpp"

namespace rcov::kernels {

#if defined(RCOV_HAVE_AVX2)
namespace avx2 {
void syr_lower(double* acc, std::size_t d, const double* x, double w);
double whitened_norm2(const double* r, std::size_t d, const double* x, double* work);
void whitened_norm2_rows(const double* r, std::size_t d, const double* x, std::size_t rows,
                         double* out, double* work);
}  // namespace avx2
#endif

#if defined(RCOV_HAVE_NEON)
namespace neon {
void syr_lower(double* acc, std::size_t d, const double* x, double w);
double whitened_norm2(const double* r, std::size_t d, const double* x, double* work);
void whitened_norm2_rows(const double* r, std::size_t d, const double* x, std::size_t rows,
                         double* out, double* work);
}  // namespace neon
#endif

namespace {

constexpr Table kScalar{Isa::scalar, &scalar::syr_lower, &scalar::whitened_norm2, &scalar::whitened_norm2_rows};
#if defined(RCOV_HAVE_AVX2)
constexpr Table kAvx2{Isa::avx2, &avx2::syr_lower, &avx2::whitened_norm2, &avx2::whitened_norm2_rows};
#endif
#if defined(RCOV_HAVE_NEON)
constexpr Table kNeon{Isa::neon, &neon::syr_lower, &neon::whitened_norm2, &neon::whitened_norm2_rows};
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(RCOV_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(RCOV_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

Isa widest() {
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa initial() {
  if (const char* env = std::getenv("RCOV_KERNEL")) {
    if (auto isa = parse_isa(env); isa && cpu_supports(*isa)) return *isa;
  }
  return widest();
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

}  // namespace

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const Table& table_for(Isa isa) {
  if (!cpu_supports(isa)) {
    throw InvalidConfig("kernel ISA not available: " + std::string(name(isa)));
  }
  switch (isa) {
#if defined(RCOV_HAVE_AVX2)
    case Isa::avx2:
      return kAvx2;
#endif
#if defined(RCOV_HAVE_NEON)
    case Isa::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const Table& current() { return table_for(selected().load(std::memory_order_relaxed)); }

void set_active(Isa isa) {
  (void)table_for(isa);
  selected().store(isa, std::memory_order_relaxed);
}

Isa active() { return selected().load(std::memory_order_relaxed); }

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view s) {
  if (s == "scalar") return Isa::scalar;
  if (s == "avx2") return Isa::avx2;
  if (s == "neon") return Isa::neon;
  return std::nullopt;
}

}  // namespace rcov::kernels
