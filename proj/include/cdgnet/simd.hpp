#pragma once

// Runtime instruction-set selection for the arithmetic kernels.
//
// The AVX2 variants are compiled into their own translation unit with
// -mavx2 -mfma and are only entered after the CPU reports support. Setting
// CDG_ISA=scalar in the environment forces the reference kernels.

#include <string_view>

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__) || defined(_M_IX86)
#define CDG_ARCH_X86 1
#else
#define CDG_ARCH_X86 0
#endif

namespace cdg::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA this binary and CPU can both run.
Isa detected_isa() noexcept;
bool isa_supported(Isa isa) noexcept;

Isa active_isa() noexcept;
/// Throws ContractError when the ISA is not supported here.
void set_active_isa(Isa isa);

/// Scoped override, mainly for equivalence tests.
class IsaScope {
 public:
  explicit IsaScope(Isa isa);
  ~IsaScope();
  IsaScope(const IsaScope&) = delete;
  IsaScope& operator=(const IsaScope&) = delete;

 private:
  Isa previous_;
};

}  // namespace cdg::simd
