#pragma once

// The named finite-difference suite behind `cdgnet gradcheck`: one 64-bit
// check per differentiable operation or block, on small seeded inputs.

#include <cstdint>
#include <string>
#include <vector>

namespace cdg {

inline constexpr double kGradCheckTolerance = 1e-6;

struct OpCheck {
  std::string op;
  double max_rel_err = 0.0;
  std::string worst_input;
  std::size_t probes = 0;
  double seconds = 0.0;

  bool passed() const { return max_rel_err <= kGradCheckTolerance; }
};

/// Names accepted by run_gradcheck_suite, in run order.
const std::vector<std::string>& gradcheck_ops();

/// Runs every check, or only `op` when it is non-empty (InputError if the
/// name is unknown). The same seed reproduces the same errors bitwise.
std::vector<OpCheck> run_gradcheck_suite(std::uint64_t seed, const std::string& op = "");

}  // namespace cdg
