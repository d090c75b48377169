#pragma once

// Central finite-difference verification of analytic gradients (64-bit).

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cdgnet/tensor.hpp"

namespace cdg {

struct GradCheckInput {
  std::string name;
  Tensor<double> tensor;  // must be a leaf; perturbed in place and restored
};

struct GradCheckOptions {
  double eps = 1e-6;
  // Upper bound on probed elements per input (evenly strided); 0 = all.
  std::size_t max_probes = 0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_input;
  std::size_t worst_index = 0;
  std::size_t probes = 0;
};

/// Compares d f / d input from backward() against
/// (f(p+eps) - f(p-eps)) / 2eps for each probed element, returning the max of
/// |analytic - numeric| / max(1, |analytic|). `f` must rebuild the graph
/// from the current tensor values on each call and return a single element.
/// Throws NumericError naming the input when a value is not finite, and
/// ContractError when eps is outside [1e-6, 1e-3].
GradCheckReport grad_check(const std::function<Tensor<double>()>& f,
                           const std::vector<GradCheckInput>& inputs,
                           const GradCheckOptions& opts = {});

}  // namespace cdg
