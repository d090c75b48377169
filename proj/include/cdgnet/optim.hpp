#pragma once

// Adam with bias correction and the step-decay learning-rate schedule.

#include <cstdint>
#include <vector>

#include "cdgnet/params.hpp"

namespace cdg {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
class Adam {
 public:
  explicit Adam(const ParameterSet<T>& set, AdamOptions opts = {});

  /// One update from the gradients currently stored on the parameters. All
  /// gradients are checked first; a non-finite entry raises NumericError
  /// naming the parameter and leaves everything untouched. Masked taps are
  /// forced back to zero afterwards.
  void step(ParameterSet<T>& set, double lr);

  std::int64_t steps() const noexcept { return t_; }
  const std::vector<std::vector<T>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<T>>& second_moments() const noexcept { return v_; }

  /// Reinstates saved state; moment extents must match the parameters.
  void restore(std::int64_t steps, std::vector<std::vector<T>> m, std::vector<std::vector<T>> v);

 private:
  AdamOptions opts_;
  std::int64_t t_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

/// base * decay^floor(epoch / step).
double lr_at(int epoch, double base = 1e-4, double decay = 0.5, int step = 500);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace cdg
