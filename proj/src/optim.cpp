#include "cdgnet/optim.hpp"

#include <cmath>

#include "cdgnet/errors.hpp"

namespace cdg {

template <class T>
Adam<T>::Adam(const ParameterSet<T>& set, AdamOptions opts) : opts_(opts) {
  for (const auto& p : set.items()) {
    m_.emplace_back(p.value.numel(), T(0));
    v_.emplace_back(p.value.numel(), T(0));
  }
}

template <class T>
void Adam<T>::step(ParameterSet<T>& set, double lr) {
  auto& items = set.items();
  if (items.size() != m_.size())
    throw ContractError("optimizer state does not match the parameter set");
  for (const auto& p : items) {
    for (T g : p.value.grad())
      if (!std::isfinite(static_cast<double>(g)))
        throw NumericError(p.name, "non-finite gradient in parameter '" + p.name + "'");
  }
  ++t_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < items.size(); ++k) {
    auto& p = items[k];
    auto w = p.value.mutable_data();
    auto g = p.value.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1 - b1) * gi;
      const double vi = b2 * v[i] + (1 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      w[i] = static_cast<T>(w[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + opts_.eps));
    }
  }
  set.apply_masks();
}

template <class T>
void Adam<T>::restore(std::int64_t steps, std::vector<std::vector<T>> m,
                      std::vector<std::vector<T>> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw ContractError("optimizer state has the wrong number of tensors");
  for (std::size_t k = 0; k < m_.size(); ++k)
    if (m[k].size() != m_[k].size() || v[k].size() != v_[k].size())
      throw ContractError("optimizer state extents differ from the parameters");
  if (steps < 0) throw ContractError("negative optimizer step count");
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double lr_at(int epoch, double base, double decay, int step) {
  if (epoch < 0) throw ContractError("epoch must be non-negative");
  if (step < 1) throw ContractError("schedule step size must be positive");
  return base * std::pow(decay, epoch / step);
}

template class Adam<float>;
template class Adam<double>;

}  // namespace cdg
