#include "cdgnet/params.hpp"

#include <algorithm>
#include <numeric>

#include "cdgnet/errors.hpp"

namespace cdg {

Shape shape_from_dims(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 4)
    throw DimensionError("rank", "parameter rank must be 1..4, got " + std::to_string(dims.size()));
  int e[4] = {1, 1, 1, 1};
  std::copy(dims.begin(), dims.end(), e + (4 - dims.size()));
  return Shape{e[0], e[1], e[2], e[3]};
}

template <class T>
std::size_t Parameter<T>::trainable_count() const {
  if (mask.empty()) return value.numel();
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

template <class T>
Tensor<T> ParameterSet<T>::add(std::string name, std::vector<int> dims, std::vector<T> values,
                               std::vector<std::uint8_t> mask) {
  if (find(name)) throw ContractError("duplicate parameter name '" + name + "'");
  Tensor<T> t(shape_from_dims(dims), std::move(values));
  if (!mask.empty() && mask.size() != t.numel())
    throw DimensionError(name, "mask length does not match parameter '" + name + "'");
  t.set_requires_grad(true);
  items_.push_back(Parameter<T>{std::move(name), std::move(dims), t, std::move(mask)});
  if (!items_.back().mask.empty()) {
    auto v = t.mutable_data();
    const auto& m = items_.back().mask;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!m[i]) v[i] = T(0);
  }
  return t;
}

template <class T>
const Parameter<T>* ParameterSet<T>::find(const std::string& name) const {
  for (const auto& p : items_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
Parameter<T>* ParameterSet<T>::find(const std::string& name) {
  for (auto& p : items_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
void ParameterSet<T>::zero_grad() {
  for (auto& p : items_) p.value.zero_grad();
}

template <class T>
void ParameterSet<T>::apply_masks() {
  for (auto& p : items_) {
    if (p.mask.empty()) continue;
    auto v = p.value.mutable_data();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!p.mask[i]) v[i] = T(0);
  }
}

template <class T>
std::size_t ParameterSet<T>::trainable_count() const {
  std::size_t total = 0;
  for (const auto& p : items_) total += p.trainable_count();
  return total;
}

template <class T>
Tensor<T> ParamBuilder<T>::uniform(const std::string& name, std::vector<int> dims, double bound,
                                   std::vector<std::uint8_t> mask) {
  const std::size_t count = shape_from_dims(dims).numel();
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> values(count);
  for (auto& v : values) v = static_cast<T>(dist(*rng_));
  return set_->add(qualified(name), std::move(dims), std::move(values), std::move(mask));
}

template <class T>
Tensor<T> ParamBuilder<T>::zeros(const std::string& name, std::vector<int> dims) {
  const std::size_t count = shape_from_dims(dims).numel();
  return set_->add(qualified(name), std::move(dims), std::vector<T>(count, T(0)));
}

template struct Parameter<float>;
template struct Parameter<double>;
template class ParameterSet<float>;
template class ParameterSet<double>;
template class ParamBuilder<float>;
template class ParamBuilder<double>;

}  // namespace cdg
