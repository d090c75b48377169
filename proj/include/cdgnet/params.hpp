#pragma once

// Named, ordered parameter storage plus a seeded initialiser.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cdgnet/errors.hpp"
#include "cdgnet/tensor.hpp"

namespace cdg {

template <class T>
struct Parameter {
  std::string name;
  std::vector<int> dims;  // logical extents, e.g. {Cout} for a bias
  Tensor<T> value;
  // Optional binary tap mask, same length as value; 0 marks a frozen zero.
  std::vector<std::uint8_t> mask;

  std::size_t trainable_count() const;
};

template <class T>
class ParameterSet {
 public:
  /// Registers a parameter; names must be unique. Masked entries are zeroed.
  Tensor<T> add(std::string name, std::vector<int> dims, std::vector<T> values,
                std::vector<std::uint8_t> mask = {});

  std::vector<Parameter<T>>& items() noexcept { return items_; }
  const std::vector<Parameter<T>>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }

  const Parameter<T>* find(const std::string& name) const;
  Parameter<T>* find(const std::string& name);

  void zero_grad();
  void apply_masks();

  /// Element count over trainable entries, masked taps excluded.
  std::size_t trainable_count() const;
  /// Storage footprint in bytes at 32-bit precision (trainable entries only).
  std::size_t byte_count() const { return trainable_count() * 4; }

  /// Copies values by name, converting precision. Names and extents must match.
  template <class U>
  void assign_from(const ParameterSet<U>& other);

 private:
  std::vector<Parameter<T>> items_;
};

/// Creates parameters under a dotted name prefix. Random values are drawn in
/// 64-bit and then converted, so float and double models built from the same
/// seed hold the same numbers up to rounding.
template <class T>
class ParamBuilder {
 public:
  using value_type = T;

  ParamBuilder(ParameterSet<T>& set, std::uint64_t seed)
      : set_(&set), rng_(std::make_shared<std::mt19937_64>(seed)) {}

  /// A builder writing into the same set and random stream under `prefix.name`.
  ParamBuilder scoped(const std::string& name) const {
    return ParamBuilder(set_, rng_, qualified(name));
  }

  /// Uniform in [-bound, bound].
  Tensor<T> uniform(const std::string& name, std::vector<int> dims, double bound,
                    std::vector<std::uint8_t> mask = {});
  Tensor<T> zeros(const std::string& name, std::vector<int> dims);

  std::string qualified(const std::string& name) const {
    return prefix_.empty() ? name : prefix_ + "." + name;
  }

 private:
  ParamBuilder(ParameterSet<T>* set, std::shared_ptr<std::mt19937_64> rng, std::string prefix)
      : set_(set), rng_(std::move(rng)), prefix_(std::move(prefix)) {}

  ParameterSet<T>* set_;
  std::shared_ptr<std::mt19937_64> rng_;
  std::string prefix_;
};

template <class T>
template <class U>
void ParameterSet<T>::assign_from(const ParameterSet<U>& other) {
  for (auto& p : items_) {
    const auto* src = other.find(p.name);
    if (!src) throw ContractError("assign_from: parameter '" + p.name + "' missing in source");
    if (src->dims != p.dims)
      throw DimensionError(p.name, "assign_from: extents differ for '" + p.name + "'");
    auto dst = p.value.mutable_data();
    auto in = src->value.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(in[i]);
  }
}

/// Packs logical extents into the 4-D tensor shape (right-aligned).
Shape shape_from_dims(const std::vector<int>& dims);

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;
extern template class ParamBuilder<float>;
extern template class ParamBuilder<double>;

}  // namespace cdg
