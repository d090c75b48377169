#include "cdgnet/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "cdgnet/errors.hpp"

namespace cdg {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

namespace {
thread_local bool t_grad_enabled = true;
thread_local std::uint64_t t_sequence = 0;
}  // namespace

namespace detail {
std::uint64_t next_sequence() noexcept { return ++t_sequence; }
}  // namespace detail

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() noexcept : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

template <class T>
Tensor<T>::Tensor(Shape shape, T fill) : impl_(std::make_shared<Impl>()) {
  if (shape.n < 1 || shape.c < 1 || shape.h < 1 || shape.w < 1)
    throw DimensionError("shape", "tensor extents must be positive, got " + shape.str());
  impl_->shape = shape;
  impl_->data.assign(shape.numel(), fill);
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : impl_(std::make_shared<Impl>()) {
  if (shape.n < 1 || shape.c < 1 || shape.h < 1 || shape.w < 1)
    throw DimensionError("shape", "tensor extents must be positive, got " + shape.str());
  if (data.size() != shape.numel())
    throw DimensionError("data", "data length " + std::to_string(data.size()) +
                                     " does not match shape " + shape.str());
  impl_->shape = shape;
  impl_->data = std::move(data);
}

template <class T>
const Shape& Tensor<T>::shape() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->shape;
}

template <class T>
std::span<const T> Tensor<T>::data() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->data;
}

template <class T>
std::span<T> Tensor<T>::mutable_data() {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->data;
}

template <class T>
T Tensor<T>::operator()(int n, int c, int h, int w) const {
  const Shape& s = shape();
  return impl_->data[((static_cast<std::size_t>(n) * s.c + c) * s.h + h) * s.w + w];
}

template <class T>
T& Tensor<T>::at(int n, int c, int h, int w) {
  const Shape& s = shape();
  return impl_->data[((static_cast<std::size_t>(n) * s.c + c) * s.h + h) * s.w + w];
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1)
    throw ContractError("item() requires a single-element tensor, got " + shape().str());
  return impl_->data[0];
}

template <class T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  if (!impl_) throw ContractError("use of an undefined tensor");
  impl_->requires_grad = on;
  return *this;
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->grad_buffer();
}

template <class T>
std::span<T> Tensor<T>::mutable_grad() {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->grad_buffer();
}

template <class T>
void Tensor<T>::zero_grad() {
  if (impl_) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <class T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(shape(), impl_->data);
}

template <class T>
Tensor<T> Tensor<T>::detach() const {
  auto impl = std::make_shared<Impl>();
  impl->shape = shape();
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

namespace detail {

template <class T>
Tensor<T> make_output(Shape shape, std::vector<T> data, const std::vector<Tensor<T>>& inputs,
                      const char* op, BackwardFn<T> backward) {
  Tensor<T> out(shape, std::move(data));
  if (!grad_enabled()) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor<T>& t) { return t.defined() && t.requires_grad(); });
  if (!any) return out;
  auto node = std::make_shared<Node<T>>();
  node->seq = next_sequence();
  node->op = op;
  node->inputs.reserve(inputs.size());
  for (const auto& t : inputs)
    if (t.defined()) node->inputs.push_back(t.impl());
  node->backward = std::move(backward);
  out.impl()->node = std::move(node);
  out.impl()->requires_grad = true;
  return out;
}

template <class T>
Tensor<T> make_output(Shape shape, std::vector<T> data, std::initializer_list<Tensor<T>> inputs,
                      const char* op, BackwardFn<T> backward) {
  return make_output(shape, std::move(data), std::vector<Tensor<T>>(inputs), op,
                     std::move(backward));
}

}  // namespace detail

template <class T>
std::vector<std::uint64_t> backward(const Tensor<T>& loss) {
  if (!loss.defined()) throw ContractError("backward() on an undefined tensor");
  if (loss.numel() != 1)
    throw ContractError("backward() requires a single-element loss, got shape " +
                        loss.shape().str());
  if (!loss.has_node())
    throw ContractError("backward() requires a loss produced by recorded operations");

  using Impl = detail::TensorImpl<T>;
  std::vector<Impl*> order;
  std::unordered_set<const Impl*> seen;
  std::vector<Impl*> stack{loss.impl().get()};
  while (!stack.empty()) {
    Impl* cur = stack.back();
    stack.pop_back();
    if (!cur->node || !seen.insert(cur).second) continue;
    order.push_back(cur);
    for (const auto& in : cur->node->inputs) stack.push_back(in.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Impl* a, const Impl* b) { return a->node->seq > b->node->seq; });

  loss.impl()->grad_buffer()[0] += T(1);
  std::vector<std::uint64_t> visited;
  visited.reserve(order.size());
  for (Impl* impl : order) {
    visited.push_back(impl->node->seq);
    if (impl->grad.empty()) continue;  // no gradient reached this record
    impl->node->backward(*impl);
  }
  return visited;
}

template class Tensor<float>;
template class Tensor<double>;
template std::vector<std::uint64_t> backward(const Tensor<float>&);
template std::vector<std::uint64_t> backward(const Tensor<double>&);
template Tensor<float> detail::make_output(Shape, std::vector<float>, std::initializer_list<Tensor<float>>,
                                           const char*, detail::BackwardFn<float>);
template Tensor<double> detail::make_output(Shape, std::vector<double>,
                                            std::initializer_list<Tensor<double>>, const char*,
                                            detail::BackwardFn<double>);
template Tensor<float> detail::make_output(Shape, std::vector<float>, const std::vector<Tensor<float>>&,
                                           const char*, detail::BackwardFn<float>);
template Tensor<double> detail::make_output(Shape, std::vector<double>,
                                            const std::vector<Tensor<double>>&, const char*,
                                            detail::BackwardFn<double>);

}  // namespace cdg
