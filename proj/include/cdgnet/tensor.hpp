#pragma once

// Dense NCHW tensors with a reverse-mode autodiff graph.
//
// A Tensor is a cheap handle onto shared storage. Operations that consume a
// tensor requiring gradients produce an output carrying a graph node; the
// node keeps its inputs alive and knows how to push the output gradient back
// into them. backward() walks the nodes reachable from a scalar loss in exact
// reverse execution order (nodes carry a monotonically increasing sequence
// number assigned at creation).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cdg {

struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  constexpr std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  constexpr std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
  std::string str() const;
};

template <class T>
class Tensor;

namespace detail {

template <class T>
struct TensorImpl;

template <class T>
struct Node {
  std::uint64_t seq = 0;
  const char* op = "";
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  // Reads out.grad and accumulates into the inputs' gradient buffers.
  std::function<void(const TensorImpl<T>& out)> backward;
};

template <class T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::shared_ptr<Node<T>> node;

  // Zero-initialised on first use.
  std::span<T> grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

std::uint64_t next_sequence() noexcept;

}  // namespace detail

bool grad_enabled() noexcept;

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() noexcept;
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <class T>
class Tensor {
 public:
  using value_type = T;
  using Impl = detail::TensorImpl<T>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static Tensor zeros(Shape shape) { return Tensor(shape, T(0)); }
  static Tensor ones(Shape shape) { return Tensor(shape, T(1)); }
  static Tensor scalar(T value) { return Tensor(Shape{}, value); }

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const { return shape().numel(); }

  std::span<const T> data() const;
  // Writable view. Only meaningful on leaves (parameters, constants);
  // mutating a tensor that already fed a recorded op invalidates its graph.
  std::span<T> mutable_data();

  T operator()(int n, int c, int h, int w) const;
  T& at(int n, int c, int h, int w);
  T item() const;

  bool requires_grad() const noexcept { return impl_ && impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool has_node() const noexcept { return impl_ && impl_->node != nullptr; }

  /// Gradient buffer; all zeros if nothing has been accumulated.
  std::span<const T> grad() const;
  std::span<T> mutable_grad();
  void zero_grad();

  /// Deep copy without graph history.
  Tensor clone() const;
  /// Shares storage, drops the graph node and requires_grad.
  Tensor detach() const;

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(numel());
    auto src = data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(src[i]);
    return Tensor<U>(shape(), std::move(out));
  }

  const std::shared_ptr<Impl>& impl() const noexcept { return impl_; }
  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<Impl> impl_;
};

namespace detail {

template <class T>
using BackwardFn = std::function<void(const TensorImpl<T>& out)>;

/// Wraps a freshly computed result. A graph node is attached when gradients
/// are enabled and at least one input requires them.
template <class T>
Tensor<T> make_output(Shape shape, std::vector<T> data, std::initializer_list<Tensor<T>> inputs,
                      const char* op, BackwardFn<T> backward);

template <class T>
Tensor<T> make_output(Shape shape, std::vector<T> data, const std::vector<Tensor<T>>& inputs,
                      const char* op, BackwardFn<T> backward);

}  // namespace detail

/// Back-propagates from a single-element tensor. Returns the sequence numbers
/// of the visited graph records, in visiting order (strictly decreasing).
template <class T>
std::vector<std::uint64_t> backward(const Tensor<T>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace cdg
