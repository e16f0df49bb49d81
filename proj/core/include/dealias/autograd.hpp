#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dealias/tensor.hpp"

namespace dealias::nn {

// Reverse-mode autodiff over a dynamic DAG. Every operation allocates a node
// holding its output value; backward() walks the graph once in reverse
// topological order using run-local delta buffers and accumulates the result
// into the persistent .grad of every node that requires a gradient. Running
// backward twice on the same graph therefore doubles the stored gradients,
// and parameters shared between graphs accumulate across calls until zeroed.

template <typename T>
struct NodeT {
  TensorT<T> value;
  TensorT<T> grad;  // lazily materialized, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<NodeT<T>>> parents;
  // Adds this node's delta contribution into the parents' delta buffers.
  // parent_deltas is aligned with `parents`; entries are null when that
  // parent does not need a gradient.
  std::function<void(const TensorT<T>& delta, const std::vector<TensorT<T>*>& parent_deltas)>
      backprop;
};

template <typename T>
class VarT {
 public:
  VarT() = default;
  explicit VarT(std::shared_ptr<NodeT<T>> n) : node_(std::move(n)) {}

  // Graph boundary: external data enters here and is checked for NaN/Inf.
  static VarT leaf(TensorT<T> value, bool requires_grad);
  static VarT constant(TensorT<T> value) { return leaf(std::move(value), false); }
  static VarT scalar(T v) { return constant(TensorT<T>::scalar(v)); }

  bool defined() const { return node_ != nullptr; }
  const TensorT<T>& value() const { return node_->value; }
  TensorT<T>& value_mut() { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  // Lazily materialized gradient buffer.
  TensorT<T>& grad() const;
  void zero_grad() const;

  // A fresh leaf sharing this node's value, cut off from the graph.
  VarT detach() const { return VarT(detach_node()); }

  std::shared_ptr<NodeT<T>> node() const { return node_; }

 private:
  std::shared_ptr<NodeT<T>> detach_node() const;
  std::shared_ptr<NodeT<T>> node_;
};

using VarF = VarT<float>;
using VarD = VarT<double>;

// Accumulates d(loss)/d(node) into .grad for every reachable node that
// requires a gradient. The loss must be scalar.
template <typename T>
void backward(const VarT<T>& loss);

// ----- elementwise -----
template <typename T> VarT<T> add(const VarT<T>& a, const VarT<T>& b);
template <typename T> VarT<T> sub(const VarT<T>& a, const VarT<T>& b);
template <typename T> VarT<T> mul(const VarT<T>& a, const VarT<T>& b);
template <typename T> VarT<T> scale(const VarT<T>& a, T c);
template <typename T> VarT<T> add_scalar(const VarT<T>& a, T c);
template <typename T> VarT<T> rsub_scalar(T c, const VarT<T>& a);  // c - a
template <typename T> VarT<T> log(const VarT<T>& a);
template <typename T> VarT<T> tanh(const VarT<T>& a);
template <typename T> VarT<T> sigmoid(const VarT<T>& a);
template <typename T> VarT<T> relu(const VarT<T>& a);
template <typename T> VarT<T> leaky_relu(const VarT<T>& a, T slope);
template <typename T> VarT<T> clamp(const VarT<T>& a, T lo, T hi);

// ----- reductions -----
template <typename T> VarT<T> sum_all(const VarT<T>& a);
template <typename T> VarT<T> mean_all(const VarT<T>& a);

// ----- shape -----
template <typename T> VarT<T> concat_channels(const VarT<T>& a, const VarT<T>& b);
template <typename T> VarT<T> reshape(const VarT<T>& a, std::vector<std::int64_t> shape);

template <typename T> VarT<T> operator+(const VarT<T>& a, const VarT<T>& b) { return add(a, b); }
template <typename T> VarT<T> operator-(const VarT<T>& a, const VarT<T>& b) { return sub(a, b); }
template <typename T> VarT<T> operator*(const VarT<T>& a, const VarT<T>& b) { return mul(a, b); }
template <typename T> VarT<T> operator*(T c, const VarT<T>& a) { return scale(a, c); }

extern template struct NodeT<float>;
extern template struct NodeT<double>;
extern template class VarT<float>;
extern template class VarT<double>;

}  // namespace dealias::nn
