#include "dealias/autograd.hpp"

#include <cmath>
#include <unordered_map>

namespace dealias::nn {

template <typename T>
VarT<T> VarT<T>::leaf(TensorT<T> value, bool requires_grad) {
  if (!value.all_finite()) throw NumericFault("leaf tensor contains NaN/Inf");
  auto n = std::make_shared<NodeT<T>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return VarT(std::move(n));
}

template <typename T>
TensorT<T>& VarT<T>::grad() const {
  if (node_->grad.data.empty()) node_->grad = TensorT<T>::zeros(node_->value.shape);
  return node_->grad;
}

template <typename T>
void VarT<T>::zero_grad() const {
  if (!node_->grad.data.empty()) node_->grad.fill(T(0));
}

template <typename T>
std::shared_ptr<NodeT<T>> VarT<T>::detach_node() const {
  auto n = std::make_shared<NodeT<T>>();
  n->value = node_->value;
  n->requires_grad = false;
  return n;
}

namespace {

template <typename T>
using BackFn =
    std::function<void(const TensorT<T>&, const std::vector<TensorT<T>*>&)>;

template <typename T>
VarT<T> make_op(TensorT<T> value, std::vector<VarT<T>> inputs, BackFn<T> fn) {
  auto n = std::make_shared<NodeT<T>>();
  n->value = std::move(value);
  for (auto& in : inputs) {
    n->parents.push_back(in.node());
    n->requires_grad = n->requires_grad || in.requires_grad();
  }
  if (n->requires_grad) n->backprop = std::move(fn);
  return VarT<T>(std::move(n));
}

template <typename T>
std::vector<NodeT<T>*> topo_order(NodeT<T>* root) {
  std::vector<NodeT<T>*> order;
  std::unordered_map<NodeT<T>*, int> state;  // 0 unseen, 1 in stack, 2 done
  std::vector<std::pair<NodeT<T>*, std::size_t>> stack;
  stack.push_back({root, 0});
  state[root] = 1;
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      NodeT<T>* p = node->parents[idx++].get();
      if (!p->requires_grad) continue;
      int& s = state[p];
      if (s == 1) throw InvalidArgument("backward: computation graph has a cycle");
      if (s == 0) {
        s = 1;
        stack.push_back({p, 0});
      }
    } else {
      state[node] = 2;
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;  // parents before children; root last
}

}  // namespace

template <typename T>
void backward(const VarT<T>& loss) {
  if (!loss.defined() || loss.value().numel() != 1)
    throw InvalidArgument("backward: loss must be a defined scalar");
  NodeT<T>* root = loss.node().get();
  if (!root->requires_grad) return;

  auto order = topo_order(root);
  std::unordered_map<NodeT<T>*, TensorT<T>> deltas;
  deltas[root] = TensorT<T>::scalar(T(1));

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT<T>* node = *it;
    auto found = deltas.find(node);
    if (found == deltas.end()) continue;  // not reached from the loss
    if (node->backprop) {
      std::vector<TensorT<T>*> parent_deltas;
      parent_deltas.reserve(node->parents.size());
      for (auto& p : node->parents) {
        if (p->requires_grad) {
          auto [slot, inserted] = deltas.try_emplace(p.get());
          if (inserted) slot->second = TensorT<T>::zeros(p->value.shape);
          parent_deltas.push_back(&slot->second);
        } else {
          parent_deltas.push_back(nullptr);
        }
      }
      node->backprop(found->second, parent_deltas);
    }
  }

  for (NodeT<T>* node : order) {
    auto found = deltas.find(node);
    if (found == deltas.end()) continue;
    if (node->grad.data.empty()) node->grad = TensorT<T>::zeros(node->value.shape);
    node->grad.add_inplace(found->second);
  }
}

// ---------------------------------------------------------------------------
// elementwise ops
// ---------------------------------------------------------------------------

namespace {

template <typename T, typename FwdFn, typename GradFn>
VarT<T> unary_op(const VarT<T>& a, FwdFn fwd, GradFn dfn) {
  const TensorT<T>& x = a.value();
  TensorT<T> y = TensorT<T>::zeros(x.shape);
  for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = fwd(x[i]);
  auto xs = a.node();
  return make_op<T>(
      std::move(y), {a},
      [xs, dfn](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
        if (!pd[0]) return;
        const TensorT<T>& x = xs->value;
        for (std::int64_t i = 0; i < x.numel(); ++i) (*pd[0])[i] += d[i] * dfn(x[i]);
      });
}

template <typename T>
void check_same_shape(const VarT<T>& a, const VarT<T>& b, const char* op) {
  if (!shapes_equal(a.value(), b.value()))
    throw InvalidArgument(std::string(op) + ": shape mismatch");
}

}  // namespace

template <typename T>
VarT<T> add(const VarT<T>& a, const VarT<T>& b) {
  check_same_shape(a, b, "add");
  TensorT<T> y = a.value();
  y.add_inplace(b.value());
  return make_op<T>(std::move(y), {a, b},
                    [](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (pd[0]) pd[0]->add_inplace(d);
                      if (pd[1]) pd[1]->add_inplace(d);
                    });
}

template <typename T>
VarT<T> sub(const VarT<T>& a, const VarT<T>& b) {
  check_same_shape(a, b, "sub");
  TensorT<T> y = a.value();
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] -= b.value()[i];
  return make_op<T>(std::move(y), {a, b},
                    [](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (pd[0]) pd[0]->add_inplace(d);
                      if (pd[1])
                        for (std::int64_t i = 0; i < d.numel(); ++i) (*pd[1])[i] -= d[i];
                    });
}

template <typename T>
VarT<T> mul(const VarT<T>& a, const VarT<T>& b) {
  check_same_shape(a, b, "mul");
  TensorT<T> y = a.value();
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] *= b.value()[i];
  auto an = a.node(), bn = b.node();
  return make_op<T>(std::move(y), {a, b},
                    [an, bn](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (pd[0])
                        for (std::int64_t i = 0; i < d.numel(); ++i)
                          (*pd[0])[i] += d[i] * bn->value[i];
                      if (pd[1])
                        for (std::int64_t i = 0; i < d.numel(); ++i)
                          (*pd[1])[i] += d[i] * an->value[i];
                    });
}

template <typename T>
VarT<T> scale(const VarT<T>& a, T c) {
  TensorT<T> y = a.value();
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] *= c;
  return make_op<T>(std::move(y), {a},
                    [c](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (pd[0])
                        for (std::int64_t i = 0; i < d.numel(); ++i) (*pd[0])[i] += d[i] * c;
                    });
}

template <typename T>
VarT<T> add_scalar(const VarT<T>& a, T c) {
  TensorT<T> y = a.value();
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] += c;
  return make_op<T>(std::move(y), {a},
                    [](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (pd[0]) pd[0]->add_inplace(d);
                    });
}

template <typename T>
VarT<T> rsub_scalar(T c, const VarT<T>& a) {
  TensorT<T> y = a.value();
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] = c - y[i];
  return make_op<T>(std::move(y), {a},
                    [](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (pd[0])
                        for (std::int64_t i = 0; i < d.numel(); ++i) (*pd[0])[i] -= d[i];
                    });
}

template <typename T>
VarT<T> log(const VarT<T>& a) {
  return unary_op<T>(
      a, [](T v) { return std::log(v); }, [](T v) { return T(1) / v; });
}

template <typename T>
VarT<T> tanh(const VarT<T>& a) {
  return unary_op<T>(
      a, [](T v) { return std::tanh(v); },
      [](T v) {
        const T t = std::tanh(v);
        return T(1) - t * t;
      });
}

template <typename T>
VarT<T> sigmoid(const VarT<T>& a) {
  return unary_op<T>(
      a, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
      [](T v) {
        const T s = T(1) / (T(1) + std::exp(-v));
        return s * (T(1) - s);
      });
}

template <typename T>
VarT<T> relu(const VarT<T>& a) {
  return unary_op<T>(
      a, [](T v) { return v > T(0) ? v : T(0); }, [](T v) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
VarT<T> leaky_relu(const VarT<T>& a, T slope) {
  return unary_op<T>(
      a, [slope](T v) { return v >= T(0) ? v : slope * v; },
      [slope](T v) { return v >= T(0) ? T(1) : slope; });
}

template <typename T>
VarT<T> clamp(const VarT<T>& a, T lo, T hi) {
  return unary_op<T>(
      a, [lo, hi](T v) { return v < lo ? lo : (v > hi ? hi : v); },
      [lo, hi](T v) { return (v >= lo && v <= hi) ? T(1) : T(0); });
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

template <typename T>
VarT<T> sum_all(const VarT<T>& a) {
  T s = 0;
  for (std::int64_t i = 0; i < a.value().numel(); ++i) s += a.value()[i];
  return make_op<T>(TensorT<T>::scalar(s), {a},
                    [](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (!pd[0]) return;
                      for (std::int64_t i = 0; i < pd[0]->numel(); ++i) (*pd[0])[i] += d[0];
                    });
}

template <typename T>
VarT<T> mean_all(const VarT<T>& a) {
  const std::int64_t n = a.value().numel();
  T s = 0;
  for (std::int64_t i = 0; i < n; ++i) s += a.value()[i];
  return make_op<T>(TensorT<T>::scalar(s / static_cast<T>(n)), {a},
                    [n](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (!pd[0]) return;
                      const T g = d[0] / static_cast<T>(n);
                      for (std::int64_t i = 0; i < n; ++i) (*pd[0])[i] += g;
                    });
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

template <typename T>
VarT<T> concat_channels(const VarT<T>& a, const VarT<T>& b) {
  const TensorT<T>& x = a.value();
  const TensorT<T>& y = b.value();
  if (x.ndim() != 4 || y.ndim() != 4) throw InvalidArgument("concat_channels: expects 4-d");
  if (x.dim(0) != y.dim(0) || x.dim(2) != y.dim(2) || x.dim(3) != y.dim(3))
    throw InvalidArgument("concat_channels: N/H/W mismatch");
  const std::int64_t N = x.dim(0), Ca = x.dim(1), Cb = y.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t plane = H * W;
  TensorT<T> out = TensorT<T>::zeros({N, Ca + Cb, H, W});
  for (std::int64_t n = 0; n < N; ++n) {
    std::copy(x.data.begin() + n * Ca * plane, x.data.begin() + (n + 1) * Ca * plane,
              out.data.begin() + n * (Ca + Cb) * plane);
    std::copy(y.data.begin() + n * Cb * plane, y.data.begin() + (n + 1) * Cb * plane,
              out.data.begin() + (n * (Ca + Cb) + Ca) * plane);
  }
  return make_op<T>(std::move(out), {a, b},
                    [N, Ca, Cb, plane](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      for (std::int64_t n = 0; n < N; ++n) {
                        if (pd[0])
                          for (std::int64_t i = 0; i < Ca * plane; ++i)
                            (*pd[0])[n * Ca * plane + i] += d[n * (Ca + Cb) * plane + i];
                        if (pd[1])
                          for (std::int64_t i = 0; i < Cb * plane; ++i)
                            (*pd[1])[n * Cb * plane + i] += d[(n * (Ca + Cb) + Ca) * plane + i];
                      }
                    });
}

template <typename T>
VarT<T> reshape(const VarT<T>& a, std::vector<std::int64_t> shape) {
  TensorT<T> y(std::move(shape), a.value().data);  // validates the element count
  if (y.numel() != a.value().numel()) throw InvalidArgument("reshape: element count differs");
  auto in_shape = a.value().shape;
  return make_op<T>(std::move(y), {a},
                    [in_shape](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
                      if (!pd[0]) return;
                      for (std::int64_t i = 0; i < d.numel(); ++i) (*pd[0])[i] += d[i];
                    });
}

// explicit instantiations
template struct NodeT<float>;
template struct NodeT<double>;
template class VarT<float>;
template class VarT<double>;

#define DEALIAS_INSTANTIATE(T)                                              \
  template void backward<T>(const VarT<T>&);                                \
  template VarT<T> add<T>(const VarT<T>&, const VarT<T>&);                  \
  template VarT<T> sub<T>(const VarT<T>&, const VarT<T>&);                  \
  template VarT<T> mul<T>(const VarT<T>&, const VarT<T>&);                  \
  template VarT<T> scale<T>(const VarT<T>&, T);                             \
  template VarT<T> add_scalar<T>(const VarT<T>&, T);                        \
  template VarT<T> rsub_scalar<T>(T, const VarT<T>&);                       \
  template VarT<T> log<T>(const VarT<T>&);                                  \
  template VarT<T> tanh<T>(const VarT<T>&);                                 \
  template VarT<T> sigmoid<T>(const VarT<T>&);                              \
  template VarT<T> relu<T>(const VarT<T>&);                                 \
  template VarT<T> leaky_relu<T>(const VarT<T>&, T);                        \
  template VarT<T> clamp<T>(const VarT<T>&, T, T);                          \
  template VarT<T> sum_all<T>(const VarT<T>&);                              \
  template VarT<T> mean_all<T>(const VarT<T>&);                             \
  template VarT<T> concat_channels<T>(const VarT<T>&, const VarT<T>&);             \
  template VarT<T> reshape<T>(const VarT<T>&, std::vector<std::int64_t>);

DEALIAS_INSTANTIATE(float)
DEALIAS_INSTANTIATE(double)
#undef DEALIAS_INSTANTIATE

}  // namespace dealias::nn
