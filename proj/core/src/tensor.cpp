#include "dealias/tensor.hpp"

#include <cmath>

namespace dealias::nn {

template <typename T>
TensorT<T>::TensorT(std::vector<std::int64_t> s, std::vector<T> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (numel() != static_cast<std::int64_t>(data.size()))
    throw InvalidArgument("tensor: shape does not match data length");
}

template <typename T>
TensorT<T> TensorT<T>::zeros(std::vector<std::int64_t> s) {
  TensorT t;
  t.shape = std::move(s);
  std::int64_t n = 1;
  for (auto e : t.shape) {
    if (e <= 0) throw InvalidArgument("tensor: non-positive extent");
    n *= e;
  }
  t.data.assign(static_cast<std::size_t>(t.shape.empty() ? 0 : n), T(0));
  return t;
}

template <typename T>
TensorT<T> TensorT<T>::full(std::vector<std::int64_t> s, T value) {
  TensorT t = zeros(std::move(s));
  t.fill(value);
  return t;
}

template <typename T>
bool TensorT<T>::all_finite() const {
  for (const T& v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
void TensorT<T>::fill(T value) {
  for (T& v : data) v = value;
}

template <typename T>
void TensorT<T>::add_inplace(const TensorT<T>& o) {
  if (shape != o.shape) throw InvalidArgument("tensor add: shape mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
}

template struct TensorT<float>;
template struct TensorT<double>;

}  // namespace dealias::nn
