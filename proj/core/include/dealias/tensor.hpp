#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "dealias/errors.hpp"

namespace dealias::nn {

// Dense row-major n-d array. 4-d tensors follow the NCHW convention.
template <typename T>
struct TensorT {
  std::vector<std::int64_t> shape;
  std::vector<T> data;

  TensorT() = default;
  TensorT(std::vector<std::int64_t> s, std::vector<T> d);

  static TensorT zeros(std::vector<std::int64_t> s);
  static TensorT full(std::vector<std::int64_t> s, T value);
  static TensorT scalar(T value) { return TensorT({1}, {value}); }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (auto e : shape) n *= e;
    return shape.empty() ? 0 : n;
  }

  std::int64_t dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
  int ndim() const { return static_cast<int>(shape.size()); }

  T& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

  // NCHW element access.
  T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data[static_cast<std::size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  const T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data[static_cast<std::size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }

  T& at2(std::int64_t i, std::int64_t j) {
    return data[static_cast<std::size_t>(i * shape[1] + j)];
  }
  const T& at2(std::int64_t i, std::int64_t j) const {
    return data[static_cast<std::size_t>(i * shape[1] + j)];
  }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }
  bool all_finite() const;

  void fill(T value);
  void add_inplace(const TensorT& o);  // shapes must match
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

template <typename T>
bool shapes_equal(const TensorT<T>& a, const TensorT<T>& b) {
  return a.shape == b.shape;
}

extern template struct TensorT<float>;
extern template struct TensorT<double>;

}  // namespace dealias::nn
