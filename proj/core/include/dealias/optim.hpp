#pragma once

#include "dealias/autograd.hpp"
#include "dealias/rng.hpp"

namespace dealias::nn {

template <typename T>
struct AdamStateT {
  TensorT<T> m;  // first moment
  TensorT<T> v;  // second moment
  std::int64_t t = 0;

  static AdamStateT init(const std::vector<std::int64_t>& shape) {
    return {TensorT<T>::zeros(shape), TensorT<T>::zeros(shape), 0};
  }
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update. Refuses NaN/Inf gradients.
template <typename T>
void adam_step(TensorT<T>& param, const TensorT<T>& grad, AdamStateT<T>& state, T lr, T beta1,
               T beta2, T eps);

// Applies adam_step over a parameter list, reading each Var's accumulated
// gradient. Parameters without a materialized gradient are treated as zero
// gradient (moments still decay, step counter still advances).
template <typename T>
class AdamOptimizerT {
 public:
  AdamOptimizerT(std::vector<VarT<T>> params, AdamConfig cfg);

  void step();
  void zero_grad();
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }

  std::vector<AdamStateT<T>>& states() { return states_; }
  const std::vector<VarT<T>>& params() const { return params_; }

 private:
  std::vector<VarT<T>> params_;
  std::vector<AdamStateT<T>> states_;
  AdamConfig cfg_;
};

using AdamOptimizerF = AdamOptimizerT<float>;

// Seeded tensor initializers (Box-Muller normals from the project Rng, so
// identical seeds are bitwise reproducible everywhere).
template <typename T>
TensorT<T> normal_tensor(std::vector<std::int64_t> shape, T mean, T stddev, Rng& rng) {
  TensorT<T> t = TensorT<T>::zeros(std::move(shape));
  for (auto& v : t.data) v = mean + stddev * static_cast<T>(rng.normal());
  return t;
}

template <typename T>
TensorT<T> uniform_tensor(std::vector<std::int64_t> shape, T lo, T hi, Rng& rng) {
  TensorT<T> t = TensorT<T>::zeros(std::move(shape));
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

extern template class AdamOptimizerT<float>;
extern template class AdamOptimizerT<double>;

}  // namespace dealias::nn
