#include "dealias/optim.hpp"

#include <cmath>

namespace dealias::nn {

template <typename T>
void adam_step(TensorT<T>& param, const TensorT<T>& grad, AdamStateT<T>& state, T lr, T beta1,
               T beta2, T eps) {
  if (!shapes_equal(param, grad) || !shapes_equal(param, state.m) ||
      !shapes_equal(param, state.v))
    throw InvalidArgument("adam_step: shape mismatch");
  if (!grad.all_finite()) throw NumericFault("adam_step: gradient contains NaN/Inf");

  state.t += 1;
  const T bc1 = T(1) - std::pow(beta1, static_cast<T>(state.t));
  const T bc2 = T(1) - std::pow(beta2, static_cast<T>(state.t));
  for (std::int64_t i = 0; i < param.numel(); ++i) {
    const T g = grad[i];
    state.m[i] = beta1 * state.m[i] + (T(1) - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (T(1) - beta2) * g * g;
    const T mhat = state.m[i] / bc1;
    const T vhat = state.v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <typename T>
AdamOptimizerT<T>::AdamOptimizerT(std::vector<VarT<T>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  states_.reserve(params_.size());
  for (const auto& p : params_) states_.push_back(AdamStateT<T>::init(p.value().shape));
}

template <typename T>
void AdamOptimizerT<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    // grad() materializes zeros for parameters untouched by backward.
    adam_step(params_[i].value_mut(), params_[i].grad(), states_[i], static_cast<T>(cfg_.lr),
              static_cast<T>(cfg_.beta1), static_cast<T>(cfg_.beta2),
              static_cast<T>(cfg_.eps));
  }
}

template <typename T>
void AdamOptimizerT<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template void adam_step<float>(TensorT<float>&, const TensorT<float>&, AdamStateT<float>&,
                               float, float, float, float);
template void adam_step<double>(TensorT<double>&, const TensorT<double>&, AdamStateT<double>&,
                                double, double, double, double);
template class AdamOptimizerT<float>;
template class AdamOptimizerT<double>;

}  // namespace dealias::nn
