#pragma once

#include "dealias/autograd.hpp"

namespace dealias::nn {

// Running statistics carried by a batch-norm layer across steps. Updated in
// training mode, read in eval mode. Serialized with the model parameters.
template <typename T>
struct BatchNormStateT {
  TensorT<T> running_mean;  // shape C
  TensorT<T> running_var;   // shape C

  static BatchNormStateT init(std::int64_t channels) {
    BatchNormStateT s;
    s.running_mean = TensorT<T>::zeros({channels});
    s.running_var = TensorT<T>::full({channels}, T(1));
    return s;
  }
};

// input N x Cin x H x W, weight Cout x Cin x kh x kw, bias Cout.
// Output spatial extent: (H + 2*pad - kh) / stride + 1 (floor).
template <typename T>
VarT<T> conv2d(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias, int stride,
               int padding);

// Adjoint of conv2d with the same weight buffer and geometry: the weight is
// read as Cin x Cout x kh x kw, mapping N x Cin x H x W to N x Cout x H' x W'
// with H' = (H-1)*stride - 2*pad + kh.
template <typename T>
VarT<T> conv2d_transpose(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias,
                         int stride, int padding);

// input N x F, weight F x G, bias G.
template <typename T>
VarT<T> dense(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias);

// Per-channel batch normalization over N x C x H x W. Training mode uses
// batch statistics (biased variance) and folds them into the running stats
// as running = momentum * running + (1 - momentum) * batch.
template <typename T>
VarT<T> batch_norm(const VarT<T>& input, const VarT<T>& gamma, const VarT<T>& beta,
                   BatchNormStateT<T>& state, bool training, T momentum = T(0.9),
                   T eps = T(1e-5));

// 2x2 average pooling with stride 2; H and W must be even.
template <typename T>
VarT<T> avg_pool2(const VarT<T>& input);

}  // namespace dealias::nn
