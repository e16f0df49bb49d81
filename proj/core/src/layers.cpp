#include "dealias/layers.hpp"

#include <Eigen/Core>

#include <cmath>

namespace dealias::nn {

namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

// Patch matrix layout: rows C*kh*kw, cols Ho*Wo (row-major). Column index is
// the output position of a conv with this geometry.
template <typename T>
void im2col(const T* src, std::int64_t C, std::int64_t H, std::int64_t W, int kh, int kw,
            int stride, int pad, std::int64_t Ho, std::int64_t Wo, T* col) {
  const std::int64_t P = Ho * Wo;
  for (std::int64_t c = 0; c < C; ++c) {
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j) {
        T* row = col + ((c * kh + i) * kw + j) * P;
        for (std::int64_t oh = 0; oh < Ho; ++oh) {
          const std::int64_t ih = oh * stride - pad + i;
          if (ih < 0 || ih >= H) {
            std::fill(row + oh * Wo, row + (oh + 1) * Wo, T(0));
            continue;
          }
          const T* srow = src + (c * H + ih) * W;
          for (std::int64_t ow = 0; ow < Wo; ++ow) {
            const std::int64_t iw = ow * stride - pad + j;
            row[oh * Wo + ow] = (iw >= 0 && iw < W) ? srow[iw] : T(0);
          }
        }
      }
    }
  }
}

// Scatter-add of a patch matrix back into the source layout.
template <typename T>
void col2im(const T* col, std::int64_t C, std::int64_t H, std::int64_t W, int kh, int kw,
            int stride, int pad, std::int64_t Ho, std::int64_t Wo, T* dst) {
  const std::int64_t P = Ho * Wo;
  for (std::int64_t c = 0; c < C; ++c) {
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j) {
        const T* row = col + ((c * kh + i) * kw + j) * P;
        for (std::int64_t oh = 0; oh < Ho; ++oh) {
          const std::int64_t ih = oh * stride - pad + i;
          if (ih < 0 || ih >= H) continue;
          T* drow = dst + (c * H + ih) * W;
          for (std::int64_t ow = 0; ow < Wo; ++ow) {
            const std::int64_t iw = ow * stride - pad + j;
            if (iw >= 0 && iw < W) drow[iw] += row[oh * Wo + ow];
          }
        }
      }
    }
  }
}

struct ConvGeom {
  std::int64_t N, Cin, H, W, Cout, Ho, Wo;
  int kh, kw, stride, pad;
};

template <typename T>
void conv2d_backward(const TensorT<T>& x, const TensorT<T>& w, const ConvGeom& g,
                     const TensorT<T>& d, TensorT<T>* dx, TensorT<T>* dw, TensorT<T>* db) {
  const std::int64_t K = g.Cin * g.kh * g.kw;
  const std::int64_t P = g.Ho * g.Wo;
  std::vector<T> col(static_cast<std::size_t>(K * P));
  std::vector<T> dcol(static_cast<std::size_t>(K * P));
  CMapRM<T> Wm(w.data.data(), g.Cout, K);
  for (std::int64_t n = 0; n < g.N; ++n) {
    CMapRM<T> Dm(d.data.data() + n * g.Cout * P, g.Cout, P);
    if (dw) {
      im2col(x.data.data() + n * g.Cin * g.H * g.W, g.Cin, g.H, g.W, g.kh, g.kw, g.stride,
             g.pad, g.Ho, g.Wo, col.data());
      MapRM<T>(dw->data.data(), g.Cout, K).noalias() +=
          Dm * CMapRM<T>(col.data(), K, P).transpose();
    }
    if (dx) {
      MapRM<T>(dcol.data(), K, P).noalias() = Wm.transpose() * Dm;
      col2im(dcol.data(), g.Cin, g.H, g.W, g.kh, g.kw, g.stride, g.pad, g.Ho, g.Wo,
             dx->data.data() + n * g.Cin * g.H * g.W);
    }
    if (db)
      for (std::int64_t c = 0; c < g.Cout; ++c) (*db)[c] += Dm.row(c).sum();
  }
}

template <typename T>
VarT<T> make_conv_node(TensorT<T> y, const VarT<T>& input, const VarT<T>& weight,
                       const VarT<T>& bias, const ConvGeom& g, bool transpose) {
  auto xs = input.node();
  auto ws = weight.node();
  auto n = std::make_shared<NodeT<T>>();
  n->value = std::move(y);
  n->parents = {input.node(), weight.node(), bias.node()};
  n->requires_grad = input.requires_grad() || weight.requires_grad() || bias.requires_grad();
  if (!n->requires_grad) return VarT<T>(std::move(n));

  if (!transpose) {
    n->backprop = [xs, ws, g](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
      conv2d_backward<T>(xs->value, ws->value, g, d, pd[0], pd[1], pd[2]);
    };
  } else {
    n->backprop = [xs, ws, g](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
      // d carries the transpose-conv output layout (Cout, H, W), which plays
      // the conv-input role here: dX = W * im2col(d), dW += X * im2col(d)^T.
      const std::int64_t K = g.Cout * g.kh * g.kw;
      const std::int64_t P = g.Ho * g.Wo;
      std::vector<T> col(static_cast<std::size_t>(K * P));
      CMapRM<T> Wm(ws->value.data.data(), g.Cin, K);
      for (std::int64_t b = 0; b < g.N; ++b) {
        im2col(d.data.data() + b * g.Cout * g.H * g.W, g.Cout, g.H, g.W, g.kh, g.kw, g.stride,
               g.pad, g.Ho, g.Wo, col.data());
        CMapRM<T> Cm(col.data(), K, P);
        if (pd[0]) {
          MapRM<T> dXm(pd[0]->data.data() + b * g.Cin * P, g.Cin, P);
          dXm.noalias() += Wm * Cm;
        }
        if (pd[1]) {
          CMapRM<T> Xm(xs->value.data.data() + b * g.Cin * P, g.Cin, P);
          MapRM<T>(pd[1]->data.data(), g.Cin, K).noalias() += Xm * Cm.transpose();
        }
        if (pd[2]) {
          const T* dp = d.data.data() + b * g.Cout * g.H * g.W;
          for (std::int64_t c = 0; c < g.Cout; ++c) {
            T s = 0;
            for (std::int64_t i = 0; i < g.H * g.W; ++i) s += dp[c * g.H * g.W + i];
            (*pd[2])[c] += s;
          }
        }
      }
    };
  }
  return VarT<T>(std::move(n));
}

}  // namespace

template <typename T>
VarT<T> conv2d(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias, int stride,
               int padding) {
  const TensorT<T>& x = input.value();
  const TensorT<T>& w = weight.value();
  const TensorT<T>& b = bias.value();
  if (x.ndim() != 4 || w.ndim() != 4) throw InvalidArgument("conv2d: expects 4-d input/weight");
  if (stride < 1 || padding < 0) throw InvalidArgument("conv2d: bad stride/padding");
  if (x.dim(1) != w.dim(1)) throw InvalidArgument("conv2d: input channels do not match weight");
  if (b.ndim() != 1 || b.dim(0) != w.dim(0)) throw InvalidArgument("conv2d: bad bias shape");

  ConvGeom g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), 0, 0,
             static_cast<int>(w.dim(2)), static_cast<int>(w.dim(3)), stride, padding};
  if (g.H + 2 * padding < g.kh || g.W + 2 * padding < g.kw)
    throw InvalidArgument("conv2d: kernel larger than padded input");
  g.Ho = (g.H + 2 * padding - g.kh) / stride + 1;
  g.Wo = (g.W + 2 * padding - g.kw) / stride + 1;

  const std::int64_t K = g.Cin * g.kh * g.kw;
  const std::int64_t P = g.Ho * g.Wo;
  TensorT<T> y = TensorT<T>::zeros({g.N, g.Cout, g.Ho, g.Wo});
  std::vector<T> col(static_cast<std::size_t>(K * P));
  CMapRM<T> Wm(w.data.data(), g.Cout, K);
  for (std::int64_t n = 0; n < g.N; ++n) {
    im2col(x.data.data() + n * g.Cin * g.H * g.W, g.Cin, g.H, g.W, g.kh, g.kw, stride, padding,
           g.Ho, g.Wo, col.data());
    MapRM<T> Ym(y.data.data() + n * g.Cout * P, g.Cout, P);
    Ym.noalias() = Wm * CMapRM<T>(col.data(), K, P);
    for (std::int64_t c = 0; c < g.Cout; ++c) Ym.row(c).array() += b[c];
  }
  return make_conv_node(std::move(y), input, weight, bias, g, /*transpose=*/false);
}

template <typename T>
VarT<T> conv2d_transpose(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias,
                         int stride, int padding) {
  const TensorT<T>& x = input.value();
  const TensorT<T>& w = weight.value();
  const TensorT<T>& b = bias.value();
  if (x.ndim() != 4 || w.ndim() != 4)
    throw InvalidArgument("conv2d_transpose: expects 4-d input/weight");
  if (stride < 1 || padding < 0) throw InvalidArgument("conv2d_transpose: bad stride/padding");
  if (x.dim(1) != w.dim(0))
    throw InvalidArgument("conv2d_transpose: input channels do not match weight");
  if (b.ndim() != 1 || b.dim(0) != w.dim(1))
    throw InvalidArgument("conv2d_transpose: bad bias shape");

  // Geometry of the adjoint conv: it maps (Cout, H, W) back to (Cin, Ho, Wo),
  // so the transpose-conv input positions take the conv-output role.
  ConvGeom g;
  g.N = x.dim(0);
  g.Cin = x.dim(1);  // == w.dim(0)
  g.Cout = w.dim(1);
  g.kh = static_cast<int>(w.dim(2));
  g.kw = static_cast<int>(w.dim(3));
  g.stride = stride;
  g.pad = padding;
  g.Ho = x.dim(2);
  g.Wo = x.dim(3);
  g.H = (x.dim(2) - 1) * stride - 2 * padding + g.kh;
  g.W = (x.dim(3) - 1) * stride - 2 * padding + g.kw;
  if (g.H <= 0 || g.W <= 0)
    throw InvalidArgument("conv2d_transpose: non-positive output size");

  const std::int64_t K = g.Cout * g.kh * g.kw;
  const std::int64_t P = g.Ho * g.Wo;
  TensorT<T> y = TensorT<T>::zeros({g.N, g.Cout, g.H, g.W});
  std::vector<T> colY(static_cast<std::size_t>(K * P));
  CMapRM<T> Wm(w.data.data(), g.Cin, K);
  for (std::int64_t n = 0; n < g.N; ++n) {
    CMapRM<T> Xm(x.data.data() + n * g.Cin * P, g.Cin, P);
    MapRM<T>(colY.data(), K, P).noalias() = Wm.transpose() * Xm;
    col2im(colY.data(), g.Cout, g.H, g.W, g.kh, g.kw, stride, padding, g.Ho, g.Wo,
           y.data.data() + n * g.Cout * g.H * g.W);
    T* yp = y.data.data() + n * g.Cout * g.H * g.W;
    for (std::int64_t c = 0; c < g.Cout; ++c)
      for (std::int64_t i = 0; i < g.H * g.W; ++i) yp[c * g.H * g.W + i] += b[c];
  }
  return make_conv_node(std::move(y), input, weight, bias, g, /*transpose=*/true);
}

template <typename T>
VarT<T> dense(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias) {
  const TensorT<T>& x = input.value();
  const TensorT<T>& w = weight.value();
  const TensorT<T>& b = bias.value();
  if (x.ndim() != 2 || w.ndim() != 2) throw InvalidArgument("dense: expects 2-d input/weight");
  if (x.dim(1) != w.dim(0)) throw InvalidArgument("dense: inner dimensions disagree");
  if (b.ndim() != 1 || b.dim(0) != w.dim(1)) throw InvalidArgument("dense: bad bias shape");
  const std::int64_t N = x.dim(0), F = x.dim(1), G = w.dim(1);

  TensorT<T> y = TensorT<T>::zeros({N, G});
  MapRM<T>(y.data.data(), N, G).noalias() =
      CMapRM<T>(x.data.data(), N, F) * CMapRM<T>(w.data.data(), F, G);
  for (std::int64_t i = 0; i < N; ++i)
    for (std::int64_t j = 0; j < G; ++j) y.at2(i, j) += b[j];

  auto xs = input.node();
  auto ws = weight.node();
  auto n = std::make_shared<NodeT<T>>();
  n->value = std::move(y);
  n->parents = {input.node(), weight.node(), bias.node()};
  n->requires_grad = input.requires_grad() || weight.requires_grad() || bias.requires_grad();
  if (n->requires_grad) {
    n->backprop = [xs, ws, N, F, G](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
      CMapRM<T> Dm(d.data.data(), N, G);
      if (pd[0])
        MapRM<T>(pd[0]->data.data(), N, F).noalias() +=
            Dm * CMapRM<T>(ws->value.data.data(), F, G).transpose();
      if (pd[1])
        MapRM<T>(pd[1]->data.data(), F, G).noalias() +=
            CMapRM<T>(xs->value.data.data(), N, F).transpose() * Dm;
      if (pd[2])
        for (std::int64_t j = 0; j < G; ++j) (*pd[2])[j] += Dm.col(j).sum();
    };
  }
  return VarT<T>(std::move(n));
}

template <typename T>
VarT<T> batch_norm(const VarT<T>& input, const VarT<T>& gamma, const VarT<T>& beta,
                   BatchNormStateT<T>& state, bool training, T momentum, T eps) {
  const TensorT<T>& x = input.value();
  if (x.ndim() != 4) throw InvalidArgument("batch_norm: expects 4-d input");
  const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (gamma.value().numel() != C || beta.value().numel() != C)
    throw InvalidArgument("batch_norm: gamma/beta must have one entry per channel");
  const std::int64_t M = N * H * W;  // values per channel
  if (training && M < 2)
    throw DegenerateBatch("batch_norm: train mode needs at least 2 values per channel");

  TensorT<T> mean = TensorT<T>::zeros({C});
  TensorT<T> var = TensorT<T>::zeros({C});
  if (training) {
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t c = 0; c < C; ++c) {
        const T* p = x.data.data() + (n * C + c) * H * W;
        T s = 0;
        for (std::int64_t i = 0; i < H * W; ++i) s += p[i];
        mean[c] += s;
      }
    for (std::int64_t c = 0; c < C; ++c) mean[c] /= static_cast<T>(M);
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t c = 0; c < C; ++c) {
        const T* p = x.data.data() + (n * C + c) * H * W;
        T s = 0;
        for (std::int64_t i = 0; i < H * W; ++i) {
          const T dv = p[i] - mean[c];
          s += dv * dv;
        }
        var[c] += s;
      }
    for (std::int64_t c = 0; c < C; ++c) var[c] /= static_cast<T>(M);
    for (std::int64_t c = 0; c < C; ++c) {
      state.running_mean[c] = momentum * state.running_mean[c] + (T(1) - momentum) * mean[c];
      state.running_var[c] = momentum * state.running_var[c] + (T(1) - momentum) * var[c];
    }
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }

  auto xhat = std::make_shared<TensorT<T>>(TensorT<T>::zeros(x.shape));
  auto inv_std = std::make_shared<TensorT<T>>(TensorT<T>::zeros(std::vector<std::int64_t>{C}));
  for (std::int64_t c = 0; c < C; ++c) (*inv_std)[c] = T(1) / std::sqrt(var[c] + eps);
  TensorT<T> y = TensorT<T>::zeros(x.shape);
  const TensorT<T>& gv = gamma.value();
  const TensorT<T>& bv = beta.value();
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t c = 0; c < C; ++c) {
      const T* p = x.data.data() + (n * C + c) * H * W;
      T* xh = xhat->data.data() + (n * C + c) * H * W;
      T* yp = y.data.data() + (n * C + c) * H * W;
      const T is = (*inv_std)[c], mu = mean[c], g = gv[c], b = bv[c];
      for (std::int64_t i = 0; i < H * W; ++i) {
        xh[i] = (p[i] - mu) * is;
        yp[i] = g * xh[i] + b;
      }
    }

  auto gs = gamma.node();
  auto node = std::make_shared<NodeT<T>>();
  node->value = std::move(y);
  node->parents = {input.node(), gamma.node(), beta.node()};
  node->requires_grad = input.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  if (node->requires_grad) {
    node->backprop = [xhat, inv_std, gs, N, C, H, W, M, training](
                         const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
      // dgamma = sum(d * xhat), dbeta = sum(d); with batch statistics
      // dx = gamma * inv_std * (d - mean(d) - xhat * mean(d * xhat)),
      // with frozen statistics the mean terms vanish.
      for (std::int64_t c = 0; c < C; ++c) {
        T sum_d = 0, sum_dxh = 0;
        for (std::int64_t n = 0; n < N; ++n) {
          const T* dp = d.data.data() + (n * C + c) * H * W;
          const T* xh = xhat->data.data() + (n * C + c) * H * W;
          for (std::int64_t i = 0; i < H * W; ++i) {
            sum_d += dp[i];
            sum_dxh += dp[i] * xh[i];
          }
        }
        if (pd[1]) (*pd[1])[c] += sum_dxh;
        if (pd[2]) (*pd[2])[c] += sum_d;
        if (pd[0]) {
          const T g = gs->value[c], is = (*inv_std)[c];
          const T mean_d = sum_d / static_cast<T>(M);
          const T mean_dxh = sum_dxh / static_cast<T>(M);
          for (std::int64_t n = 0; n < N; ++n) {
            const T* dp = d.data.data() + (n * C + c) * H * W;
            const T* xh = xhat->data.data() + (n * C + c) * H * W;
            T* dx = pd[0]->data.data() + (n * C + c) * H * W;
            if (training) {
              for (std::int64_t i = 0; i < H * W; ++i)
                dx[i] += g * is * (dp[i] - mean_d - xh[i] * mean_dxh);
            } else {
              for (std::int64_t i = 0; i < H * W; ++i) dx[i] += g * is * dp[i];
            }
          }
        }
      }
    };
  }
  return VarT<T>(std::move(node));
}

template <typename T>
VarT<T> avg_pool2(const VarT<T>& input) {
  const TensorT<T>& x = input.value();
  if (x.ndim() != 4) throw InvalidArgument("avg_pool2: expects 4-d input");
  const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % 2 != 0 || W % 2 != 0) throw InvalidArgument("avg_pool2: H and W must be even");
  const std::int64_t Ho = H / 2, Wo = W / 2;
  TensorT<T> y = TensorT<T>::zeros({N, C, Ho, Wo});
  for (std::int64_t nc = 0; nc < N * C; ++nc) {
    const T* p = x.data.data() + nc * H * W;
    T* q = y.data.data() + nc * Ho * Wo;
    for (std::int64_t i = 0; i < Ho; ++i)
      for (std::int64_t j = 0; j < Wo; ++j)
        q[i * Wo + j] = (p[2 * i * W + 2 * j] + p[2 * i * W + 2 * j + 1] +
                         p[(2 * i + 1) * W + 2 * j] + p[(2 * i + 1) * W + 2 * j + 1]) /
                        T(4);
  }
  auto node = std::make_shared<NodeT<T>>();
  node->value = std::move(y);
  node->parents = {input.node()};
  node->requires_grad = input.requires_grad();
  if (node->requires_grad) {
    node->backprop = [N, C, H, W, Ho,
                      Wo](const TensorT<T>& d, const std::vector<TensorT<T>*>& pd) {
      if (!pd[0]) return;
      for (std::int64_t nc = 0; nc < N * C; ++nc) {
        T* dx = pd[0]->data.data() + nc * H * W;
        const T* dp = d.data.data() + nc * Ho * Wo;
        for (std::int64_t i = 0; i < Ho; ++i)
          for (std::int64_t j = 0; j < Wo; ++j) {
            const T g = dp[i * Wo + j] / T(4);
            dx[2 * i * W + 2 * j] += g;
            dx[2 * i * W + 2 * j + 1] += g;
            dx[(2 * i + 1) * W + 2 * j] += g;
            dx[(2 * i + 1) * W + 2 * j + 1] += g;
          }
      }
    };
  }
  return VarT<T>(std::move(node));
}

#define DEALIAS_INSTANTIATE(T)                                                              \
  template VarT<T> conv2d<T>(const VarT<T>&, const VarT<T>&, const VarT<T>&, int, int);     \
  template VarT<T> conv2d_transpose<T>(const VarT<T>&, const VarT<T>&, const VarT<T>&, int, \
                                       int);                                                \
  template VarT<T> dense<T>(const VarT<T>&, const VarT<T>&, const VarT<T>&);                \
  template VarT<T> batch_norm<T>(const VarT<T>&, const VarT<T>&, const VarT<T>&,            \
                                 BatchNormStateT<T>&, bool, T, T);                          \
  template VarT<T> avg_pool2<T>(const VarT<T>&);

DEALIAS_INSTANTIATE(float)
DEALIAS_INSTANTIATE(double)
#undef DEALIAS_INSTANTIATE

}  // namespace dealias::nn
