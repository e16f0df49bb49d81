#include "dealias/losses.hpp"

#include <cmath>

namespace dealias::nn {

namespace {

constexpr double kProbEps = 1e-7;

template <typename T>
VarT<T> clamp_probs(const VarT<T>& p) {
  VarT<T> c = nn::clamp(p, static_cast<T>(kProbEps), static_cast<T>(1.0 - kProbEps));
  for (std::int64_t i = 0; i < c.value().numel(); ++i) {
    const T v = c.value()[i];
    if (!(v > T(0) && v < T(1)))
      throw NumericFault("loss: probability outside (0,1) after clamping");
  }
  return c;
}

}  // namespace

template <typename T>
VarT<T> discriminator_loss(const VarT<T>& d_real, const VarT<T>& d_fake) {
  VarT<T> real = clamp_probs(d_real);
  VarT<T> fake = clamp_probs(d_fake);
  VarT<T> real_term = scale(mean_all(nn::log(real)), T(-1));
  VarT<T> fake_term = scale(mean_all(nn::log(rsub_scalar(T(1), fake))), T(-1));
  return add(real_term, fake_term);
}

template <typename T>
VarT<T> generator_adversarial_loss(const VarT<T>& d_fake, AdvVariant variant) {
  VarT<T> fake = clamp_probs(d_fake);
  if (variant == AdvVariant::saturating) return mean_all(nn::log(rsub_scalar(T(1), fake)));
  return scale(mean_all(nn::log(fake)), T(-1));
}

template <typename T>
VarT<T> pixel_loss(const VarT<T>& x_hat, const VarT<T>& x_t) {
  const TensorT<T>& ref = x_t.value();
  if (!shapes_equal(x_hat.value(), ref)) throw InvalidArgument("pixel_loss: shape mismatch");
  if (ref.ndim() != 4) throw InvalidArgument("pixel_loss: expects N x C x H x W batches");
  const std::int64_t N = ref.dim(0);
  const std::int64_t per = ref.numel() / N;

  // Per-image 1/||x_t||^2, replicated to full shape as a constant factor.
  TensorT<T> weight = TensorT<T>::zeros(ref.shape);
  for (std::int64_t n = 0; n < N; ++n) {
    T norm2 = 0;
    for (std::int64_t i = 0; i < per; ++i) {
      const T v = ref[n * per + i];
      norm2 += v * v;
    }
    if (norm2 == T(0)) throw DegenerateReference("pixel_loss: reference image has zero norm");
    for (std::int64_t i = 0; i < per; ++i) weight[n * per + i] = T(1) / norm2;
  }

  VarT<T> diff = sub(x_hat, x_t);
  VarT<T> weighted = mul(mul(diff, diff), VarT<T>::constant(std::move(weight)));
  return scale(sum_all(weighted), T(1) / (T(2) * static_cast<T>(N)));
}

template <typename T>
VarT<T> perceptual_loss(const VarT<T>& x_hat, const VarT<T>& x_t,
                        PerceptualEncoderT<T>& encoder) {
  if (!shapes_equal(x_hat.value(), x_t.value()))
    throw InvalidArgument("perceptual_loss: shape mismatch");
  VarT<T> f_hat = encoder.forward(x_hat);
  VarT<T> f_ref = encoder.forward(x_t);
  VarT<T> diff = sub(f_hat, f_ref);
  return scale(mean_all(mul(diff, diff)), T(1) / T(2));
}

template <typename T>
GeneratorLossTermsT<T> generator_total_loss(const VarT<T>& x_hat, const VarT<T>& x_t,
                                            const VarT<T>& d_fake, const LossWeights& weights,
                                            PerceptualEncoderT<T>* encoder) {
  GeneratorLossTermsT<T> terms;
  VarT<T> total = generator_adversarial_loss(d_fake, weights.adversarial_variant);
  terms.adversarial = static_cast<double>(total.value()[0]);
  if (weights.alpha != 0.0) {
    VarT<T> px = pixel_loss(x_hat, x_t);
    terms.pixel = static_cast<double>(px.value()[0]);
    total = add(total, scale(px, static_cast<T>(weights.alpha)));
  }
  if (weights.beta != 0.0) {
    if (!encoder)
      throw InvalidArgument("generator_total_loss: beta != 0 requires a perceptual encoder");
    VarT<T> pc = perceptual_loss(x_hat, x_t, *encoder);
    terms.perceptual = static_cast<double>(pc.value()[0]);
    total = add(total, scale(pc, static_cast<T>(weights.beta)));
  }
  terms.total = total;
  return terms;
}

#define DEALIAS_INSTANTIATE(T)                                                               \
  template VarT<T> discriminator_loss<T>(const VarT<T>&, const VarT<T>&);                    \
  template VarT<T> generator_adversarial_loss<T>(const VarT<T>&, AdvVariant);                \
  template VarT<T> pixel_loss<T>(const VarT<T>&, const VarT<T>&);                            \
  template VarT<T> perceptual_loss<T>(const VarT<T>&, const VarT<T>&,                        \
                                      PerceptualEncoderT<T>&);                               \
  template GeneratorLossTermsT<T> generator_total_loss<T>(const VarT<T>&, const VarT<T>&,    \
                                                          const VarT<T>&, const LossWeights&, \
                                                          PerceptualEncoderT<T>*);

DEALIAS_INSTANTIATE(float)
DEALIAS_INSTANTIATE(double)
#undef DEALIAS_INSTANTIATE

}  // namespace dealias::nn
