#pragma once

#include "dealias/models.hpp"

namespace dealias::nn {

enum class AdvVariant { saturating, non_saturating };

struct LossWeights {
  double alpha = 15.0;    // pixel term
  double beta = 0.0025;   // perceptual term
  AdvVariant adversarial_variant = AdvVariant::non_saturating;
};

// -mean(log d_real) - mean(log(1 - d_fake)); probabilities are clamped to
// [eps, 1-eps] with eps = 1e-7 before the logs. 2*ln2 at the 0.5 point.
template <typename T>
VarT<T> discriminator_loss(const VarT<T>& d_real, const VarT<T>& d_fake);

// saturating: mean(log(1 - d_fake)) (the literal minimax term);
// non_saturating: -mean(log d_fake). Both decrease as d_fake -> 1.
template <typename T>
VarT<T> generator_adversarial_loss(const VarT<T>& d_fake, AdvVariant variant);

// (1/2) * mean over the batch of ||x_t - x_hat||^2 / ||x_t||^2. The reference
// enters as a constant, so gradients flow to x_hat only.
template <typename T>
VarT<T> pixel_loss(const VarT<T>& x_hat, const VarT<T>& x_t);

// (1/2) * mean squared difference of the frozen encoder features.
template <typename T>
VarT<T> perceptual_loss(const VarT<T>& x_hat, const VarT<T>& x_t,
                        PerceptualEncoderT<T>& encoder);

template <typename T>
struct GeneratorLossTermsT {
  VarT<T> total;
  double pixel = 0.0;       // component values, for logging
  double perceptual = 0.0;
  double adversarial = 0.0;
};

// alpha * pixel + beta * perceptual + adversarial. A zero weight skips that
// component's graph entirely, so its gradient contribution is exactly zero.
// encoder may be null only when beta == 0.
template <typename T>
GeneratorLossTermsT<T> generator_total_loss(const VarT<T>& x_hat, const VarT<T>& x_t,
                                            const VarT<T>& d_fake, const LossWeights& weights,
                                            PerceptualEncoderT<T>* encoder);

}  // namespace dealias::nn
