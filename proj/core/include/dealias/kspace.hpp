#pragma once

#include "dealias/fft.hpp"
#include "dealias/mask.hpp"

namespace dealias {

// Masked Fourier encoding: fft2_centered(img) at sampled locations, exact
// zeros elsewhere.
KSpaceGrid undersample(const Image& img, const SamplingMask& mask);

// Zero-filled reconstruction: the complex modulus of ifft2_centered(k),
// mapped back to [-1, 1]. v_max > 0 applies the dataset normalization map
// v -> 2*v/v_max - 1 (v_max being the per-image maximum of the fully sampled
// magnitude); v_max <= 0 means the k-space came from an already-normalized
// nonnegative image and the modulus is returned as-is. Either way the result
// is clamped to [-1, 1].
Image zero_fill_recon(const KSpaceGrid& k, double v_max = 0.0);

// Paired-input pipeline used in training and simulation: shifts the
// normalized ground truth to its magnitude picture (x+1)/2 in [0,1], masks
// its spectrum and maps the zero-filled modulus back with v_max = 1. With a
// full mask this reproduces x_t exactly.
Image simulate_zero_fill(const Image& x_t, const SamplingMask& mask);

}  // namespace dealias
