#include "dealias/kspace.hpp"

#include <cmath>

#include "dealias/errors.hpp"

namespace dealias {

KSpaceGrid undersample(const Image& img, const SamplingMask& mask) {
  if (img.h != mask.h || img.w != mask.w)
    throw InvalidArgument("undersample: image and mask shapes differ");
  KSpaceGrid k = fft2_centered(img);
  for (std::size_t i = 0; i < k.v.size(); ++i)
    if (!mask.bits[i]) k.v[i] = std::complex<double>(0.0, 0.0);
  return k;
}

Image zero_fill_recon(const KSpaceGrid& k, double v_max) {
  const KSpaceGrid x = ifft2_centered(k);
  Image out(k.h, k.w);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    double m = std::abs(x.v[i]);
    if (v_max > 0.0) m = 2.0 * m / v_max - 1.0;
    out.v[i] = static_cast<float>(std::fmin(1.0, std::fmax(-1.0, m)));
  }
  return out;
}

Image simulate_zero_fill(const Image& x_t, const SamplingMask& mask) {
  if (x_t.h != mask.h || x_t.w != mask.w)
    throw InvalidArgument("simulate_zero_fill: image and mask shapes differ");
  Image magnitude(x_t.h, x_t.w);
  for (std::size_t i = 0; i < magnitude.v.size(); ++i)
    magnitude.v[i] = 0.5f * (x_t.v[i] + 1.0f);
  KSpaceGrid k = undersample(magnitude, mask);
  const KSpaceGrid zf = ifft2_centered(k);
  Image out(x_t.h, x_t.w);
  for (std::size_t i = 0; i < zf.v.size(); ++i) {
    const double m = std::abs(zf.v[i]);
    out.v[i] = static_cast<float>(std::fmin(1.0, std::fmax(-1.0, 2.0 * m - 1.0)));
  }
  return out;
}

}  // namespace dealias
