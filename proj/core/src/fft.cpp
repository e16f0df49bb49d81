#include "dealias/fft.hpp"

#include <cmath>

#include "dealias/errors.hpp"

namespace dealias {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey of length n (power of two).
// inverse=true conjugates the twiddles; no scaling applied here.
void fft1d(std::complex<double>* a, int n, int stride, bool inverse,
           std::vector<std::complex<double>>& scratch) {
  scratch.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = a[i * stride];

  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(scratch[static_cast<std::size_t>(i)], scratch[static_cast<std::size_t>(j)]);
  }

  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> u = scratch[static_cast<std::size_t>(i + k)];
        const std::complex<double> t = w * scratch[static_cast<std::size_t>(i + k + len / 2)];
        scratch[static_cast<std::size_t>(i + k)] = u + t;
        scratch[static_cast<std::size_t>(i + k + len / 2)] = u - t;
        w *= wl;
      }
    }
  }
  for (int i = 0; i < n; ++i) a[i * stride] = scratch[static_cast<std::size_t>(i)];
}

void check_size(int h, int w) {
  if (!is_pow2(h) || !is_pow2(w))
    throw UnsupportedSize("fft2: grid extents must be powers of two >= 2 (got " +
                          std::to_string(h) + "x" + std::to_string(w) + ")");
}

// Circular shift by (h/2, w/2); for even sizes fftshift and ifftshift agree.
KSpaceGrid half_shift(const KSpaceGrid& g) {
  KSpaceGrid out(g.h, g.w);
  const int sh = g.h / 2, sw = g.w / 2;
  for (int i = 0; i < g.h; ++i)
    for (int j = 0; j < g.w; ++j) out.at((i + sh) % g.h, (j + sw) % g.w) = g.at(i, j);
  return out;
}

}  // namespace

KSpaceGrid fft2_centered(const KSpaceGrid& grid) {
  check_size(grid.h, grid.w);
  KSpaceGrid work = half_shift(grid);
  std::vector<std::complex<double>> scratch;
  for (int i = 0; i < work.h; ++i) fft1d(&work.at(i, 0), work.w, 1, false, scratch);
  for (int j = 0; j < work.w; ++j) fft1d(&work.at(0, j), work.h, work.w, false, scratch);
  const double scale = 1.0 / std::sqrt(static_cast<double>(work.h) * work.w);
  for (auto& z : work.v) z *= scale;
  return half_shift(work);
}

KSpaceGrid fft2_centered(const Image& img) {
  KSpaceGrid g(img.h, img.w);
  for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] = std::complex<double>(img.v[i], 0.0);
  return fft2_centered(g);
}

KSpaceGrid ifft2_centered(const KSpaceGrid& k) {
  check_size(k.h, k.w);
  KSpaceGrid work = half_shift(k);
  std::vector<std::complex<double>> scratch;
  for (int i = 0; i < work.h; ++i) fft1d(&work.at(i, 0), work.w, 1, true, scratch);
  for (int j = 0; j < work.w; ++j) fft1d(&work.at(0, j), work.h, work.w, true, scratch);
  const double scale = 1.0 / std::sqrt(static_cast<double>(work.h) * work.w);
  for (auto& z : work.v) z *= scale;
  return half_shift(work);
}

double grid_energy(const KSpaceGrid& g) {
  double e = 0;
  for (const auto& z : g.v) e += std::norm(z);
  return e;
}

double image_energy(const Image& img) {
  double e = 0;
  for (float x : img.v) e += static_cast<double>(x) * x;
  return e;
}

}  // namespace dealias
