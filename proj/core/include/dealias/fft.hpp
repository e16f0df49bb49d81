#pragma once

#include "dealias/image.hpp"

namespace dealias {

// Centered orthonormal 2-D Fourier transforms (radix-2, so H and W must be
// powers of two >= 2). Orthonormal scaling: forward and inverse both carry
// 1/sqrt(H*W), making Parseval an equality and ifft2(fft2(x)) == x.

KSpaceGrid fft2_centered(const KSpaceGrid& grid);
KSpaceGrid fft2_centered(const Image& img);
KSpaceGrid ifft2_centered(const KSpaceGrid& k);

// Sum of squared magnitudes.
double grid_energy(const KSpaceGrid& g);
double image_energy(const Image& img);

}  // namespace dealias
