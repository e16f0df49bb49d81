#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "dealias/tensor.hpp"

namespace dealias {

// Spatial-domain picture, row-major, values normalized to [-1, 1].
struct Image {
  int h = 0;
  int w = 0;
  std::vector<float> v;

  Image() = default;
  Image(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.0f) {}

  float& at(int i, int j) { return v[static_cast<std::size_t>(i) * w + j]; }
  float at(int i, int j) const { return v[static_cast<std::size_t>(i) * w + j]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(h) * w; }
};

// Complex spatial-frequency grid, centered convention: the DC component sits
// at index (h/2, w/2).
struct KSpaceGrid {
  int h = 0;
  int w = 0;
  std::vector<std::complex<double>> v;

  KSpaceGrid() = default;
  KSpaceGrid(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_) {}

  std::complex<double>& at(int i, int j) { return v[static_cast<std::size_t>(i) * w + j]; }
  const std::complex<double>& at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * w + j];
  }
};

// Stacks images into an N x 1 x H x W batch for the networks.
nn::TensorF images_to_batch(const std::vector<const Image*>& imgs);
nn::TensorF image_to_batch(const Image& img);

// Extracts sample n of an N x 1 x H x W batch.
Image batch_to_image(const nn::TensorF& batch, std::int64_t n);

}  // namespace dealias
