#pragma once

#include <cstdint>

#include "dealias/image.hpp"

namespace dealias {

struct AugmentSpec {
  double flip_h = 0.0;  // probabilities
  double flip_v = 0.0;
  double rotate_deg_max = 0.0;
  int shift_px_max = 0;
  double brightness_delta_max = 0.0;
  double zoom_lo = 1.0, zoom_hi = 1.0;
  double elastic_alpha = 0.0;
  double elastic_sigma = 1.0;
  double elastic_prob = 0.0;

  static AugmentSpec defaults() {
    AugmentSpec s;
    s.flip_h = 0.5;
    s.flip_v = 0.5;
    s.rotate_deg_max = 10.0;
    s.shift_px_max = 4;
    s.brightness_delta_max = 0.1;
    s.zoom_lo = 0.9;
    s.zoom_hi = 1.1;
    s.elastic_alpha = 3.0;
    s.elastic_sigma = 4.0;
    s.elastic_prob = 0.5;
    return s;
  }
};

Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);
Image rotate_bilinear(const Image& img, double degrees);      // about the image center
Image shift_edge_clamp(const Image& img, int dy, int dx);     // whole pixels, border replicate
Image zoom_bilinear(const Image& img, double scale);          // about the image center
Image adjust_brightness(const Image& img, double delta);      // clamped to [-1,1]

// Warps by a smoothed random displacement field: per-axis uniform noise in
// [-1,1], Gaussian-smoothed with std sigma (kernel radius ceil(3*sigma),
// zero padding), scaled by alpha, then bilinear resampling with edge-clamped
// coordinates. alpha == 0 returns the input unchanged.
Image elastic_distort(const Image& img, double alpha, double sigma, std::uint64_t seed);

// Applies flip -> rotate -> shift -> zoom -> brightness -> elastic, each with
// its probability/magnitude, deterministically from the key. Output stays in
// [-1,1]. Keys are derived as mix_seed(run_seed, epoch, sample_index).
Image augment(const Image& img, const AugmentSpec& spec, std::uint64_t key);

}  // namespace dealias
