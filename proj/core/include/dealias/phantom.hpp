#pragma once

#include <cstdint>
#include <vector>

#include "dealias/image.hpp"

namespace dealias {

// Ellipse in normalized coordinates: pixel centers map to [-1,1] on both
// axes, x along columns, y along rows. intensity adds where the point lies
// inside.
struct Ellipse {
  double cx = 0.0, cy = 0.0;   // center
  double rx = 0.0, ry = 0.0;   // semi-axes
  double theta_deg = 0.0;      // rotation, counterclockwise
  double intensity = 0.0;
};

bool ellipse_contains(const Ellipse& e, double x, double y);

// Head-phantom ellipse set (skull shell, brain, ventricles, small lesions)
// with seeded jitter of centers, axes, angles and intensities so that every
// seed yields a distinct anatomy.
std::vector<Ellipse> phantom_ellipses(std::uint64_t seed);

// Sums ellipse intensities per pixel, clamps negatives to zero and maps the
// raw values to [-1,1] by v -> 2*v/v_max - 1. Empty background renders as -1.
Image render_phantom(const std::vector<Ellipse>& ellipses, int h, int w);

Image phantom(int h, int w, std::uint64_t seed);

// Normalized x coordinate of pixel column j (same formula for rows).
inline double pixel_coord(int j, int extent) {
  return -1.0 + 2.0 * (j + 0.5) / static_cast<double>(extent);
}

}  // namespace dealias
