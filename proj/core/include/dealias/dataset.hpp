#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dealias/image.hpp"

namespace dealias {

// Uniformly sized normalized images with unique ids, ordered.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<Image> images;
  int h = 0;
  int w = 0;

  std::size_t size() const { return images.size(); }
};

// Seeded head phantoms (ids "phantom_0000", ...).
Dataset make_phantom_dataset(int count, int h, int w, std::uint64_t seed);

// Loads every *.png (8/16-bit grayscale) and *.f32 (with IMG1 sidecar) in
// lexicographic filename order. Images are center-cropped to the target
// aspect and bilinearly resized when shapes differ (an error if resize is
// disabled), then mapped to [-1,1] by per-image min-max; a constant image
// maps to 0. Unreadable files are skipped with a warning; an error only if
// nothing loads.
Dataset load_directory(const std::string& dir, int target_h, int target_w, bool resize = true);

}  // namespace dealias
