#pragma once

#include <string>
#include <vector>

#include "dealias/image.hpp"
#include "dealias/metrics.hpp"

namespace dealias {

// ----- PNG (grayscale) -----

void write_png_gray8(const std::string& path, const GrayImage8& img);

// Reads an 8- or 16-bit grayscale PNG; raw values are returned in native
// units (0..255 or 0..65535). Throws FormatError for non-grayscale or
// unreadable files.
void read_png_gray(const std::string& path, int& h, int& w, std::vector<double>& raw);

// [-1,1] image quantized round-half-up onto 0..255.
GrayImage8 image_to_gray8(const Image& img);
void write_image_png(const std::string& path, const Image& img);

// Mask preview: sampled locations white (255), rest black.
void write_mask_png(const std::string& path, int h, int w,
                    const std::vector<std::uint8_t>& bits);

// ----- raw f32 with IMG1 sidecar -----
// Data file: H*W little-endian f32, row-major. Sidecar "<base>.img1":
// magic "IMG1", u32 H, u32 W (little-endian). For a data file "x.f32" the
// sidecar is "x.img1".

void write_raw_f32(const std::string& f32_path, const Image& img);
Image read_raw_f32(const std::string& f32_path);

std::string img1_sidecar_path(const std::string& f32_path);

}  // namespace dealias
