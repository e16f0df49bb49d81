#include "dealias/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "dealias/errors.hpp"
#include "binio.hpp"

namespace dealias {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png_gray8(const std::string& path, const GrayImage8& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw FormatError("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("libpng write error for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int i = 0; i < img.h; ++i)
    png_write_row(png, const_cast<png_bytep>(img.px.data() + static_cast<std::size_t>(i) * img.w));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void read_png_gray(const std::string& path, int& h, int& w, std::vector<double>& raw) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw FormatError("cannot open: " + path);
  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw FormatError("not a PNG file: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng read error for " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("expected 8- or 16-bit grayscale PNG: " + path);
  }
  h = static_cast<int>(png_get_image_height(png, info));
  w = static_cast<int>(png_get_image_width(png, info));
  if (depth == 16) png_set_swap(png);  // libpng delivers big-endian 16-bit rows

  raw.assign(static_cast<std::size_t>(h) * w, 0.0);
  if (depth == 8) {
    std::vector<png_byte> row(static_cast<std::size_t>(w));
    for (int i = 0; i < h; ++i) {
      png_read_row(png, row.data(), nullptr);
      for (int j = 0; j < w; ++j) raw[static_cast<std::size_t>(i) * w + j] = row[static_cast<std::size_t>(j)];
    }
  } else {
    std::vector<std::uint16_t> row(static_cast<std::size_t>(w));
    for (int i = 0; i < h; ++i) {
      png_read_row(png, reinterpret_cast<png_bytep>(row.data()), nullptr);
      for (int j = 0; j < w; ++j) raw[static_cast<std::size_t>(i) * w + j] = row[static_cast<std::size_t>(j)];
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

GrayImage8 image_to_gray8(const Image& img) {
  GrayImage8 out;
  out.h = img.h;
  out.w = img.w;
  out.px.resize(img.v.size());
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    const double v01 = (static_cast<double>(img.v[i]) + 1.0) * 0.5;
    const double c = std::fmin(1.0, std::fmax(0.0, v01));
    out.px[i] = static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
  }
  return out;
}

void write_image_png(const std::string& path, const Image& img) {
  write_png_gray8(path, image_to_gray8(img));
}

void write_mask_png(const std::string& path, int h, int w,
                    const std::vector<std::uint8_t>& bits) {
  GrayImage8 img;
  img.h = h;
  img.w = w;
  img.px.resize(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) img.px[i] = bits[i] ? 255 : 0;
  write_png_gray8(path, img);
}

std::string img1_sidecar_path(const std::string& f32_path) {
  const auto dot = f32_path.rfind('.');
  const auto slash = f32_path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return f32_path + ".img1";
  return f32_path.substr(0, dot) + ".img1";
}

void write_raw_f32(const std::string& f32_path, const Image& img) {
  {
    std::ofstream os(f32_path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + f32_path);
    for (float v : img.v) binio::write_le<float>(os, v);
    if (!os) throw FormatError("write failed: " + f32_path);
  }
  std::ofstream hs(img1_sidecar_path(f32_path), std::ios::binary);
  if (!hs) throw FormatError("cannot open for writing: " + img1_sidecar_path(f32_path));
  hs.write("IMG1", 4);
  binio::write_le<std::uint32_t>(hs, static_cast<std::uint32_t>(img.h));
  binio::write_le<std::uint32_t>(hs, static_cast<std::uint32_t>(img.w));
}

Image read_raw_f32(const std::string& f32_path) {
  const std::string sidecar = img1_sidecar_path(f32_path);
  std::ifstream hs(sidecar, std::ios::binary);
  if (!hs) throw FormatError("missing IMG1 sidecar: " + sidecar);
  char magic[4];
  binio::read_bytes(hs, magic, 4, "IMG1 magic");
  if (std::string(magic, 4) != "IMG1") throw FormatError("not an IMG1 header: " + sidecar);
  const auto h = static_cast<int>(binio::read_le<std::uint32_t>(hs, "H"));
  const auto w = static_cast<int>(binio::read_le<std::uint32_t>(hs, "W"));
  if (h <= 0 || w <= 0) throw FormatError("bad IMG1 dimensions in " + sidecar);

  std::ifstream is(f32_path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + f32_path);
  Image img(h, w);
  for (auto& v : img.v) v = binio::read_le<float>(is, "f32 samples");
  return img;
}

}  // namespace dealias
