#include "dealias/augment.hpp"

#include <algorithm>
#include <cmath>

#include "dealias/errors.hpp"
#include "dealias/rng.hpp"

namespace dealias {

namespace {

// Bilinear sample with edge-clamped coordinates. Written so a constant image
// reproduces the constant exactly (the interpolation terms vanish).
float sample_bilinear(const Image& img, double y, double x) {
  y = std::fmin(std::fmax(y, 0.0), static_cast<double>(img.h - 1));
  x = std::fmin(std::fmax(x, 0.0), static_cast<double>(img.w - 1));
  const int i0 = static_cast<int>(std::floor(y));
  const int j0 = static_cast<int>(std::floor(x));
  const int i1 = std::min(i0 + 1, img.h - 1);
  const int j1 = std::min(j0 + 1, img.w - 1);
  const double fy = y - i0, fx = x - j0;
  const double v00 = img.at(i0, j0), v01 = img.at(i0, j1);
  const double v10 = img.at(i1, j0), v11 = img.at(i1, j1);
  const double v = v00 + fx * (v01 - v00) + fy * (v10 - v00) + fx * fy * (v00 + v11 - v01 - v10);
  return static_cast<float>(v);
}

constexpr double kDegToRad = 0.017453292519943295;

}  // namespace

Image flip_horizontal(const Image& img) {
  Image out(img.h, img.w);
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j) out.at(i, j) = img.at(i, img.w - 1 - j);
  return out;
}

Image flip_vertical(const Image& img) {
  Image out(img.h, img.w);
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j) out.at(i, j) = img.at(img.h - 1 - i, j);
  return out;
}

Image rotate_bilinear(const Image& img, double degrees) {
  const double th = degrees * kDegToRad;
  const double c = std::cos(th), s = std::sin(th);
  const double cy = (img.h - 1) / 2.0, cx = (img.w - 1) / 2.0;
  Image out(img.h, img.w);
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j) {
      const double u = j - cx, v = i - cy;
      // inverse map: rotate the output grid back by -degrees
      const double xs = c * u + s * v + cx;
      const double ys = -s * u + c * v + cy;
      out.at(i, j) = sample_bilinear(img, ys, xs);
    }
  return out;
}

Image shift_edge_clamp(const Image& img, int dy, int dx) {
  Image out(img.h, img.w);
  for (int i = 0; i < img.h; ++i) {
    const int si = std::clamp(i - dy, 0, img.h - 1);
    for (int j = 0; j < img.w; ++j) {
      const int sj = std::clamp(j - dx, 0, img.w - 1);
      out.at(i, j) = img.at(si, sj);
    }
  }
  return out;
}

Image zoom_bilinear(const Image& img, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("zoom: scale must be positive");
  const double cy = (img.h - 1) / 2.0, cx = (img.w - 1) / 2.0;
  Image out(img.h, img.w);
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j)
      out.at(i, j) = sample_bilinear(img, cy + (i - cy) / scale, cx + (j - cx) / scale);
  return out;
}

Image adjust_brightness(const Image& img, double delta) {
  Image out(img.h, img.w);
  for (std::size_t i = 0; i < img.v.size(); ++i)
    out.v[i] = static_cast<float>(
        std::fmin(1.0, std::fmax(-1.0, static_cast<double>(img.v[i]) + delta)));
  return out;
}

Image elastic_distort(const Image& img, double alpha, double sigma, std::uint64_t seed) {
  if (alpha < 0.0) throw InvalidArgument("elastic_distort: alpha must be >= 0");
  if (!(sigma > 0.0)) throw InvalidArgument("elastic_distort: sigma must be > 0");
  if (alpha == 0.0) return img;

  const int H = img.h, W = img.w;
  const std::size_t n = static_cast<std::size_t>(H) * W;
  Rng rng(mix_seed(seed, 0xE1A571Cu));
  std::vector<double> dy(n), dx(n);
  for (auto& v : dy) v = rng.uniform(-1.0, 1.0);
  for (auto& v : dx) v = rng.uniform(-1.0, 1.0);

  // Separable Gaussian smoothing, zero padding, kernel normalized to sum 1.
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double ksum = 0;
  for (int t = -radius; t <= radius; ++t) {
    kernel[static_cast<std::size_t>(t + radius)] = std::exp(-0.5 * (t / sigma) * (t / sigma));
    ksum += kernel[static_cast<std::size_t>(t + radius)];
  }
  for (auto& v : kernel) v /= ksum;

  auto smooth = [&](std::vector<double>& field) {
    std::vector<double> tmp(n, 0.0);
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) {
        double s = 0;
        for (int t = -radius; t <= radius; ++t) {
          const int jj = j + t;
          if (jj >= 0 && jj < W)
            s += kernel[static_cast<std::size_t>(t + radius)] *
                 field[static_cast<std::size_t>(i) * W + jj];
        }
        tmp[static_cast<std::size_t>(i) * W + j] = s;
      }
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) {
        double s = 0;
        for (int t = -radius; t <= radius; ++t) {
          const int ii = i + t;
          if (ii >= 0 && ii < H)
            s += kernel[static_cast<std::size_t>(t + radius)] *
                 tmp[static_cast<std::size_t>(ii) * W + j];
        }
        field[static_cast<std::size_t>(i) * W + j] = s;
      }
  };
  smooth(dy);
  smooth(dx);

  Image out(H, W);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j)
      out.at(i, j) = sample_bilinear(img, i + alpha * dy[static_cast<std::size_t>(i) * W + j],
                                     j + alpha * dx[static_cast<std::size_t>(i) * W + j]);
  return out;
}

Image augment(const Image& img, const AugmentSpec& spec, std::uint64_t key) {
  Rng rng(mix_seed(key, 0xA06u));
  // All draws happen unconditionally so the stream layout is independent of
  // which transforms are enabled.
  const double r_fh = rng.uniform();
  const double r_fv = rng.uniform();
  const double angle = rng.uniform(-spec.rotate_deg_max, spec.rotate_deg_max);
  const int span = 2 * spec.shift_px_max + 1;
  const int dy = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span))) -
                 spec.shift_px_max;
  const int dx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span))) -
                 spec.shift_px_max;
  const double zoom = rng.uniform(spec.zoom_lo, spec.zoom_hi);
  const double delta = rng.uniform(-spec.brightness_delta_max, spec.brightness_delta_max);
  const double r_el = rng.uniform();
  const std::uint64_t elastic_seed = rng.next_u64();

  Image out = img;
  if (spec.flip_h > 0.0 && r_fh < spec.flip_h) out = flip_horizontal(out);
  if (spec.flip_v > 0.0 && r_fv < spec.flip_v) out = flip_vertical(out);
  if (spec.rotate_deg_max > 0.0) out = rotate_bilinear(out, angle);
  if (spec.shift_px_max > 0) out = shift_edge_clamp(out, dy, dx);
  if (spec.zoom_lo != 1.0 || spec.zoom_hi != 1.0) out = zoom_bilinear(out, zoom);
  if (spec.brightness_delta_max > 0.0) out = adjust_brightness(out, delta);
  if (spec.elastic_prob > 0.0 && spec.elastic_alpha > 0.0 && r_el < spec.elastic_prob)
    out = elastic_distort(out, spec.elastic_alpha, spec.elastic_sigma, elastic_seed);

  for (auto& v : out.v) v = std::fmin(1.0f, std::fmax(-1.0f, v));
  return out;
}

}  // namespace dealias
