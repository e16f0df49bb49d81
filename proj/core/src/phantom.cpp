#include "dealias/phantom.hpp"

#include <cmath>

#include "dealias/errors.hpp"
#include "dealias/rng.hpp"

namespace dealias {

namespace {

constexpr double kDegToRad = 0.017453292519943295;

// Base head phantom (Toft-style intensities: bright shell, soft interior).
const Ellipse kBaseEllipses[] = {
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},        // skull shell
    {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},  // brain interior
    {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},      // right ventricle
    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},      // left ventricle
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
    {0.0, -0.605, 0.023, 0.023, 0.0, 0.1},
    {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
};

}  // namespace

bool ellipse_contains(const Ellipse& e, double x, double y) {
  const double th = e.theta_deg * kDegToRad;
  const double dx = x - e.cx, dy = y - e.cy;
  const double xr = std::cos(th) * dx + std::sin(th) * dy;
  const double yr = -std::sin(th) * dx + std::cos(th) * dy;
  return (xr * xr) / (e.rx * e.rx) + (yr * yr) / (e.ry * e.ry) <= 1.0;
}

std::vector<Ellipse> phantom_ellipses(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x9147A0u));
  std::vector<Ellipse> out;
  out.reserve(std::size(kBaseEllipses));
  for (const Ellipse& base : kBaseEllipses) {
    Ellipse e = base;
    e.cx += rng.uniform(-0.02, 0.02);
    e.cy += rng.uniform(-0.02, 0.02);
    e.rx *= rng.uniform(0.95, 1.05);
    e.ry *= rng.uniform(0.95, 1.05);
    e.theta_deg += rng.uniform(-3.0, 3.0);
    e.intensity *= rng.uniform(0.95, 1.05);
    out.push_back(e);
  }
  return out;
}

Image render_phantom(const std::vector<Ellipse>& ellipses, int h, int w) {
  if (h < 16 || w < 16) throw InvalidArgument("render_phantom: grid must be at least 16x16");
  std::vector<double> raw(static_cast<std::size_t>(h) * w, 0.0);
  double v_max = 0.0;
  for (int i = 0; i < h; ++i) {
    const double y = pixel_coord(i, h);
    for (int j = 0; j < w; ++j) {
      const double x = pixel_coord(j, w);
      double v = 0;
      for (const auto& e : ellipses)
        if (ellipse_contains(e, x, y)) v += e.intensity;
      v = std::max(v, 0.0);
      raw[static_cast<std::size_t>(i) * w + j] = v;
      v_max = std::max(v_max, v);
    }
  }
  Image img(h, w);
  if (v_max <= 0.0) {
    for (auto& p : img.v) p = -1.0f;
    return img;
  }
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.v[i] = static_cast<float>(2.0 * raw[i] / v_max - 1.0);
  return img;
}

Image phantom(int h, int w, std::uint64_t seed) {
  return render_phantom(phantom_ellipses(seed), h, w);
}

}  // namespace dealias
