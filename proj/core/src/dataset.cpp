#include "dealias/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dealias/errors.hpp"
#include "dealias/image_io.hpp"
#include "dealias/phantom.hpp"
#include "dealias/rng.hpp"

namespace dealias {

namespace fs = std::filesystem;

nn::TensorF images_to_batch(const std::vector<const Image*>& imgs) {
  if (imgs.empty()) throw InvalidArgument("images_to_batch: empty batch");
  const int h = imgs[0]->h, w = imgs[0]->w;
  nn::TensorF t = nn::TensorF::zeros({static_cast<std::int64_t>(imgs.size()), 1, h, w});
  for (std::size_t n = 0; n < imgs.size(); ++n) {
    if (imgs[n]->h != h || imgs[n]->w != w)
      throw InvalidArgument("images_to_batch: mixed image sizes");
    std::copy(imgs[n]->v.begin(), imgs[n]->v.end(),
              t.data.begin() + static_cast<std::ptrdiff_t>(n * imgs[n]->v.size()));
  }
  return t;
}

nn::TensorF image_to_batch(const Image& img) { return images_to_batch({&img}); }

Image batch_to_image(const nn::TensorF& batch, std::int64_t n) {
  if (batch.ndim() != 4 || batch.dim(1) != 1)
    throw InvalidArgument("batch_to_image: expects N x 1 x H x W");
  Image img(static_cast<int>(batch.dim(2)), static_cast<int>(batch.dim(3)));
  const auto plane = static_cast<std::size_t>(img.h) * img.w;
  std::copy(batch.data.begin() + static_cast<std::ptrdiff_t>(n * plane),
            batch.data.begin() + static_cast<std::ptrdiff_t>((n + 1) * plane), img.v.begin());
  return img;
}

Dataset make_phantom_dataset(int count, int h, int w, std::uint64_t seed) {
  if (count <= 0) throw InvalidArgument("make_phantom_dataset: count must be positive");
  Dataset ds;
  ds.h = h;
  ds.w = w;
  ds.ids.reserve(static_cast<std::size_t>(count));
  ds.images.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "phantom_%04d", i);
    ds.ids.emplace_back(id);
    ds.images.push_back(phantom(h, w, mix_seed(seed, static_cast<std::uint64_t>(i))));
  }
  return ds;
}

namespace {

// Per-image min-max onto [-1,1]; a constant image maps to 0.
Image normalize_min_max(const std::vector<double>& raw, int h, int w) {
  double lo = raw[0], hi = raw[0];
  for (double v : raw) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Image img(h, w);
  if (hi == lo) return img;  // zeros
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.v[i] = static_cast<float>(2.0 * (raw[i] - lo) / (hi - lo) - 1.0);
  return img;
}

Image crop_resize(const Image& src, int th, int tw) {
  if (src.h == th && src.w == tw) return src;
  // center crop to the target aspect
  int ch = src.h, cw = src.w;
  if (static_cast<std::int64_t>(src.w) * th > static_cast<std::int64_t>(src.h) * tw)
    cw = std::max(1, static_cast<int>(std::llround(static_cast<double>(src.h) * tw / th)));
  else
    ch = std::max(1, static_cast<int>(std::llround(static_cast<double>(src.w) * th / tw)));
  const int oi = (src.h - ch) / 2, oj = (src.w - cw) / 2;

  Image out(th, tw);
  for (int i = 0; i < th; ++i)
    for (int j = 0; j < tw; ++j) {
      const double sy = oi + (ch > 1 ? static_cast<double>(i) * (ch - 1) / (th - 1) : 0.0);
      const double sx = oj + (cw > 1 ? static_cast<double>(j) * (cw - 1) / (tw - 1) : 0.0);
      const int i0 = static_cast<int>(std::floor(sy));
      const int j0 = static_cast<int>(std::floor(sx));
      const int i1 = std::min(i0 + 1, src.h - 1);
      const int j1 = std::min(j0 + 1, src.w - 1);
      const double fy = sy - i0, fx = sx - j0;
      const double v00 = src.at(i0, j0), v01 = src.at(i0, j1);
      const double v10 = src.at(i1, j0), v11 = src.at(i1, j1);
      out.at(i, j) = static_cast<float>(v00 + fx * (v01 - v00) + fy * (v10 - v00) +
                                        fx * fy * (v00 + v11 - v01 - v10));
    }
  return out;
}

}  // namespace

Dataset load_directory(const std::string& dir, int target_h, int target_w, bool resize) {
  if (!fs::is_directory(dir)) throw InvalidArgument("load_directory: not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".f32") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.h = target_h;
  ds.w = target_w;
  for (const auto& path : files) {
    try {
      Image img;
      if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
        int h = 0, w = 0;
        std::vector<double> raw;
        read_png_gray(path, h, w, raw);
        img = normalize_min_max(raw, h, w);
      } else {
        const Image stored = read_raw_f32(path);
        std::vector<double> raw(stored.v.begin(), stored.v.end());
        img = normalize_min_max(raw, stored.h, stored.w);
      }
      if (img.h != target_h || img.w != target_w) {
        if (!resize)
          throw InvalidArgument("load_directory: size mismatch for " + path +
                                " and resize disabled");
        img = crop_resize(img, target_h, target_w);
      }
      ds.images.push_back(std::move(img));
      ds.ids.push_back(fs::path(path).filename().string());
    } catch (const InvalidArgument&) {
      throw;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: skipping unreadable file %s (%s)\n", path.c_str(),
                   e.what());
    }
  }
  if (ds.images.empty())
    throw InvalidArgument("load_directory: no readable images in " + dir);
  return ds;
}

}  // namespace dealias
