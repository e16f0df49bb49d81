#include "dealias/mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dealias/errors.hpp"
#include "dealias/rng.hpp"
#include "binio.hpp"

namespace dealias {

const char* mask_kind_name(MaskKind k) {
  return k == MaskKind::gaussian1d ? "gaussian1d" : "gaussian2d";
}

MaskKind mask_kind_from_name(const std::string& name) {
  if (name == "gaussian1d") return MaskKind::gaussian1d;
  if (name == "gaussian2d") return MaskKind::gaussian2d;
  throw InvalidArgument("unknown mask kind: " + name);
}

std::int64_t SamplingMask::popcount() const {
  std::int64_t n = 0;
  for (auto b : bits) n += b;
  return n;
}

double SamplingMask::achieved_ratio() const {
  return static_cast<double>(popcount()) / (static_cast<double>(h) * w);
}

namespace {

// Selects `count` indices out of weights.size() without replacement, with
// inclusion probability following the weights (Efraimidis-Spirakis keys:
// log(u)/w, keep the largest). forced_index is always selected.
std::vector<std::size_t> weighted_sample(const std::vector<double>& weights, std::size_t count,
                                         std::size_t forced_index, Rng& rng) {
  const std::size_t n = weights.size();
  std::vector<double> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    if (u <= 0.0) u = 1e-300;
    const double w = std::max(weights[i], 1e-300);
    keys[i] = std::log(u) / w;
  }
  keys[forced_index] = 1.0;  // above every log(u)/w, which is negative

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count - 1),
                   order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  order.resize(count);
  return order;
}

}  // namespace

SamplingMask make_mask(MaskKind kind, int h, int w, double ratio, double sigma_fraction,
                       std::uint64_t seed) {
  if (h < 2 || w < 2) throw InvalidArgument("make_mask: grid must be at least 2x2");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("make_mask: ratio must be in (0,1]");
  if (!(sigma_fraction > 0.0)) throw InvalidArgument("make_mask: sigma_fraction must be > 0");

  SamplingMask mask;
  mask.h = h;
  mask.w = w;
  mask.kind = kind;
  mask.target_ratio = ratio;
  mask.sigma_fraction = sigma_fraction;
  mask.seed = seed;
  mask.bits.assign(static_cast<std::size_t>(h) * w, 0);

  Rng rng(mix_seed(seed, 0xC5A11u, static_cast<std::uint64_t>(kind)));
  const int ci = h / 2, cj = w / 2;

  if (kind == MaskKind::gaussian2d) {
    const auto target = static_cast<std::int64_t>(std::llround(ratio * h * w));
    if (target < 1)
      throw InvalidArgument("make_mask: ratio too small to include the DC sample");
    const double sig_i = sigma_fraction * (h / 2.0);
    const double sig_j = sigma_fraction * (w / 2.0);
    std::vector<double> weights(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        const double di = (i - ci) / sig_i, dj = (j - cj) / sig_j;
        weights[static_cast<std::size_t>(i) * w + j] = std::exp(-0.5 * (di * di + dj * dj));
      }
    const auto chosen = weighted_sample(weights, static_cast<std::size_t>(target),
                                        static_cast<std::size_t>(ci) * w + cj, rng);
    for (auto idx : chosen) mask.bits[idx] = 1;
  } else {
    const auto lines = static_cast<std::int64_t>(std::llround(ratio * w));
    if (lines < 1) throw InvalidArgument("make_mask: ratio too small to include the DC line");
    const double sig = sigma_fraction * (w / 2.0);
    std::vector<double> weights(static_cast<std::size_t>(w));
    for (int j = 0; j < w; ++j) {
      const double dj = (j - cj) / sig;
      weights[static_cast<std::size_t>(j)] = std::exp(-0.5 * dj * dj);
    }
    const auto chosen = weighted_sample(weights, static_cast<std::size_t>(lines),
                                        static_cast<std::size_t>(cj), rng);
    for (auto j : chosen)
      for (int i = 0; i < h; ++i) mask.bits[static_cast<std::size_t>(i) * w + j] = 1;
  }
  return mask;
}

void save_mask_csm1(const std::string& path, const SamplingMask& mask) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os.write("CSM1", 4);
  binio::write_le<std::uint8_t>(os, 1);
  binio::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(mask.kind));
  binio::write_le<std::uint16_t>(os, 0);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(mask.h));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(mask.w));
  binio::write_le<double>(os, mask.target_ratio);
  binio::write_le<double>(os, mask.sigma_fraction);
  binio::write_le<std::uint64_t>(os, mask.seed);
  const std::size_t nbits = mask.bits.size();
  std::vector<std::uint8_t> packed((nbits + 7) / 8, 0);
  for (std::size_t i = 0; i < nbits; ++i)
    if (mask.bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  binio::write_bytes(os, packed.data(), packed.size());
  if (!os) throw FormatError("write failed: " + path);
}

SamplingMask load_mask_csm1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path);
  char magic[4];
  binio::read_bytes(is, magic, 4, "CSM1 magic");
  if (std::string(magic, 4) != "CSM1") throw FormatError("not a CSM1 file: " + path);
  const auto version = binio::read_le<std::uint8_t>(is, "version");
  if (version != 1)
    throw FormatError("unsupported CSM1 version " + std::to_string(version) +
                      " (supported: 1)");
  SamplingMask mask;
  const auto kind = binio::read_le<std::uint8_t>(is, "kind");
  if (kind > 1) throw FormatError("bad CSM1 kind byte");
  mask.kind = static_cast<MaskKind>(kind);
  binio::read_le<std::uint16_t>(is, "reserved");
  mask.h = static_cast<int>(binio::read_le<std::uint32_t>(is, "H"));
  mask.w = static_cast<int>(binio::read_le<std::uint32_t>(is, "W"));
  if (mask.h <= 0 || mask.w <= 0) throw FormatError("bad CSM1 dimensions");
  mask.target_ratio = binio::read_le<double>(is, "ratio");
  mask.sigma_fraction = binio::read_le<double>(is, "sigma_fraction");
  mask.seed = binio::read_le<std::uint64_t>(is, "seed");
  const std::size_t nbits = static_cast<std::size_t>(mask.h) * mask.w;
  std::vector<std::uint8_t> packed((nbits + 7) / 8);
  binio::read_bytes(is, packed.data(), packed.size(), "mask bits");
  mask.bits.assign(nbits, 0);
  for (std::size_t i = 0; i < nbits; ++i)
    mask.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return mask;
}

}  // namespace dealias
