#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dealias {

enum class MaskKind : std::uint8_t { gaussian1d = 0, gaussian2d = 1 };

const char* mask_kind_name(MaskKind k);
MaskKind mask_kind_from_name(const std::string& name);

// Binary k-space sampling pattern. gaussian2d draws individual locations,
// gaussian1d draws whole phase-encode lines (columns), both with density
// proportional to exp(-d^2 / (2 sigma^2)) around the k-space center and the
// DC location/line always included. The sampled count is exact:
//   gaussian2d: round(ratio * H * W)      gaussian1d: round(ratio * W) lines.
struct SamplingMask {
  int h = 0;
  int w = 0;
  MaskKind kind = MaskKind::gaussian2d;
  double target_ratio = 0.0;
  double sigma_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0/1

  bool at(int i, int j) const { return bits[static_cast<std::size_t>(i) * w + j] != 0; }
  std::int64_t popcount() const;
  double achieved_ratio() const;
};

// Weighted sampling without replacement with the exact target count;
// deterministic per seed. sigma = sigma_fraction * (half-extent of the
// relevant axis). Throws InvalidArgument for ratio outside (0,1] or a ratio
// too small to include the mandatory DC sample(s).
SamplingMask make_mask(MaskKind kind, int h, int w, double ratio, double sigma_fraction,
                       std::uint64_t seed);

// "CSM1" container: magic, u8 version, u8 kind, u16 reserved, u32 H, u32 W,
// f64 ratio, f64 sigma_fraction, u64 seed, then ceil(H*W/8) bytes of
// row-major bit-packed mask (LSB first). Little-endian throughout.
void save_mask_csm1(const std::string& path, const SamplingMask& mask);
SamplingMask load_mask_csm1(const std::string& path);

}  // namespace dealias
