#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dealias {

enum class ArrayDType : std::uint8_t { f32 = 0, f64 = 1 };

struct NamedArray {
  std::string name;
  ArrayDType dtype = ArrayDType::f32;
  std::vector<std::int64_t> shape;
  std::vector<float> f32;
  std::vector<double> f64;

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (auto e : shape) n *= e;
    return shape.empty() ? 0 : n;
  }
};

// "DLCK" container: magic, u16 version, metadata (variant byte, config hash,
// epoch, validation PSNR), a count-prefixed array sequence (length-prefixed
// UTF-8 name, u8 dtype, u8 ndim, u32 dims, little-endian payload) and a
// trailing CRC-32 over everything before it.
struct Checkpoint {
  std::uint8_t variant = 0;
  std::uint64_t config_hash = 0;
  std::uint32_t epoch = 0;
  double val_psnr = 0.0;
  std::vector<NamedArray> arrays;

  const NamedArray* find(const std::string& name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a, used for config hashes.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace dealias
