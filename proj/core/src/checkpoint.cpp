#include "dealias/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "dealias/errors.hpp"
#include "binio.hpp"

namespace dealias {

namespace {

constexpr std::uint16_t kVersion = 1;

}  // namespace

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  std::ostringstream os(std::ios::binary);
  os.write("DLCK", 4);
  binio::write_le<std::uint16_t>(os, kVersion);
  binio::write_le<std::uint8_t>(os, ckpt.variant);
  binio::write_le<std::uint64_t>(os, ckpt.config_hash);
  binio::write_le<std::uint32_t>(os, ckpt.epoch);
  binio::write_le<double>(os, ckpt.val_psnr);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.name.size()));
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    binio::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(a.dtype));
    binio::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(a.shape.size()));
    for (auto d : a.shape) binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    if (a.dtype == ArrayDType::f32) {
      if (static_cast<std::int64_t>(a.f32.size()) != a.numel())
        throw InvalidArgument("checkpoint: array '" + a.name + "' payload/shape mismatch");
      for (float v : a.f32) binio::write_le<float>(os, v);
    } else {
      if (static_cast<std::int64_t>(a.f64.size()) != a.numel())
        throw InvalidArgument("checkpoint: array '" + a.name + "' payload/shape mismatch");
      for (double v : a.f64) binio::write_le<double>(os, v);
    }
  }
  const std::string body = os.str();
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  std::vector<std::uint8_t> bytes(body.begin(), body.end());
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((crc >> (8 * i)) & 0xFF));
  return bytes;
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8) throw FormatError("checkpoint: file too small");
  const std::size_t body_len = bytes.size() - 4;
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i)
    stored_crc |= static_cast<std::uint32_t>(bytes[body_len + static_cast<std::size_t>(i)])
                  << (8 * i);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(body_len)));

  std::istringstream is(std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(body_len)),
                        std::ios::binary);
  char magic[4];
  binio::read_bytes(is, magic, 4, "DLCK magic");
  if (std::string(magic, 4) != "DLCK") throw FormatError("not a DLCK checkpoint");
  const auto version = binio::read_le<std::uint16_t>(is, "version");
  if (version != kVersion)
    throw FormatError("unsupported DLCK version " + std::to_string(version) +
                      " (supported: " + std::to_string(kVersion) + ")");
  if (crc != stored_crc) throw CorruptionError("checkpoint: CRC mismatch");

  Checkpoint ckpt;
  ckpt.variant = binio::read_le<std::uint8_t>(is, "variant");
  ckpt.config_hash = binio::read_le<std::uint64_t>(is, "config hash");
  ckpt.epoch = binio::read_le<std::uint32_t>(is, "epoch");
  ckpt.val_psnr = binio::read_le<double>(is, "val psnr");
  const auto count = binio::read_le<std::uint32_t>(is, "array count");
  ckpt.arrays.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedArray a;
    const auto name_len = binio::read_le<std::uint32_t>(is, "name length");
    a.name.resize(name_len);
    binio::read_bytes(is, a.name.data(), name_len, "name");
    const auto dtype = binio::read_le<std::uint8_t>(is, "dtype");
    if (dtype > 1) throw FormatError("checkpoint: bad dtype byte");
    a.dtype = static_cast<ArrayDType>(dtype);
    const auto ndim = binio::read_le<std::uint8_t>(is, "ndim");
    a.shape.resize(ndim);
    for (auto& d : a.shape) d = binio::read_le<std::uint32_t>(is, "dim");
    const std::int64_t n = a.numel();
    if (a.dtype == ArrayDType::f32) {
      a.f32.resize(static_cast<std::size_t>(n));
      for (auto& v : a.f32) v = binio::read_le<float>(is, "payload");
    } else {
      a.f64.resize(static_cast<std::size_t>(n));
      for (auto& v : a.f64) v = binio::read_le<double>(is, "payload");
    }
    ckpt.arrays.push_back(std::move(a));
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dealias
