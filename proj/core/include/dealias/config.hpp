#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dealias/training.hpp"

namespace dealias {

// Plain-text "key = value" store ('#' starts a comment). Keys are flat
// dotted names; command-line overrides land here before parsing. Typed reads
// mark keys consumed so leftovers can be rejected as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys present in the store but never read by any getter.
  std::vector<std::string> unconsumed() const;

  std::string serialize() const;  // sorted "key = value" lines

 private:
  std::map<std::string, std::string> kv_;
  mutable std::map<std::string, bool> consumed_;
};

struct DataConfig {
  std::string source = "phantom";  // phantom | directory
  std::string dir;
  int count = 200;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 42;
};

struct EvalConfig {
  int profile_row = -1;  // -1: middle row
  double diff_gain = 10.0;
  bool write_pngs = true;
};

DataConfig data_config_from(const KeyValueConfig& kv);
MaskSpec mask_spec_from(const KeyValueConfig& kv);
TrainConfig train_config_from(const KeyValueConfig& kv);
EvalConfig eval_config_from(const KeyValueConfig& kv);

// Full resolved text (every key explicit, sorted) and its hash. The hash
// pins a checkpoint to the configuration that produced it.
std::string resolved_config_text(const DataConfig& data, const TrainConfig& train);
std::uint64_t train_config_hash(const DataConfig& data, const TrainConfig& train);

Dataset load_dataset(const DataConfig& cfg);

}  // namespace dealias
