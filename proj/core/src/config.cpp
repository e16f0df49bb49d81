#include "dealias/config.hpp"

#include <fstream>
#include <sstream>

#include "dealias/errors.hpp"

namespace dealias {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_text(ss.str());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config: line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InvalidArgument("config: empty key on line " + std::to_string(lineno));
    cfg.kv_[key] = value;
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  consumed_[key] = true;
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  consumed_[key] = true;
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("config: key " + key + " is not a number: " + it->second);
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  consumed_[key] = true;
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw InvalidArgument("config: key " + key + " is not an integer: " + it->second);
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  consumed_[key] = true;
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("config: key " + key + " is not an unsigned integer: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  consumed_[key] = true;
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw InvalidArgument("config: key " + key + " is not a boolean: " + it->second);
}

std::vector<std::string> KeyValueConfig::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : kv_)
    if (!consumed_.count(key)) out.push_back(key);
  return out;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : kv_) out += key + " = " + value + "\n";
  return out;
}

DataConfig data_config_from(const KeyValueConfig& kv) {
  DataConfig cfg;
  cfg.source = kv.get_string("data.source", cfg.source);
  if (cfg.source != "phantom" && cfg.source != "directory")
    throw InvalidArgument("config: data.source must be phantom or directory");
  cfg.dir = kv.get_string("data.dir", cfg.dir);
  cfg.count = kv.get_int("data.count", cfg.count);
  cfg.height = kv.get_int("data.height", cfg.height);
  cfg.width = kv.get_int("data.width", cfg.width);
  cfg.seed = kv.get_u64("data.seed", cfg.seed);
  return cfg;
}

MaskSpec mask_spec_from(const KeyValueConfig& kv) {
  MaskSpec spec;
  spec.kind = mask_kind_from_name(kv.get_string("mask.kind", mask_kind_name(spec.kind)));
  spec.ratio = kv.get_double("mask.ratio", spec.ratio);
  spec.sigma_fraction = kv.get_double("mask.sigma_fraction", spec.sigma_fraction);
  spec.seed = kv.get_u64("mask.seed", spec.seed);
  return spec;
}

TrainConfig train_config_from(const KeyValueConfig& kv) {
  TrainConfig cfg;
  cfg.variant = variant_from_name(kv.get_string("train.variant", variant_name(cfg.variant)));
  cfg.epochs = kv.get_int("train.epochs", cfg.epochs);
  cfg.batch_size = kv.get_int("train.batch_size", cfg.batch_size);
  cfg.lr = kv.get_double("train.lr", cfg.lr);
  cfg.lr_halve_every = kv.get_int("train.lr_halve_every", cfg.lr_halve_every);
  cfg.early_stop_patience = kv.get_int("train.early_stop_patience", cfg.early_stop_patience);
  cfg.seed = kv.get_u64("train.seed", cfg.seed);
  cfg.d_steps_per_g_step = kv.get_int("train.d_steps", cfg.d_steps_per_g_step);
  cfg.val_fraction = kv.get_double("train.val_fraction", cfg.val_fraction);
  cfg.adam_beta1 = kv.get_double("train.beta1", cfg.adam_beta1);
  cfg.adam_beta2 = kv.get_double("train.beta2", cfg.adam_beta2);
  cfg.adam_eps = kv.get_double("train.adam_eps", cfg.adam_eps);
  cfg.mask = mask_spec_from(kv);

  cfg.weights.alpha = kv.get_double("loss.alpha", cfg.weights.alpha);
  cfg.weights.beta = kv.get_double("loss.beta", cfg.weights.beta);
  const std::string adv = kv.get_string("loss.adv_variant", "non-saturating");
  if (adv == "non-saturating")
    cfg.weights.adversarial_variant = nn::AdvVariant::non_saturating;
  else if (adv == "saturating")
    cfg.weights.adversarial_variant = nn::AdvVariant::saturating;
  else
    throw InvalidArgument("config: loss.adv_variant must be saturating or non-saturating");

  cfg.gen.depth = kv.get_int("model.gen_depth", cfg.gen.depth);
  cfg.gen.base_channels = kv.get_int("model.gen_base", cfg.gen.base_channels);
  cfg.disc.depth = kv.get_int("model.disc_depth", cfg.disc.depth);
  cfg.disc.base_channels = kv.get_int("model.disc_base", cfg.disc.base_channels);
  cfg.percep.num_blocks = kv.get_int("model.percep_blocks", cfg.percep.num_blocks);
  cfg.percep.base_channels = kv.get_int("model.percep_base", cfg.percep.base_channels);
  cfg.percep.seed = kv.get_u64("model.percep_seed", cfg.percep.seed);
  cfg.percep.weights_file = kv.get_string("model.percep_weights", cfg.percep.weights_file);

  cfg.augment_enabled = kv.get_bool("aug.enabled", cfg.augment_enabled);
  AugmentSpec def = AugmentSpec::defaults();
  cfg.aug.flip_h = kv.get_double("aug.flip_h", def.flip_h);
  cfg.aug.flip_v = kv.get_double("aug.flip_v", def.flip_v);
  cfg.aug.rotate_deg_max = kv.get_double("aug.rotate_deg_max", def.rotate_deg_max);
  cfg.aug.shift_px_max = kv.get_int("aug.shift_px_max", def.shift_px_max);
  cfg.aug.brightness_delta_max =
      kv.get_double("aug.brightness_delta_max", def.brightness_delta_max);
  cfg.aug.zoom_lo = kv.get_double("aug.zoom_lo", def.zoom_lo);
  cfg.aug.zoom_hi = kv.get_double("aug.zoom_hi", def.zoom_hi);
  cfg.aug.elastic_alpha = kv.get_double("aug.elastic_alpha", def.elastic_alpha);
  cfg.aug.elastic_sigma = kv.get_double("aug.elastic_sigma", def.elastic_sigma);
  cfg.aug.elastic_prob = kv.get_double("aug.elastic_prob", def.elastic_prob);

  apply_variant_rules(cfg);
  return cfg;
}

EvalConfig eval_config_from(const KeyValueConfig& kv) {
  EvalConfig cfg;
  cfg.profile_row = kv.get_int("eval.row", cfg.profile_row);
  cfg.diff_gain = kv.get_double("eval.gain", cfg.diff_gain);
  cfg.write_pngs = kv.get_bool("eval.write_pngs", cfg.write_pngs);
  return cfg;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string resolved_config_text(const DataConfig& data, const TrainConfig& train_in) {
  TrainConfig train = train_in;
  apply_variant_rules(train);
  KeyValueConfig kv;
  kv.set("data.source", data.source);
  kv.set("data.dir", data.dir);
  kv.set("data.count", std::to_string(data.count));
  kv.set("data.height", std::to_string(data.height));
  kv.set("data.width", std::to_string(data.width));
  kv.set("data.seed", std::to_string(data.seed));

  kv.set("mask.kind", mask_kind_name(train.mask.kind));
  kv.set("mask.ratio", fmt_double(train.mask.ratio));
  kv.set("mask.sigma_fraction", fmt_double(train.mask.sigma_fraction));
  kv.set("mask.seed", std::to_string(train.mask.seed));

  kv.set("train.variant", variant_name(train.variant));
  kv.set("train.epochs", std::to_string(train.epochs));
  kv.set("train.batch_size", std::to_string(train.batch_size));
  kv.set("train.lr", fmt_double(train.lr));
  kv.set("train.lr_halve_every", std::to_string(train.lr_halve_every));
  kv.set("train.early_stop_patience", std::to_string(train.early_stop_patience));
  kv.set("train.seed", std::to_string(train.seed));
  kv.set("train.d_steps", std::to_string(train.d_steps_per_g_step));
  kv.set("train.val_fraction", fmt_double(train.val_fraction));
  kv.set("train.beta1", fmt_double(train.adam_beta1));
  kv.set("train.beta2", fmt_double(train.adam_beta2));
  kv.set("train.adam_eps", fmt_double(train.adam_eps));

  kv.set("loss.alpha", fmt_double(train.weights.alpha));
  kv.set("loss.beta", fmt_double(train.weights.beta));
  kv.set("loss.adv_variant",
         train.weights.adversarial_variant == nn::AdvVariant::saturating ? "saturating"
                                                                         : "non-saturating");

  kv.set("model.gen_depth", std::to_string(train.gen.depth));
  kv.set("model.gen_base", std::to_string(train.gen.base_channels));
  kv.set("model.use_refinement", train.gen.use_refinement ? "true" : "false");
  kv.set("model.disc_depth", std::to_string(train.disc.depth));
  kv.set("model.disc_base", std::to_string(train.disc.base_channels));
  kv.set("model.percep_blocks", std::to_string(train.percep.num_blocks));
  kv.set("model.percep_base", std::to_string(train.percep.base_channels));
  kv.set("model.percep_seed", std::to_string(train.percep.seed));
  kv.set("model.percep_weights", train.percep.weights_file);

  kv.set("aug.enabled", train.augment_enabled ? "true" : "false");
  kv.set("aug.flip_h", fmt_double(train.aug.flip_h));
  kv.set("aug.flip_v", fmt_double(train.aug.flip_v));
  kv.set("aug.rotate_deg_max", fmt_double(train.aug.rotate_deg_max));
  kv.set("aug.shift_px_max", std::to_string(train.aug.shift_px_max));
  kv.set("aug.brightness_delta_max", fmt_double(train.aug.brightness_delta_max));
  kv.set("aug.zoom_lo", fmt_double(train.aug.zoom_lo));
  kv.set("aug.zoom_hi", fmt_double(train.aug.zoom_hi));
  kv.set("aug.elastic_alpha", fmt_double(train.aug.elastic_alpha));
  kv.set("aug.elastic_sigma", fmt_double(train.aug.elastic_sigma));
  kv.set("aug.elastic_prob", fmt_double(train.aug.elastic_prob));
  return kv.serialize();
}

std::uint64_t train_config_hash(const DataConfig& data, const TrainConfig& train) {
  return fnv1a64(resolved_config_text(data, train));
}

Dataset load_dataset(const DataConfig& cfg) {
  if (cfg.source == "phantom")
    return make_phantom_dataset(cfg.count, cfg.height, cfg.width, cfg.seed);
  return load_directory(cfg.dir, cfg.height, cfg.width);
}

}  // namespace dealias
