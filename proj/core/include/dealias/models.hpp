#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dealias/layers.hpp"

namespace dealias::nn {

struct GeneratorConfig {
  int depth = 4;           // number of stride-2 encoder/decoder levels
  int base_channels = 64;  // channels double per level, capped at 8x base
  int height = 64;
  int width = 64;
  bool use_refinement = true;  // output = clamp(G(x) + x) instead of G(x)
};

struct DiscriminatorConfig {
  int depth = 3;
  int base_channels = 64;
  int height = 64;
  int width = 64;
};

struct PerceptualEncoderConfig {
  int num_blocks = 4;
  int base_channels = 32;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 1;
  std::string weights_file;  // optional DLCK file overriding the seeded init
};

template <typename T>
struct NamedParamT {
  std::string name;
  VarT<T> var;
};

// U-Net encoder/decoder with mirrored skip concatenations. Encoder blocks:
// conv(k4,s2,p1) -> BN -> leakyReLU(0.2); decoder blocks: deconv(k4,s2,p1)
// -> BN -> ReLU; final conv(k3,s1,p1) to one channel followed by tanh. With
// use_refinement the tanh residual is added to the input and clamped back to
// [-1,1] (the range-restoring ramp).
template <typename T>
class GeneratorT {
 public:
  GeneratorT(const GeneratorConfig& cfg, std::uint64_t seed);

  // x_u must be N x 1 x H x W with values in [-1,1] (1e-6 slack).
  VarT<T> forward(const VarT<T>& x_u, bool training);

  const GeneratorConfig& config() const { return cfg_; }
  std::vector<NamedParamT<T>>& params() { return params_; }
  std::vector<VarT<T>> param_vars() const;
  VarT<T> find_param(const std::string& name) const;
  // BN running statistics, named for checkpointing.
  std::vector<std::pair<std::string, TensorT<T>*>> state_tensors();
  std::int64_t parameter_count() const;

 private:
  VarT<T> p(int idx) const { return params_[static_cast<std::size_t>(idx)].var; }
  int channels(int level) const;

  GeneratorConfig cfg_;
  std::vector<NamedParamT<T>> params_;
  std::vector<BatchNormStateT<T>> enc_bn_;
  std::vector<BatchNormStateT<T>> dec_bn_;
  // index of the first parameter of each block inside params_
  std::vector<int> enc_at_, dec_at_;
  int final_at_ = 0;
};

// Stride-2 conv stack (first block without BN), flatten, dense head to one
// logit, sigmoid.
template <typename T>
class DiscriminatorT {
 public:
  DiscriminatorT(const DiscriminatorConfig& cfg, std::uint64_t seed);

  // Returns N x 1 probabilities in (0,1).
  VarT<T> forward(const VarT<T>& img, bool training);

  const DiscriminatorConfig& config() const { return cfg_; }
  std::vector<NamedParamT<T>>& params() { return params_; }
  std::vector<VarT<T>> param_vars() const;
  VarT<T> find_param(const std::string& name) const;
  std::vector<std::pair<std::string, TensorT<T>*>> state_tensors();
  std::int64_t parameter_count() const;

 private:
  int channels(int level) const;

  DiscriminatorConfig cfg_;
  std::vector<NamedParamT<T>> params_;
  std::vector<BatchNormStateT<T>> bn_;
  std::vector<int> blk_at_;
  int head_at_ = 0;
};

// Fixed feature extractor standing in for a pretrained perceptual network:
// num_blocks of conv(k3,s1,p1) -> ReLU -> 2x2 average pool, channels doubling
// from base. Weights are seeded (He-scaled normals) or loaded from a DLCK
// file, and are never updated: gradients flow to the image argument only.
template <typename T>
class PerceptualEncoderT {
 public:
  PerceptualEncoderT(const PerceptualEncoderConfig& cfg, std::uint64_t seed);

  VarT<T> forward(const VarT<T>& img);

  const PerceptualEncoderConfig& config() const { return cfg_; }
  std::vector<NamedParamT<T>>& params() { return params_; }
  std::int64_t parameter_count() const;

 private:
  PerceptualEncoderConfig cfg_;
  std::vector<NamedParamT<T>> params_;  // constants (requires_grad = false)
};

using Generator = GeneratorT<float>;
using Discriminator = DiscriminatorT<float>;
using PerceptualEncoder = PerceptualEncoderT<float>;

extern template class GeneratorT<float>;
extern template class GeneratorT<double>;
extern template class DiscriminatorT<float>;
extern template class DiscriminatorT<double>;
extern template class PerceptualEncoderT<float>;
extern template class PerceptualEncoderT<double>;

}  // namespace dealias::nn
