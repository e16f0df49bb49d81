#include "dealias/models.hpp"

#include <cmath>

#include "dealias/checkpoint.hpp"
#include "dealias/optim.hpp"

namespace dealias::nn {

namespace {

constexpr double kInitStd = 0.02;  // DCGAN-style init
constexpr float kLeakySlope = 0.2f;

template <typename T>
VarT<T> make_param(std::vector<NamedParamT<T>>& params, const std::string& name,
                   TensorT<T> value) {
  auto var = VarT<T>::leaf(std::move(value), /*requires_grad=*/true);
  params.push_back({name, var});
  return var;
}

template <typename T>
void check_image_batch(const TensorT<T>& x, int h, int w, const char* who) {
  if (x.ndim() != 4 || x.dim(1) != 1 || x.dim(2) != h || x.dim(3) != w)
    throw InvalidArgument(std::string(who) + ": expected N x 1 x " + std::to_string(h) + " x " +
                          std::to_string(w) + " input");
}

template <typename T>
std::int64_t count_params(const std::vector<NamedParamT<T>>& params) {
  std::int64_t n = 0;
  for (const auto& p : params) n += p.var.value().numel();
  return n;
}

template <typename T>
VarT<T> find_in(const std::vector<NamedParamT<T>>& params, const std::string& name,
                const char* who) {
  for (const auto& p : params)
    if (p.name == name) return p.var;
  throw InvalidArgument(std::string(who) + ": no parameter named " + name);
}

}  // namespace

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

template <typename T>
int GeneratorT<T>::channels(int level) const {
  const std::int64_t c = static_cast<std::int64_t>(cfg_.base_channels) << level;
  return static_cast<int>(std::min<std::int64_t>(c, 8 * cfg_.base_channels));
}

template <typename T>
GeneratorT<T>::GeneratorT(const GeneratorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.depth < 2) throw InvalidArgument("generator: depth must be >= 2");
  const int div = 1 << cfg.depth;
  if (cfg.height % div != 0 || cfg.width % div != 0)
    throw InvalidArgument("generator: H and W must be divisible by 2^depth");

  Rng rng(mix_seed(seed, 0x6E6E01u));
  auto conv_w = [&](int cout, int cin, int k) {
    return normal_tensor<T>({cout, cin, k, k}, T(0), T(kInitStd), rng);
  };

  for (int i = 0; i < cfg.depth; ++i) {
    const int cin = i == 0 ? 1 : channels(i - 1);
    const int cout = channels(i);
    const std::string b = "enc" + std::to_string(i);
    enc_at_.push_back(static_cast<int>(params_.size()));
    make_param(params_, b + ".conv.w", conv_w(cout, cin, 4));
    make_param(params_, b + ".conv.b", TensorT<T>::zeros({cout}));
    make_param(params_, b + ".bn.gamma", normal_tensor<T>({cout}, T(1), T(kInitStd), rng));
    make_param(params_, b + ".bn.beta", TensorT<T>::zeros({cout}));
    enc_bn_.push_back(BatchNormStateT<T>::init(cout));
  }
  for (int j = cfg.depth - 1; j >= 0; --j) {
    const int cin = (j == cfg.depth - 1) ? channels(j) : 2 * channels(j);
    const int cout = j >= 1 ? channels(j - 1) : channels(0);
    const std::string b = "dec" + std::to_string(j);
    dec_at_.push_back(static_cast<int>(params_.size()));
    // transpose-conv weight layout: Cin x Cout x kh x kw
    make_param(params_, b + ".deconv.w",
               normal_tensor<T>({cin, cout, 4, 4}, T(0), T(kInitStd), rng));
    make_param(params_, b + ".deconv.b", TensorT<T>::zeros({cout}));
    make_param(params_, b + ".bn.gamma", normal_tensor<T>({cout}, T(1), T(kInitStd), rng));
    make_param(params_, b + ".bn.beta", TensorT<T>::zeros({cout}));
    dec_bn_.push_back(BatchNormStateT<T>::init(cout));
  }
  final_at_ = static_cast<int>(params_.size());
  make_param(params_, "final.conv.w", conv_w(1, channels(0), 3));
  make_param(params_, "final.conv.b", TensorT<T>::zeros({1}));
}

template <typename T>
VarT<T> GeneratorT<T>::forward(const VarT<T>& x_u, bool training) {
  const TensorT<T>& x = x_u.value();
  check_image_batch(x, cfg_.height, cfg_.width, "generator");
  for (std::int64_t i = 0; i < x.numel(); ++i)
    if (x[i] < T(-1) - T(1e-6) || x[i] > T(1) + T(1e-6))
      throw InvalidArgument("generator: input values outside [-1,1]");

  std::vector<VarT<T>> skips;
  VarT<T> h = x_u;
  for (int i = 0; i < cfg_.depth; ++i) {
    const int at = enc_at_[static_cast<std::size_t>(i)];
    h = conv2d(h, p(at), p(at + 1), 2, 1);
    h = batch_norm(h, p(at + 2), p(at + 3), enc_bn_[static_cast<std::size_t>(i)], training);
    h = leaky_relu(h, T(kLeakySlope));
    skips.push_back(h);
  }
  for (int j = cfg_.depth - 1; j >= 0; --j) {
    const std::size_t d = static_cast<std::size_t>(cfg_.depth - 1 - j);
    const int at = dec_at_[d];
    h = conv2d_transpose(h, p(at), p(at + 1), 2, 1);
    h = batch_norm(h, p(at + 2), p(at + 3), dec_bn_[d], training);
    h = relu(h);
    if (j >= 1) h = concat_channels(h, skips[static_cast<std::size_t>(j - 1)]);
  }
  VarT<T> r = nn::tanh(conv2d(h, p(final_at_), p(final_at_ + 1), 1, 1));
  if (!cfg_.use_refinement) return r;
  return nn::clamp(add(r, x_u), T(-1), T(1));
}

template <typename T>
std::vector<VarT<T>> GeneratorT<T>::param_vars() const {
  std::vector<VarT<T>> out;
  out.reserve(params_.size());
  for (const auto& np : params_) out.push_back(np.var);
  return out;
}

template <typename T>
VarT<T> GeneratorT<T>::find_param(const std::string& name) const {
  return find_in(params_, name, "generator");
}

template <typename T>
std::vector<std::pair<std::string, TensorT<T>*>> GeneratorT<T>::state_tensors() {
  std::vector<std::pair<std::string, TensorT<T>*>> out;
  for (int i = 0; i < cfg_.depth; ++i) {
    const std::string b = "enc" + std::to_string(i);
    out.push_back({b + ".bn.mean", &enc_bn_[static_cast<std::size_t>(i)].running_mean});
    out.push_back({b + ".bn.var", &enc_bn_[static_cast<std::size_t>(i)].running_var});
  }
  for (int j = cfg_.depth - 1; j >= 0; --j) {
    const std::size_t d = static_cast<std::size_t>(cfg_.depth - 1 - j);
    const std::string b = "dec" + std::to_string(j);
    out.push_back({b + ".bn.mean", &dec_bn_[d].running_mean});
    out.push_back({b + ".bn.var", &dec_bn_[d].running_var});
  }
  return out;
}

template <typename T>
std::int64_t GeneratorT<T>::parameter_count() const {
  return count_params(params_);
}

// ---------------------------------------------------------------------------
// Discriminator
// ---------------------------------------------------------------------------

template <typename T>
int DiscriminatorT<T>::channels(int level) const {
  const std::int64_t c = static_cast<std::int64_t>(cfg_.base_channels) << level;
  return static_cast<int>(std::min<std::int64_t>(c, 8 * cfg_.base_channels));
}

template <typename T>
DiscriminatorT<T>::DiscriminatorT(const DiscriminatorConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  if (cfg.depth < 2) throw InvalidArgument("discriminator: depth must be >= 2");
  const int div = 1 << cfg.depth;
  if (cfg.height / div < 1 || cfg.width / div < 1 || cfg.height % div != 0 ||
      cfg.width % div != 0)
    throw InvalidArgument("discriminator: final feature map would be empty");

  Rng rng(mix_seed(seed, 0x6E6E02u));
  for (int i = 0; i < cfg.depth; ++i) {
    const int cin = i == 0 ? 1 : channels(i - 1);
    const int cout = channels(i);
    const std::string b = "blk" + std::to_string(i);
    blk_at_.push_back(static_cast<int>(params_.size()));
    make_param(params_, b + ".conv.w", normal_tensor<T>({cout, cin, 4, 4}, T(0), T(kInitStd), rng));
    make_param(params_, b + ".conv.b", TensorT<T>::zeros({cout}));
    if (i > 0) {
      make_param(params_, b + ".bn.gamma", normal_tensor<T>({cout}, T(1), T(kInitStd), rng));
      make_param(params_, b + ".bn.beta", TensorT<T>::zeros({cout}));
      bn_.push_back(BatchNormStateT<T>::init(cout));
    }
  }
  const std::int64_t feat = static_cast<std::int64_t>(channels(cfg.depth - 1)) *
                            (cfg.height / div) * (cfg.width / div);
  head_at_ = static_cast<int>(params_.size());
  make_param(params_, "head.w", normal_tensor<T>({feat, 1}, T(0), T(kInitStd), rng));
  make_param(params_, "head.b", TensorT<T>::zeros({1}));
}

template <typename T>
VarT<T> DiscriminatorT<T>::forward(const VarT<T>& img, bool training) {
  const TensorT<T>& x = img.value();
  check_image_batch(x, cfg_.height, cfg_.width, "discriminator");

  VarT<T> h = img;
  std::size_t bn_idx = 0;
  for (int i = 0; i < cfg_.depth; ++i) {
    const int at = blk_at_[static_cast<std::size_t>(i)];
    h = conv2d(h, params_[static_cast<std::size_t>(at)].var,
               params_[static_cast<std::size_t>(at + 1)].var, 2, 1);
    if (i > 0) {
      h = batch_norm(h, params_[static_cast<std::size_t>(at + 2)].var,
                     params_[static_cast<std::size_t>(at + 3)].var, bn_[bn_idx], training);
      ++bn_idx;
    }
    h = leaky_relu(h, T(kLeakySlope));
  }
  const std::int64_t n = h.value().dim(0);
  h = reshape(h, {n, h.value().numel() / n});
  h = dense(h, params_[static_cast<std::size_t>(head_at_)].var,
            params_[static_cast<std::size_t>(head_at_ + 1)].var);
  return nn::sigmoid(h);
}

template <typename T>
std::vector<VarT<T>> DiscriminatorT<T>::param_vars() const {
  std::vector<VarT<T>> out;
  out.reserve(params_.size());
  for (const auto& np : params_) out.push_back(np.var);
  return out;
}

template <typename T>
VarT<T> DiscriminatorT<T>::find_param(const std::string& name) const {
  return find_in(params_, name, "discriminator");
}

template <typename T>
std::vector<std::pair<std::string, TensorT<T>*>> DiscriminatorT<T>::state_tensors() {
  std::vector<std::pair<std::string, TensorT<T>*>> out;
  for (int i = 1; i < cfg_.depth; ++i) {
    const std::string b = "blk" + std::to_string(i);
    out.push_back({b + ".bn.mean", &bn_[static_cast<std::size_t>(i - 1)].running_mean});
    out.push_back({b + ".bn.var", &bn_[static_cast<std::size_t>(i - 1)].running_var});
  }
  return out;
}

template <typename T>
std::int64_t DiscriminatorT<T>::parameter_count() const {
  return count_params(params_);
}

// ---------------------------------------------------------------------------
// Perceptual encoder
// ---------------------------------------------------------------------------

template <typename T>
PerceptualEncoderT<T>::PerceptualEncoderT(const PerceptualEncoderConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  if (cfg.num_blocks < 1) throw InvalidArgument("perceptual encoder: needs at least 1 block");
  const int div = 1 << cfg.num_blocks;
  if (cfg.height % div != 0 || cfg.width % div != 0)
    throw InvalidArgument("perceptual encoder: H and W must be divisible by 2^num_blocks");

  Rng rng(mix_seed(seed, 0x6E6E03u));
  Checkpoint external;
  if (!cfg.weights_file.empty()) external = load_checkpoint(cfg.weights_file);

  for (int i = 0; i < cfg.num_blocks; ++i) {
    const int cin = i == 0 ? 1 : cfg.base_channels << (i - 1);
    const int cout = cfg.base_channels << i;
    const std::string wn = "blk" + std::to_string(i) + ".w";
    const std::string bn = "blk" + std::to_string(i) + ".b";
    TensorT<T> w, b;
    if (!cfg.weights_file.empty()) {
      const NamedArray* wa = external.find(wn);
      const NamedArray* ba = external.find(bn);
      if (!wa || !ba)
        throw FormatError("perceptual weights file lacks array " + (wa ? bn : wn));
      w = TensorT<T>::zeros({cout, cin, 3, 3});
      b = TensorT<T>::zeros({cout});
      if (wa->numel() != w.numel() || ba->numel() != b.numel())
        throw FormatError("perceptual weights file has wrong array sizes");
      for (std::int64_t k = 0; k < w.numel(); ++k)
        w[k] = static_cast<T>(wa->dtype == ArrayDType::f32 ? wa->f32[static_cast<std::size_t>(k)]
                                                           : wa->f64[static_cast<std::size_t>(k)]);
      for (std::int64_t k = 0; k < b.numel(); ++k)
        b[k] = static_cast<T>(ba->dtype == ArrayDType::f32 ? ba->f32[static_cast<std::size_t>(k)]
                                                           : ba->f64[static_cast<std::size_t>(k)]);
    } else {
      const T he = static_cast<T>(std::sqrt(2.0 / (static_cast<double>(cin) * 9.0)));
      w = normal_tensor<T>({cout, cin, 3, 3}, T(0), he, rng);
      b = TensorT<T>::zeros({cout});
    }
    // frozen: constants never receive gradients
    params_.push_back({wn, VarT<T>::constant(std::move(w))});
    params_.push_back({bn, VarT<T>::constant(std::move(b))});
  }
}

template <typename T>
VarT<T> PerceptualEncoderT<T>::forward(const VarT<T>& img) {
  const TensorT<T>& x = img.value();
  check_image_batch(x, cfg_.height, cfg_.width, "perceptual encoder");
  VarT<T> h = img;
  for (int i = 0; i < cfg_.num_blocks; ++i) {
    h = conv2d(h, params_[static_cast<std::size_t>(2 * i)].var,
               params_[static_cast<std::size_t>(2 * i + 1)].var, 1, 1);
    h = relu(h);
    h = avg_pool2(h);
  }
  return h;
}

template <typename T>
std::int64_t PerceptualEncoderT<T>::parameter_count() const {
  return count_params(params_);
}

template class GeneratorT<float>;
template class GeneratorT<double>;
template class DiscriminatorT<float>;
template class DiscriminatorT<double>;
template class PerceptualEncoderT<float>;
template class PerceptualEncoderT<double>;

}  // namespace dealias::nn
