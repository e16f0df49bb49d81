#include "dealias/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dealias/errors.hpp"
#include "dealias/metrics.hpp"
#include "dealias/rng.hpp"

namespace dealias {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::PG: return "PG";
    case Variant::PPG: return "PPG";
    case Variant::PPGR: return "PPGR";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "PG") return Variant::PG;
  if (name == "PPG") return Variant::PPG;
  if (name == "PPGR") return Variant::PPGR;
  throw InvalidArgument("unknown variant: " + name + " (expected PG, PPG or PPGR)");
}

SamplingMask make_mask(const MaskSpec& spec, int h, int w) {
  return make_mask(spec.kind, h, w, spec.ratio, spec.sigma_fraction, spec.seed);
}

void apply_variant_rules(TrainConfig& cfg) {
  if (cfg.variant == Variant::PG) cfg.weights.beta = 0.0;
  cfg.gen.use_refinement = (cfg.variant == Variant::PPGR);
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

namespace {

double tensor_mean(const nn::TensorF& t) {
  double s = 0;
  for (float v : t.data) s += v;
  return s / static_cast<double>(t.numel());
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, int h, int w)
    : cfg_([&] {
        apply_variant_rules(cfg);
        cfg.gen.height = cfg.disc.height = cfg.percep.height = h;
        cfg.gen.width = cfg.disc.width = cfg.percep.width = w;
        return cfg;
      }()),
      gen_(cfg_.gen, mix_seed(cfg_.seed, 0x47454Eu)),
      disc_(cfg_.disc, mix_seed(cfg_.seed, 0x44495Cu)),
      percep_(cfg_.percep, cfg_.percep.seed),
      opt_g_(gen_.param_vars(),
             nn::AdamConfig{cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps}),
      opt_d_(disc_.param_vars(),
             nn::AdamConfig{cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps}) {}

void Trainer::set_lr(double lr) {
  opt_g_.set_lr(lr);
  opt_d_.set_lr(lr);
}

StepMetrics Trainer::train_step(const nn::TensorF& x_u, const nn::TensorF& x_t) {
  if (x_u.shape != x_t.shape) throw InvalidArgument("train_step: batch shapes differ");
  if (x_u.dim(0) < 1) throw InvalidArgument("train_step: empty batch");
  const bool bn_train = !bn_frozen_;
  nn::VarF xu = nn::VarF::constant(x_u);
  nn::VarF xt = nn::VarF::constant(x_t);

  StepMetrics m;
  for (int k = 0; k < cfg_.d_steps_per_g_step; ++k) {
    nn::VarF fake = gen_.forward(xu, bn_train).detach();
    nn::VarF d_real = disc_.forward(xt, bn_train);
    nn::VarF d_fake = disc_.forward(fake, bn_train);
    nn::VarF d_loss = nn::discriminator_loss(d_real, d_fake);
    opt_d_.zero_grad();
    opt_g_.zero_grad();
    nn::backward(d_loss);
    opt_d_.step();
    m.d_loss = d_loss.value()[0];
    m.d_real_mean = tensor_mean(d_real.value());
    m.d_fake_mean = tensor_mean(d_fake.value());
  }

  nn::VarF x_hat = gen_.forward(xu, bn_train);
  nn::VarF d_fake2 = disc_.forward(x_hat, bn_train);
  auto terms = nn::generator_total_loss(x_hat, xt, d_fake2, cfg_.weights,
                                        cfg_.weights.beta != 0.0 ? &percep_ : nullptr);
  opt_g_.zero_grad();
  opt_d_.zero_grad();
  nn::backward(terms.total);
  opt_g_.step();

  m.g_adv = terms.adversarial;
  m.g_pixel = terms.pixel;
  m.g_perceptual = terms.perceptual;
  m.g_total = terms.total.value()[0];
  if (!std::isfinite(m.d_loss) || !std::isfinite(m.g_total))
    throw NumericFault("train_step: non-finite loss");
  return m;
}

Image Trainer::reconstruct(const Image& x_u) {
  nn::VarF in = nn::VarF::constant(image_to_batch(x_u));
  nn::VarF out = gen_.forward(in, /*training=*/false);
  return batch_to_image(out.value(), 0);
}

namespace {

NamedArray array_from(const std::string& name, const nn::TensorF& t) {
  NamedArray a;
  a.name = name;
  a.dtype = ArrayDType::f32;
  a.shape = t.shape;
  a.f32 = t.data;
  return a;
}

NamedArray scalar_array(const std::string& name, double v) {
  NamedArray a;
  a.name = name;
  a.dtype = ArrayDType::f64;
  a.shape = {1};
  a.f64 = {v};
  return a;
}

void load_into(const Checkpoint& ckpt, const std::string& name, nn::TensorF& t) {
  const NamedArray* a = ckpt.find(name);
  if (!a) throw FormatError("checkpoint lacks array " + name);
  if (a->dtype != ArrayDType::f32 || a->numel() != t.numel())
    throw FormatError("checkpoint array " + name + " has wrong dtype/size");
  std::copy(a->f32.begin(), a->f32.end(), t.data.begin());
}

double load_scalar(const Checkpoint& ckpt, const std::string& name) {
  const NamedArray* a = ckpt.find(name);
  if (!a || a->dtype != ArrayDType::f64 || a->numel() != 1)
    throw FormatError("checkpoint lacks scalar " + name);
  return a->f64[0];
}

}  // namespace

Checkpoint Trainer::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.variant = static_cast<std::uint8_t>(cfg_.variant);
  auto& self = const_cast<Trainer&>(*this);
  for (const auto& p : self.gen_.params())
    ckpt.arrays.push_back(array_from("g." + p.name, p.var.value()));
  for (const auto& [name, tensor] : self.gen_.state_tensors())
    ckpt.arrays.push_back(array_from("g." + name, *tensor));
  for (const auto& p : self.disc_.params())
    ckpt.arrays.push_back(array_from("d." + p.name, p.var.value()));
  for (const auto& [name, tensor] : self.disc_.state_tensors())
    ckpt.arrays.push_back(array_from("d." + name, *tensor));
  for (const auto& p : self.percep_.params())
    ckpt.arrays.push_back(array_from("p." + p.name, p.var.value()));

  const auto& gp = self.gen_.params();
  auto& gs = self.opt_g_.states();
  for (std::size_t i = 0; i < gp.size(); ++i) {
    ckpt.arrays.push_back(array_from("optg." + gp[i].name + ".m", gs[i].m));
    ckpt.arrays.push_back(array_from("optg." + gp[i].name + ".v", gs[i].v));
  }
  const auto& dp = self.disc_.params();
  auto& dst = self.opt_d_.states();
  for (std::size_t i = 0; i < dp.size(); ++i) {
    ckpt.arrays.push_back(array_from("optd." + dp[i].name + ".m", dst[i].m));
    ckpt.arrays.push_back(array_from("optd." + dp[i].name + ".v", dst[i].v));
  }
  ckpt.arrays.push_back(scalar_array("optg.t", gs.empty() ? 0.0 : static_cast<double>(gs[0].t)));
  ckpt.arrays.push_back(scalar_array("optd.t", dst.empty() ? 0.0 : static_cast<double>(dst[0].t)));
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  for (auto& p : gen_.params()) load_into(ckpt, "g." + p.name, p.var.value_mut());
  for (auto& [name, tensor] : gen_.state_tensors()) load_into(ckpt, "g." + name, *tensor);
  for (auto& p : disc_.params()) load_into(ckpt, "d." + p.name, p.var.value_mut());
  for (auto& [name, tensor] : disc_.state_tensors()) load_into(ckpt, "d." + name, *tensor);
  for (auto& p : percep_.params()) load_into(ckpt, "p." + p.name, p.var.value_mut());

  auto& gs = opt_g_.states();
  const auto& gp = gen_.params();
  for (std::size_t i = 0; i < gp.size(); ++i) {
    load_into(ckpt, "optg." + gp[i].name + ".m", gs[i].m);
    load_into(ckpt, "optg." + gp[i].name + ".v", gs[i].v);
  }
  auto& dst = opt_d_.states();
  const auto& dp = disc_.params();
  for (std::size_t i = 0; i < dp.size(); ++i) {
    load_into(ckpt, "optd." + dp[i].name + ".m", dst[i].m);
    load_into(ckpt, "optd." + dp[i].name + ".v", dst[i].v);
  }
  const auto gt = static_cast<std::int64_t>(load_scalar(ckpt, "optg.t"));
  for (auto& s : gs) s.t = gt;
  const auto dt = static_cast<std::int64_t>(load_scalar(ckpt, "optd.t"));
  for (auto& s : dst) s.t = dt;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kSplitTag = 0x5BA17u;
constexpr std::uint64_t kShuffleTag = 0x5F0FFu;
constexpr std::uint64_t kAugTag = 0xA06u;

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

}  // namespace

FitResult fit(const Dataset& ds, const TrainConfig& cfg_in) {
  if (ds.size() == 0) throw InvalidArgument("fit: empty dataset");
  TrainConfig cfg = cfg_in;
  apply_variant_rules(cfg);

  FitResult result;
  const int n = static_cast<int>(ds.size());
  {
    Rng rng(mix_seed(cfg.seed, kSplitTag));
    std::vector<int> idx = shuffled_indices(n, rng);
    int n_val = static_cast<int>(std::llround(cfg.val_fraction * n));
    n_val = std::clamp(n_val, n >= 2 && cfg.val_fraction > 0.0 ? 1 : 0, n - 1);
    result.train_indices.assign(idx.begin(), idx.end() - n_val);
    result.val_indices.assign(idx.end() - n_val, idx.end());
    std::sort(result.train_indices.begin(), result.train_indices.end());
    std::sort(result.val_indices.begin(), result.val_indices.end());
  }

  const SamplingMask mask = make_mask(cfg.mask, ds.h, ds.w);
  Trainer trainer(cfg, ds.h, ds.w);

  // Aliased inputs are fixed per run unless augmentation rebuilds the ground
  // truth every epoch.
  std::vector<Image> zf_cache;
  if (!cfg.augment_enabled) {
    zf_cache.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
      zf_cache[i] = simulate_zero_fill(ds.images[i], mask);
  }
  std::vector<Image> val_zf(result.val_indices.size());
  for (std::size_t i = 0; i < result.val_indices.size(); ++i) {
    const auto idx = static_cast<std::size_t>(result.val_indices[i]);
    val_zf[i] = cfg.augment_enabled ? simulate_zero_fill(ds.images[idx], mask) : zf_cache[idx];
  }

  if (cfg.epochs == 0) {
    result.final_checkpoint = trainer.to_checkpoint();
    result.best_checkpoint = result.final_checkpoint;
    return result;
  }

  double best_psnr = -std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
  std::int64_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr * std::pow(0.5, epoch / cfg.lr_halve_every);
    trainer.set_lr(lr);

    Rng shuffle_rng(mix_seed(cfg.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    std::vector<int> order(result.train_indices);
    {
      std::vector<int> perm =
          shuffled_indices(static_cast<int>(order.size()), shuffle_rng);
      std::vector<int> tmp(order.size());
      for (std::size_t i = 0; i < order.size(); ++i)
        tmp[i] = order[static_cast<std::size_t>(perm[i])];
      order.swap(tmp);
    }

    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t take =
          std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - at);
      std::vector<Image> xt_imgs(take);
      std::vector<Image> xu_imgs(take);
      for (std::size_t b = 0; b < take; ++b) {
        const int idx = order[at + b];
        if (cfg.augment_enabled) {
          const std::uint64_t key = mix_seed(mix_seed(cfg.seed, kAugTag),
                                             static_cast<std::uint64_t>(epoch),
                                             static_cast<std::uint64_t>(idx));
          xt_imgs[b] = augment(ds.images[static_cast<std::size_t>(idx)], cfg.aug, key);
          xu_imgs[b] = simulate_zero_fill(xt_imgs[b], mask);
        } else {
          xt_imgs[b] = ds.images[static_cast<std::size_t>(idx)];
          xu_imgs[b] = zf_cache[static_cast<std::size_t>(idx)];
        }
      }
      std::vector<const Image*> xt_ptrs, xu_ptrs;
      for (std::size_t b = 0; b < take; ++b) {
        xt_ptrs.push_back(&xt_imgs[b]);
        xu_ptrs.push_back(&xu_imgs[b]);
      }
      StepMetrics m;
      try {
        m = trainer.train_step(images_to_batch(xu_ptrs), images_to_batch(xt_ptrs));
      } catch (const NumericFault& e) {
        throw NumericFault(std::string(e.what()) + " at step " + std::to_string(step));
      }
      result.steps.push_back({step, epoch, lr, m});
      ++step;
    }

    if (!result.val_indices.empty()) {
      double sum_nmse = 0, sum_psnr = 0, sum_ssim = 0;
      for (std::size_t i = 0; i < result.val_indices.size(); ++i) {
        const Image& gt = ds.images[static_cast<std::size_t>(result.val_indices[i])];
        const Image recon = trainer.reconstruct(val_zf[i]);
        sum_nmse += nmse(recon, gt);
        sum_psnr += psnr(recon, gt);
        sum_ssim += ssim(recon, gt);
      }
      const double k = static_cast<double>(result.val_indices.size());
      EpochLogRow row{epoch, sum_nmse / k, sum_psnr / k, sum_ssim / k};
      result.epochs.push_back(row);

      if (row.psnr > best_psnr) {
        best_psnr = row.psnr;
        result.best_epoch = epoch;
        result.best_checkpoint = trainer.to_checkpoint();
        result.best_checkpoint.epoch = static_cast<std::uint32_t>(epoch + 1);
        result.best_checkpoint.val_psnr = row.psnr;
        epochs_since_improvement = 0;
      } else {
        ++epochs_since_improvement;
      }
      if (cfg.early_stop_patience > 0 && epochs_since_improvement >= cfg.early_stop_patience) {
        result.early_stopped = true;
        break;
      }
    }
  }

  result.best_val_psnr = best_psnr;
  if (cfg.early_stop_patience > 0 && result.best_epoch >= 0) {
    trainer.restore(result.best_checkpoint);
    result.final_checkpoint = trainer.to_checkpoint();
    result.final_checkpoint.epoch = result.best_checkpoint.epoch;
    result.final_checkpoint.val_psnr = result.best_checkpoint.val_psnr;
  } else {
    result.final_checkpoint = trainer.to_checkpoint();
    result.final_checkpoint.epoch =
        result.epochs.empty() ? static_cast<std::uint32_t>(cfg.epochs)
                              : static_cast<std::uint32_t>(result.epochs.back().epoch + 1);
    if (!result.epochs.empty()) result.final_checkpoint.val_psnr = result.epochs.back().psnr;
    if (result.best_epoch < 0) result.best_checkpoint = result.final_checkpoint;
  }
  return result;
}

// ---------------------------------------------------------------------------
// k-fold and convergence comparison
// ---------------------------------------------------------------------------

std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold_split(int n, int k,
                                                                       std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold_split: k must be >= 2");
  if (k > n) throw InvalidArgument("kfold_split: k exceeds dataset size");
  Rng rng(mix_seed(seed, 0xF01Du));
  std::vector<int> idx = shuffled_indices(n, rng);

  std::vector<std::pair<std::vector<int>, std::vector<int>>> folds;
  folds.reserve(static_cast<std::size_t>(k));
  const int small = n / k, large = small + 1, n_large = n % k;
  int at = 0;
  for (int f = 0; f < k; ++f) {
    const int len = f < n_large ? large : small;
    std::vector<int> val(idx.begin() + at, idx.begin() + at + len);
    std::vector<int> train;
    train.reserve(static_cast<std::size_t>(n - len));
    train.insert(train.end(), idx.begin(), idx.begin() + at);
    train.insert(train.end(), idx.begin() + at + len, idx.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    folds.emplace_back(std::move(train), std::move(val));
    at += len;
  }
  return folds;
}

ConvergenceResult convergence_comparison(const Dataset& ds, const TrainConfig& cfg_a,
                                         const TrainConfig& cfg_b,
                                         const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw InvalidArgument("convergence_comparison: no seeds");
  TrainConfig norm_a = cfg_a, norm_b = cfg_b;
  norm_a.variant = norm_b.variant;
  apply_variant_rules(norm_a);
  apply_variant_rules(norm_b);
  const bool same =
      norm_a.epochs == norm_b.epochs && norm_a.batch_size == norm_b.batch_size &&
      norm_a.lr == norm_b.lr && norm_a.lr_halve_every == norm_b.lr_halve_every &&
      norm_a.early_stop_patience == norm_b.early_stop_patience && norm_a.seed == norm_b.seed &&
      norm_a.d_steps_per_g_step == norm_b.d_steps_per_g_step &&
      norm_a.val_fraction == norm_b.val_fraction && norm_a.mask.kind == norm_b.mask.kind &&
      norm_a.mask.ratio == norm_b.mask.ratio &&
      norm_a.mask.sigma_fraction == norm_b.mask.sigma_fraction &&
      norm_a.mask.seed == norm_b.mask.seed && norm_a.weights.alpha == norm_b.weights.alpha &&
      norm_a.gen.depth == norm_b.gen.depth &&
      norm_a.gen.base_channels == norm_b.gen.base_channels &&
      norm_a.disc.depth == norm_b.disc.depth &&
      norm_a.disc.base_channels == norm_b.disc.base_channels &&
      norm_a.augment_enabled == norm_b.augment_enabled;
  if (!same)
    throw InvalidArgument("convergence_comparison: configs differ beyond the variant");

  ConvergenceResult result;
  for (std::uint64_t seed : seeds) {
    for (const TrainConfig* base : {&cfg_a, &cfg_b}) {
      TrainConfig cfg = *base;
      cfg.seed = seed;
      cfg.early_stop_patience = 0;  // full-length, aligned series
      FitResult fr = fit(ds, cfg);
      ConvergenceRun run;
      run.variant = cfg.variant;
      run.seed = seed;
      run.steps = std::move(fr.steps);
      run.epochs = std::move(fr.epochs);
      result.runs.push_back(std::move(run));
    }
  }
  return result;
}

std::int64_t steps_to_reach(const std::vector<StepLogRow>& steps, double g_total_threshold) {
  for (const auto& row : steps)
    if (row.m.g_total <= g_total_threshold) return row.step;
  return -1;
}

double late_psnr_variance(const std::vector<EpochLogRow>& epochs, int last_k) {
  const int n = static_cast<int>(epochs.size());
  const int k = std::min(last_k, n);
  if (k < 1) return 0.0;
  double mean = 0;
  for (int i = n - k; i < n; ++i) mean += epochs[static_cast<std::size_t>(i)].psnr;
  mean /= k;
  double var = 0;
  for (int i = n - k; i < n; ++i) {
    const double d = epochs[static_cast<std::size_t>(i)].psnr - mean;
    var += d * d;
  }
  return var / k;
}

void write_step_csv(const std::string& path, const std::vector<StepLogRow>& rows) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os << "step,epoch,lr,d_loss,g_adv,g_pixel,g_perceptual,g_total,d_real_mean,d_fake_mean\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.step), r.epoch, r.lr, r.m.d_loss, r.m.g_adv,
                  r.m.g_pixel, r.m.g_perceptual, r.m.g_total, r.m.d_real_mean,
                  r.m.d_fake_mean);
    os << buf;
  }
}

void write_epoch_csv(const std::string& path, const std::vector<EpochLogRow>& rows) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open for writing: " + path);
  os << "epoch,nmse,psnr,ssim\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", r.epoch, r.nmse, r.psnr, r.ssim);
    os << buf;
  }
}

}  // namespace dealias
