#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dealias/augment.hpp"
#include "dealias/checkpoint.hpp"
#include "dealias/dataset.hpp"
#include "dealias/kspace.hpp"
#include "dealias/losses.hpp"
#include "dealias/optim.hpp"

namespace dealias {

// Ablation variants: PG = pixel + adversarial; PPG adds the perceptual term;
// PPGR additionally routes the input past the generator (refinement).
enum class Variant : std::uint8_t { PG = 0, PPG = 1, PPGR = 2 };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct MaskSpec {
  MaskKind kind = MaskKind::gaussian2d;
  double ratio = 0.2;
  double sigma_fraction = 0.3;
  std::uint64_t seed = 1;
};

SamplingMask make_mask(const MaskSpec& spec, int h, int w);

struct TrainConfig {
  Variant variant = Variant::PPGR;
  int epochs = 30;
  int batch_size = 8;
  double lr = 1e-4;
  int lr_halve_every = 30;
  int early_stop_patience = 0;  // 0 disables early stopping
  std::uint64_t seed = 1;
  int d_steps_per_g_step = 1;
  double val_fraction = 0.2;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  MaskSpec mask;
  nn::LossWeights weights;
  nn::GeneratorConfig gen;
  nn::DiscriminatorConfig disc;
  nn::PerceptualEncoderConfig percep;
  bool augment_enabled = false;
  AugmentSpec aug;
};

// PG forces beta to 0; use_refinement holds exactly for PPGR.
void apply_variant_rules(TrainConfig& cfg);

struct StepMetrics {
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_pixel = 0.0;
  double g_perceptual = 0.0;
  double g_total = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;
};

struct StepLogRow {
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 0.0;
  StepMetrics m;
};

struct EpochLogRow {
  int epoch = 0;
  double nmse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

// Owns the three networks and their optimizers; the image geometry of the
// configs is overridden by the dataset shape handed to the constructor.
class Trainer {
 public:
  Trainer(TrainConfig cfg, int h, int w);

  // One alternating update: d_steps_per_g_step discriminator updates on
  // (x_t, detached fakes), then one generator update on the full objective.
  // Gradients are zeroed between phases. Throws NumericFault on NaN losses.
  StepMetrics train_step(const nn::TensorF& x_u, const nn::TensorF& x_t);

  // Eval-mode (frozen BN) reconstruction of a single aliased image.
  Image reconstruct(const Image& x_u);

  Checkpoint to_checkpoint() const;
  void restore(const Checkpoint& ckpt);

  void set_lr(double lr);
  // Freeze batch-norm statistics inside train_step (descent-property tests).
  void set_bn_frozen(bool frozen) { bn_frozen_ = frozen; }

  nn::Generator& generator() { return gen_; }
  nn::Discriminator& discriminator() { return disc_; }
  nn::PerceptualEncoder& perceptual() { return percep_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  TrainConfig cfg_;
  nn::Generator gen_;
  nn::Discriminator disc_;
  nn::PerceptualEncoder percep_;
  nn::AdamOptimizerF opt_g_;
  nn::AdamOptimizerF opt_d_;
  bool bn_frozen_ = false;
};

struct FitResult {
  std::vector<StepLogRow> steps;
  std::vector<EpochLogRow> epochs;
  Checkpoint final_checkpoint;
  Checkpoint best_checkpoint;
  int best_epoch = -1;
  double best_val_psnr = 0.0;
  bool early_stopped = false;
  std::vector<int> train_indices;
  std::vector<int> val_indices;
};

// Runs the full loop: seeded split, one mask per run, per-epoch validation
// (PSNR/NMSE/SSIM on the val fold, eval-mode BN), the lr-halving schedule
// lr * 0.5^floor(epoch / lr_halve_every), optional early stopping restoring
// the best checkpoint. epochs == 0 returns the initialized checkpoint and
// empty logs.
FitResult fit(const Dataset& ds, const TrainConfig& cfg);

// Disjoint, exhaustive k folds with sizes differing by at most one,
// deterministic per seed. Returns (train, val) index pairs.
std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold_split(int n, int k,
                                                                       std::uint64_t seed);

struct ConvergenceRun {
  Variant variant = Variant::PPG;
  std::uint64_t seed = 0;
  std::vector<StepLogRow> steps;
  std::vector<EpochLogRow> epochs;
};

struct ConvergenceResult {
  std::vector<ConvergenceRun> runs;  // for each seed: cfg_a run then cfg_b run
};

// Trains both variants with identical data, masks and seeds; configs must be
// identical apart from the variant. Step axes of paired runs align.
ConvergenceResult convergence_comparison(const Dataset& ds, const TrainConfig& cfg_a,
                                         const TrainConfig& cfg_b,
                                         const std::vector<std::uint64_t>& seeds);

// First step at which the generator total loss reaches the threshold;
// -1 if it never does.
std::int64_t steps_to_reach(const std::vector<StepLogRow>& steps, double g_total_threshold);

// Population variance of the PSNR over the last `last_k` epochs.
double late_psnr_variance(const std::vector<EpochLogRow>& epochs, int last_k);

void write_step_csv(const std::string& path, const std::vector<StepLogRow>& rows);
void write_epoch_csv(const std::string& path, const std::vector<EpochLogRow>& rows);

}  // namespace dealias
