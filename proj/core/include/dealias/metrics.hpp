#pragma once

#include <string>
#include <vector>

#include "dealias/image.hpp"

namespace dealias {

// Relative l2 error ||x_hat - gt|| / ||gt||. Throws DegenerateReference when
// the ground truth has zero norm.
double nmse(const Image& x_hat, const Image& gt);

// Peak signal-to-noise in dB with peak 1 after mapping [-1,1] -> [0,1].
// Identical images give +infinity (callers flag it).
double psnr(const Image& x_hat, const Image& gt);

// Mean local SSIM over every valid 11x11 window, Gaussian-weighted
// (sigma 1.5), K1=0.01, K2=0.03, dynamic range 1 on [0,1]-mapped images.
double ssim(const Image& x_hat, const Image& gt);

// 8-bit grayscale raster for PNG export.
struct GrayImage8 {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> px;
};

// clamp(gain * |x_hat - gt| on the [0,1] scale, 0, 1), quantized round-half-up.
GrayImage8 diff_image(const Image& x_hat, const Image& gt, double gain = 10.0);

// The W raw values of one row.
std::vector<float> line_profile(const Image& img, int row);

struct MetricRecord {
  std::string id;
  std::string variant;   // method label: GT / ZF / PG / PPG / PPGR
  std::string mask;      // mask kind label
  double ratio = 0.0;
  double nmse_v = 0.0;
  double psnr_db = 0.0;  // may be +inf for identical images
  double ssim_v = 0.0;
};

struct Aggregate {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 when n < 2
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

// Quantile with linear interpolation on the sorted values, p in [0,1].
double quantile_linear(std::vector<double> values, double p);

Aggregate aggregate(std::vector<double> values);

// Box-plot summary: whiskers at the most extreme values within 1.5 IQR of
// the quartiles, points beyond listed as outliers.
struct BoxStats {
  double whisker_lo = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, whisker_hi = 0.0;
  std::vector<double> outliers;
};

BoxStats box_stats(std::vector<double> values);

struct MetricsGroup {
  std::string variant;
  std::string mask;
  double ratio = 0.0;
  Aggregate nmse_agg;
  Aggregate psnr_agg;  // over finite PSNR entries only
  Aggregate ssim_agg;
  std::size_t psnr_flagged_identical = 0;
};

// Groups records by (variant, mask, ratio), deterministically ordered.
std::vector<MetricsGroup> aggregate_report(const std::vector<MetricRecord>& records);

}  // namespace dealias
