#include "dealias/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "dealias/errors.hpp"

namespace dealias {

namespace {

void check_same_shape(const Image& a, const Image& b, const char* op) {
  if (a.h != b.h || a.w != b.w) throw InvalidArgument(std::string(op) + ": shapes differ");
}

}  // namespace

double nmse(const Image& x_hat, const Image& gt) {
  check_same_shape(x_hat, gt, "nmse");
  double err = 0, ref = 0;
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    const double d = static_cast<double>(x_hat.v[i]) - gt.v[i];
    err += d * d;
    ref += static_cast<double>(gt.v[i]) * gt.v[i];
  }
  if (ref == 0.0) throw DegenerateReference("nmse: ground truth has zero norm");
  return std::sqrt(err) / std::sqrt(ref);
}

double psnr(const Image& x_hat, const Image& gt) {
  check_same_shape(x_hat, gt, "psnr");
  double mse = 0;
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    // (v+1)/2 maps both onto [0,1]; the difference halves.
    const double d = (static_cast<double>(x_hat.v[i]) - gt.v[i]) * 0.5;
    mse += d * d;
  }
  mse /= static_cast<double>(gt.v.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

// Normalized 1-D Gaussian taps; the 2-D window is the outer product and sums
// to one exactly the way both the filter and the brute-force oracle use it.
std::vector<double> ssim_kernel() {
  std::vector<double> k(kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

double ssim(const Image& x_hat, const Image& gt) {
  check_same_shape(x_hat, gt, "ssim");
  if (x_hat.h < kSsimWindow || x_hat.w < kSsimWindow)
    throw InvalidArgument("ssim: image smaller than the 11x11 window");

  const int H = gt.h, W = gt.w;
  const auto k = ssim_kernel();
  const double c1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
  const double c2 = 0.03 * 0.03;

  // [0,1] remap.
  std::vector<double> a(gt.v.size()), b(gt.v.size());
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    a[i] = (static_cast<double>(x_hat.v[i]) + 1.0) * 0.5;
    b[i] = (static_cast<double>(gt.v[i]) + 1.0) * 0.5;
  }

  // Separable Gaussian filtering of a, b, a^2, b^2, ab (valid rows first,
  // then valid columns).
  const int Hr = H, Wr = W - kSsimWindow + 1;
  auto filt = [&](const std::vector<double>& src, auto value) {
    // horizontal pass
    std::vector<double> tmp(static_cast<std::size_t>(Hr) * Wr);
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < Wr; ++j) {
        double s = 0;
        for (int t = 0; t < kSsimWindow; ++t)
          s += k[static_cast<std::size_t>(t)] * value(src, i, j + t);
        tmp[static_cast<std::size_t>(i) * Wr + j] = s;
      }
    // vertical pass
    const int Hv = H - kSsimWindow + 1;
    std::vector<double> out(static_cast<std::size_t>(Hv) * Wr);
    for (int i = 0; i < Hv; ++i)
      for (int j = 0; j < Wr; ++j) {
        double s = 0;
        for (int t = 0; t < kSsimWindow; ++t)
          s += k[static_cast<std::size_t>(t)] * tmp[static_cast<std::size_t>(i + t) * Wr + j];
        out[static_cast<std::size_t>(i) * Wr + j] = s;
      }
    return out;
  };
  auto ident = [W](const std::vector<double>& s, int i, int j) {
    return s[static_cast<std::size_t>(i) * W + j];
  };
  auto square = [W](const std::vector<double>& s, int i, int j) {
    const double v = s[static_cast<std::size_t>(i) * W + j];
    return v * v;
  };

  std::vector<double> ab(gt.v.size());
  for (std::size_t i = 0; i < ab.size(); ++i) ab[i] = a[i] * b[i];

  const auto mu_a = filt(a, ident);
  const auto mu_b = filt(b, ident);
  const auto m_aa = filt(a, square);
  const auto m_bb = filt(b, square);
  const auto m_ab = filt(ab, ident);

  double total = 0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

GrayImage8 diff_image(const Image& x_hat, const Image& gt, double gain) {
  check_same_shape(x_hat, gt, "diff_image");
  if (!(gain > 0.0)) throw InvalidArgument("diff_image: gain must be positive");
  GrayImage8 out;
  out.h = gt.h;
  out.w = gt.w;
  out.px.resize(gt.v.size());
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    const double d = std::abs(static_cast<double>(x_hat.v[i]) - gt.v[i]) * 0.5;  // [0,1] scale
    const double v = std::fmin(1.0, std::fmax(0.0, gain * d));
    out.px[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
  }
  return out;
}

std::vector<float> line_profile(const Image& img, int row) {
  if (row < 0 || row >= img.h) throw InvalidArgument("line_profile: row out of range");
  return std::vector<float>(img.v.begin() + static_cast<std::ptrdiff_t>(row) * img.w,
                            img.v.begin() + static_cast<std::ptrdiff_t>(row + 1) * img.w);
}

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Aggregate aggregate(std::vector<double> values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  a.median = quantile_linear(values, 0.5);
  a.q1 = quantile_linear(values, 0.25);
  a.q3 = quantile_linear(values, 0.75);
  return a;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("box_stats: empty input");
  std::sort(values.begin(), values.end());
  BoxStats s;
  s.q1 = quantile_linear(values, 0.25);
  s.median = quantile_linear(values, 0.5);
  s.q3 = quantile_linear(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_lo = s.q3;
  s.whisker_hi = s.q1;
  bool any_in = false;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
    } else {
      if (!any_in) {
        s.whisker_lo = v;
        s.whisker_hi = v;
        any_in = true;
      } else {
        s.whisker_lo = std::min(s.whisker_lo, v);
        s.whisker_hi = std::max(s.whisker_hi, v);
      }
    }
  }
  return s;
}

std::vector<MetricsGroup> aggregate_report(const std::vector<MetricRecord>& records) {
  if (records.empty()) throw InvalidArgument("aggregate_report: no records");
  std::map<std::tuple<std::string, std::string, double>, std::vector<const MetricRecord*>> groups;
  for (const auto& r : records) groups[{r.variant, r.mask, r.ratio}].push_back(&r);

  std::vector<MetricsGroup> out;
  out.reserve(groups.size());
  for (const auto& [key, rows] : groups) {
    MetricsGroup g;
    std::tie(g.variant, g.mask, g.ratio) = key;
    std::vector<double> nv, pv, sv;
    for (const auto* r : rows) {
      nv.push_back(r->nmse_v);
      sv.push_back(r->ssim_v);
      if (std::isfinite(r->psnr_db))
        pv.push_back(r->psnr_db);
      else
        ++g.psnr_flagged_identical;
    }
    g.nmse_agg = aggregate(std::move(nv));
    g.ssim_agg = aggregate(std::move(sv));
    if (!pv.empty()) g.psnr_agg = aggregate(std::move(pv));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace dealias
