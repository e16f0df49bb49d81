#pragma once

// Central-finite-difference gradient checker used across the nn tests and the
// acceptance suite. Runs at 64-bit; the analytic gradient of a freshly built
// graph is compared entry-wise against (f(x+h) - f(x-h)) / (2h) on a sampled
// subset of each parameter tensor.

#include <cmath>
#include <functional>
#include <vector>

#include "dealias/autograd.hpp"
#include "dealias/rng.hpp"

namespace dealias::testing {

struct GradCheckReport {
  double max_err = 0.0;   // |analytic - numeric| / (atol + max(|analytic|, |numeric|))
  bool ok = true;
};

// forward() must rebuild the scalar loss graph from the current values of
// `params` (the same Var handles, mutated in place between evaluations).
inline GradCheckReport check_gradients(const std::function<nn::VarD()>& forward,
                                       const std::vector<nn::VarD>& params, double h = 1e-5,
                                       double rtol = 1e-4, double atol = 1e-7,
                                       int samples_per_tensor = 24,
                                       std::uint64_t seed = 0xC0FFEE) {
  for (const auto& p : params) p.zero_grad();
  nn::VarD loss = forward();
  nn::backward(loss);
  std::vector<nn::TensorD> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad());

  GradCheckReport report;
  Rng rng(seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    nn::TensorD& value = const_cast<nn::VarD&>(params[pi]).value_mut();
    const std::int64_t n = value.numel();
    std::vector<std::int64_t> picks;
    if (n <= samples_per_tensor) {
      for (std::int64_t i = 0; i < n; ++i) picks.push_back(i);
    } else {
      for (int s = 0; s < samples_per_tensor; ++s)
        picks.push_back(static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n))));
    }
    for (std::int64_t idx : picks) {
      const double keep = value[idx];
      value[idx] = keep + h;
      const double f_plus = forward().value()[0];
      value[idx] = keep - h;
      const double f_minus = forward().value()[0];
      value[idx] = keep;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[pi][idx];
      const double err = std::abs(a - numeric) / (atol + std::max(std::abs(a), std::abs(numeric)));
      report.max_err = std::max(report.max_err, err);
      if (std::abs(a - numeric) > atol + rtol * std::max(std::abs(a), std::abs(numeric)))
        report.ok = false;
    }
  }
  return report;
}

// Fixed random projection turning a tensor-valued graph output into a scalar.
inline nn::VarD project_to_scalar(const nn::VarD& out, std::uint64_t seed = 0x9E11) {
  Rng rng(seed);
  nn::TensorD r = nn::TensorD::zeros(out.value().shape);
  for (auto& v : r.data) v = rng.uniform(-1.0, 1.0);
  return nn::sum_all(nn::mul(out, nn::VarD::constant(std::move(r))));
}

inline nn::VarD random_leaf(std::vector<std::int64_t> shape, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0, bool requires_grad = true) {
  Rng rng(seed);
  nn::TensorD t = nn::TensorD::zeros(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return nn::VarD::leaf(std::move(t), requires_grad);
}

}  // namespace dealias::testing
