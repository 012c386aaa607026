// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/probmodel.hpp"

#include <algorithm>
#include <cmath>

namespace llicti {

namespace {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Beyond this many sigmas the Gaussian CDF is 0/1 to double precision
// (erfc(8/sqrt(2)) ~ 1.2e-15), so evaluation windows clip there.
constexpr double kTailSigmas = 8.0;

}  // namespace

SubbandDist activate(const RawHeads& raw, const ICNNConfig& config) {
  const int k = config.mixtures;
  const size_t n = static_cast<size_t>(raw.pi.h) * raw.pi.w;
  SubbandDist d;
  d.k = k;
  d.alpha_maps = config.head_out_channels(HeadId::Alpha);
  d.pixels = n;
  d.pi.resize(3 * n * k);
  d.mu.resize(3 * n * k);
  d.sigma.resize(3 * n * k);
  d.alpha.resize(n * d.alpha_maps);

  const double log_lo = std::log(kSigmaMin), log_hi = std::log(kSigmaMax);
  for (int ch = 0; ch < 3; ++ch) {
    for (size_t p = 0; p < n; ++p) {
      double* pi = d.pi.data() + (static_cast<size_t>(ch) * n + p) * k;
      double* mu = d.mu.data() + (static_cast<size_t>(ch) * n + p) * k;
      double* sg = d.sigma.data() + (static_cast<size_t>(ch) * n + p) * k;
      double maxlogit = -1e300;
      for (int i = 0; i < k; ++i) {
        const float logit = raw.pi.map(ch * k + i)[p];
        const float m = raw.mu.map(ch * k + i)[p];
        const float s = raw.sigma.map(ch * k + i)[p];
        if (!std::isfinite(logit) || !std::isfinite(m) || !std::isfinite(s))
          throw NumericError("activate: non-finite head output");
        pi[i] = logit;
        mu[i] = m;
        sg[i] = std::exp(std::clamp(static_cast<double>(s), log_lo, log_hi));
        maxlogit = std::max(maxlogit, pi[i]);
      }
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        pi[i] = std::exp(pi[i] - maxlogit);
        sum += pi[i];
      }
      for (int i = 0; i < k; ++i) pi[i] /= sum;
    }
  }
  for (int j = 0; j < d.alpha_maps; ++j) {
    const float* src = raw.alpha.map(j);
    for (size_t p = 0; p < n; ++p) {
      if (!std::isfinite(src[p])) throw NumericError("activate: non-finite alpha output");
      d.alpha[p * d.alpha_maps + j] = src[p];
    }
  }
  return d;
}

void update_means_channel(SubbandDist& d, int channel, size_t pix, int32_t v1, int32_t v2) {
  if (channel == 0) return;
  const double* a = d.alpha_at(pix);
  double* mu = d.mu_at(channel, pix);
  const bool per_mix = d.alpha_maps == 3 * d.k;
  if (channel == 1) {
    for (int i = 0; i < d.k; ++i) mu[i] += (per_mix ? a[i] : a[0]) * v1;
  } else {
    for (int i = 0; i < d.k; ++i)
      mu[i] += (per_mix ? a[d.k + i] : a[1]) * v1 + (per_mix ? a[2 * d.k + i] : a[2]) * v2;
  }
}

double gmm_pmf(int x, std::span<const double> pi, std::span<const double> mu,
               std::span<const double> sigma, SymbolSupport support) {
  if (x < support.lo || x > support.hi) throw RangeError("pmf: symbol outside support");
  double p = 0.0;
  for (size_t i = 0; i < pi.size(); ++i) {
    const double inv = 1.0 / sigma[i];
    const double up = (x == support.hi) ? 1.0 : std_normal_cdf((x + 0.5 - mu[i]) * inv);
    const double dn = (x == support.lo) ? 0.0 : std_normal_cdf((x - 0.5 - mu[i]) * inv);
    p += pi[i] * (up - dn);
  }
  return std::max(p, 0.0);
}

double gmm_bits(int x, std::span<const double> pi, std::span<const double> mu,
                std::span<const double> sigma, SymbolSupport support) {
  return -std::log2(std::max(gmm_pmf(x, pi, mu, sigma, support), kPmfFloor));
}

void CdfBuilder::build(std::span<const double> pi, std::span<const double> mu,
                       std::span<const double> sigma, SymbolSupport support, QuantizedCdf& out) {
  const int n = support.count();
  if (static_cast<uint32_t>(n) > kCdfTotal) throw CapacityError("cdf: alphabet exceeds 2^16 symbols");

  pmf_.assign(n, 0.0);
  // Accumulate each mixture over its +-8 sigma window of bin boundaries.
  // Micro-tails beyond the window fold into the window edges, which keeps the
  // total mass telescoping to exactly sum(pi).
  for (size_t i = 0; i < pi.size(); ++i) {
    const double m = mu[i], s = sigma[i], w = pi[i];
    const double reach = kTailSigmas * s;
    int a = support.lo, b = support.hi;
    if (m - reach > a) a = std::min(static_cast<int>(std::floor(m - reach)), b);
    if (m + reach < b) b = std::max(static_cast<int>(std::ceil(m + reach)), a);
    const double inv = 1.0 / s;
    double prev = 0.0;  // boundary below `a` treated as -inf
    for (int x = a; x < b; ++x) {
      const double up = std_normal_cdf((x + 0.5 - m) * inv);
      pmf_[x - support.lo] += w * (up - prev);
      prev = up;
    }
    pmf_[b - support.lo] += w * (1.0 - prev);  // boundary above `b` treated as +inf
  }

  // Largest-remainder apportionment of 2^16 - n after reserving 1 per symbol.
  const uint32_t budget = kCdfTotal - static_cast<uint32_t>(n);
  double total = 0.0;
  for (double p : pmf_) total += p;
  const double scale = total > 0.0 ? budget / total : 0.0;

  freq_.assign(n, 1);
  rem_.resize(n);
  uint64_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double ideal = std::max(pmf_[i], 0.0) * scale;
    const double fl = std::floor(ideal);
    freq_[i] += static_cast<uint32_t>(fl);
    rem_[i] = ideal - fl;
    assigned += static_cast<uint64_t>(fl);
  }
  int leftover = static_cast<int>(budget - assigned);
  if (leftover > 0) {
    order_.resize(n);
    for (int i = 0; i < n; ++i) order_[i] = i;
    // Ties break toward the lower symbol index so the table is deterministic.
    std::nth_element(order_.begin(), order_.begin() + (leftover - 1), order_.end(),
                     [&](int a, int b) { return rem_[a] > rem_[b] || (rem_[a] == rem_[b] && a < b); });
    for (int j = 0; j < leftover; ++j) freq_[order_[j]] += 1;
  }

  out.support = support;
  out.c.resize(n + 1);
  out.c[0] = 0;
  for (int i = 0; i < n; ++i) out.c[i + 1] = out.c[i] + freq_[i];
  // out.c[n] == kCdfTotal by construction.
}

}  // namespace llicti
