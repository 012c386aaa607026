// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "llicti/interpolator.hpp"

namespace llicti {

struct SymbolSupport {
  int lo = 0;
  int hi = 255;
  int count() const { return hi - lo + 1; }
};

inline constexpr SymbolSupport kSupportLuma{0, 255};
inline constexpr SymbolSupport kSupportChroma{-255, 255};

// sigma is exp-parameterized and clamped; the floor keeps CDF quantization
// away from degenerate spikes, the ceiling keeps exp() finite in float.
inline constexpr double kSigmaMin = 0.01;
inline constexpr double kSigmaMax = 2048.0;
inline constexpr double kPmfFloor = 0x1.0p-20;

// Activated GMM parameters for every pixel of one subband.
// Layout: pi/mu/sigma are [channel][pixel][mixture]; alpha is [pixel][j]
// with j over the per-pixel coefficient maps (3, or 3K per-mixture).
struct SubbandDist {
  int k = 0;
  int alpha_maps = 0;
  size_t pixels = 0;
  std::vector<double> pi, mu, sigma, alpha;

  double* mu_at(int channel, size_t pix) {
    return mu.data() + (static_cast<size_t>(channel) * pixels + pix) * k;
  }
  const double* pi_at(int channel, size_t pix) const {
    return pi.data() + (static_cast<size_t>(channel) * pixels + pix) * k;
  }
  const double* mu_at(int channel, size_t pix) const {
    return mu.data() + (static_cast<size_t>(channel) * pixels + pix) * k;
  }
  const double* sigma_at(int channel, size_t pix) const {
    return sigma.data() + (static_cast<size_t>(channel) * pixels + pix) * k;
  }
  const double* alpha_at(size_t pix) const { return alpha.data() + pix * alpha_maps; }
};

// softmax over the K mixture logits per channel; sigma = exp(clamped raw);
// mu and alpha pass through. Throws NumericError on non-finite raw values.
SubbandDist activate(const RawHeads& raw, const ICNNConfig& config);

// Cross-channel conditioning: channel 1 means shift by a*v1, channel 2 by
// b*v1 + c*v2, where v1/v2 are this pixel's already-coded channel values.
// In the per-mixture variant each mixture has its own (a,b,c).
void update_means_channel(SubbandDist& d, int channel, size_t pix, int32_t v1, int32_t v2);

// Eq-style discretized Gaussian mixture bin mass with tail folding: the bin
// at support.lo absorbs everything below it, the bin at support.hi everything
// above.
double gmm_pmf(int x, std::span<const double> pi, std::span<const double> mu,
               std::span<const double> sigma, SymbolSupport support);

// Code length -log2(max(pmf, kPmfFloor)).
double gmm_bits(int x, std::span<const double> pi, std::span<const double> mu,
                std::span<const double> sigma, SymbolSupport support);

// Integer CDF for the range coder: cumulative frequencies, length count+1,
// first 0, last exactly 2^16, every symbol frequency >= 1.
struct QuantizedCdf {
  SymbolSupport support;
  std::vector<uint32_t> c;

  uint32_t freq(int sym_index) const { return c[sym_index + 1] - c[sym_index]; }
  int alphabet() const { return static_cast<int>(c.size()) - 1; }
};

inline constexpr uint32_t kCdfTotalBits = 16;
inline constexpr uint32_t kCdfTotal = 1u << kCdfTotalBits;

// Scratch space so per-pixel CDF building does not allocate.
class CdfBuilder {
 public:
  // Deterministic: identical parameters give identical tables. Frequencies
  // are apportioned by largest remainder after reserving 1 per symbol.
  void build(std::span<const double> pi, std::span<const double> mu,
             std::span<const double> sigma, SymbolSupport support, QuantizedCdf& out);

 private:
  std::vector<double> pmf_;
  std::vector<double> rem_;
  std::vector<uint32_t> freq_;
  std::vector<int> order_;
};

}  // namespace llicti
