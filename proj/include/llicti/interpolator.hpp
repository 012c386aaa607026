// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "llicti/nnet.hpp"
#include "llicti/plane.hpp"

namespace llicti {

// Which subband an interpolator predicts. X11 sees {x00}, X01 sees
// {x00, x11}, X10 sees {x00, x11, x01} -- the already-decoded subbands of
// the same scale, in decode order.
enum class InterpId : int { X11 = 0, X01 = 1, X10 = 2 };

inline int context_count(InterpId id) { return static_cast<int>(id) + 1; }
inline const char* interp_name(InterpId id) {
  switch (id) {
    case InterpId::X11: return "x11";
    case InterpId::X01: return "x01";
    default: return "x10";
  }
}

enum class HeadId : int { Pi = 0, Mu = 1, Sigma = 2, Alpha = 3 };
inline constexpr int kNumHeads = 4;

struct ICNNConfig {
  int channels = 88;
  int layers = 3;
  int mixtures = 3;
  int scales = 5;
  bool share_across_scales = true;
  // Eq-style cross-channel coefficients are one (a,b,c) triple per pixel by
  // default; the per-mixture variant (3K maps) is selectable for experiments.
  bool per_mixture_alpha = false;

  void validate() const;
  int head_out_channels(HeadId h) const {
    if (h == HeadId::Alpha) return per_mixture_alpha ? 3 * mixtures : 3;
    return 3 * mixtures;
  }
  int weight_sets() const { return share_across_scales ? 1 : scales; }
  bool operator==(const ICNNConfig&) const = default;
  std::string describe() const;
};

// Layer-1 tap ranges in the input subband's index space, relative to the
// target index. Derived from the sampling grid: each range is the set of
// nearest-neighbor samples symmetric about the target's parent coordinate.
struct TapRange {
  int row_lo, row_hi, col_lo, col_hi;
  int kh() const { return row_hi - row_lo + 1; }
  int kw() const { return col_hi - col_lo + 1; }
};

// tap_geometry(interp, k) = range for the k-th context input of `interp`.
TapRange tap_geometry(InterpId id, int input_index);

template <typename T>
struct ConvLayerT {
  ConvSpec spec;
  TensorT<T> w;        // (out_ch, in_ch, taps)
  std::vector<T> b;    // (out_ch)
};

// One parameter head: layer-1 branch per context subband (outputs summed,
// then ReLU), L-2 hidden 1x1+ReLU layers, final 1x1 with no activation.
template <typename T>
struct HeadNetT {
  std::vector<ConvLayerT<T>> branches;
  std::vector<ConvLayerT<T>> hidden;
  ConvLayerT<T> final;
};

template <typename T>
struct InterpNetT {
  std::array<HeadNetT<T>, kNumHeads> heads;
};

// Raw head outputs for one subband forward; spatial size == target shape.
// Channel layout of pi/mu/sigma: (channel-major Y,Co,Cg) x (mixture 0..K-1).
// Alpha: (a, b, c) [or (a_0..a_{K-1}, b_*, c_*) in the per-mixture variant].
struct RawHeads {
  Tensor pi, mu, sigma, alpha;
};

struct ICNNWeights {
  ICNNConfig config;
  // sets[s][interp]; one set when shared across scales, else one per scale.
  std::vector<std::array<InterpNetT<float>, 3>> sets;

  const InterpNetT<float>& net(InterpId id, int scale) const;
  uint64_t checksum() const;

  // Visits every parameter tensor in the serialization order (weights then
  // bias, branches then hidden then final, heads in pi/mu/sigma/alpha order).
  template <typename F>
  void for_each_tensor(F&& f) const;
  template <typename F>
  void for_each_tensor(F&& f);
};

ICNNWeights build_interpolators(const ICNNConfig& config, uint64_t seed);

// Maps integer plane values into the network's input domain:
// (v - center) / half_range per channel, so every channel lands in [-1, 1].
Tensor plane_to_tensor(const Plane& p);

RawHeads interpolator_forward(const ICNNWeights& w, InterpId id, int scale,
                              const std::vector<const Tensor*>& context, int target_h, int target_w);

int64_t count_params(const ICNNConfig& config);
// Analytic multiply-accumulate count of all head forwards over all scales of
// an image, in KMAC per image pixel.
double count_macs(const ICNNConfig& config, int image_h, int image_w);

void save_weights(const ICNNWeights& w, const std::string& path);
ICNNWeights load_weights(const std::string& path);
ICNNWeights load_weights(const std::string& path, const ICNNConfig& expected);

// ---- implementation of the tensor visitor ----

template <typename F>
void ICNNWeights::for_each_tensor(F&& f) const {
  for (const auto& set : sets)
    for (const auto& interp : set)
      for (const auto& head : interp.heads) {
        for (const auto& l : head.branches) f(l);
        for (const auto& l : head.hidden) f(l);
        f(head.final);
      }
}

template <typename F>
void ICNNWeights::for_each_tensor(F&& f) {
  for (auto& set : sets)
    for (auto& interp : set)
      for (auto& head : interp.heads) {
        for (auto& l : head.branches) f(l);
        for (auto& l : head.hidden) f(l);
        f(head.final);
      }
}

}  // namespace llicti
