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
#include <vector>

#include "llicti/common.hpp"

namespace llicti {

// Activation / feature-map tensor, (channels, height, width), row-major.
// Weight tensors reuse the same storage as (out_ch, in_ch, taps).
template <typename T>
struct TensorT {
  int c = 0, h = 0, w = 0;
  std::vector<T> v;

  TensorT() = default;
  TensorT(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, T(0)) {}

  size_t size() const { return v.size(); }
  T& at(int ci, int ui, int vi) { return v[(static_cast<size_t>(ci) * h + ui) * w + vi]; }
  T at(int ci, int ui, int vi) const { return v[(static_cast<size_t>(ci) * h + ui) * w + vi]; }
  T* map(int ci) { return v.data() + static_cast<size_t>(ci) * h * w; }
  const T* map(int ci) const { return v.data() + static_cast<size_t>(ci) * h * w; }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

// Convolution geometry: one (dr, dc) offset per kernel tap, expressed in the
// input subband's index space relative to the output position, row-major and
// strictly increasing. Out-of-range taps clamp to the edge (replicate pad).
struct ConvSpec {
  int in_ch = 0;
  int out_ch = 0;
  int kh = 0, kw = 0;
  std::vector<std::array<int8_t, 2>> taps;

  int tap_count() const { return static_cast<int>(taps.size()); }
  void validate() const;
};

ConvSpec make_conv_spec(int in_ch, int out_ch, int row_lo, int row_hi, int col_lo, int col_hi);
inline ConvSpec make_1x1_spec(int in_ch, int out_ch) {
  return make_conv_spec(in_ch, out_ch, 0, 0, 0, 0);
}

// out[c,u,v] = bias[c] + sum over taps (row-major) then input channels of
// w[c,ic,t] * in[ic, clamp(u+dr), clamp(v+dc)].
// The per-element reduction runs in a fixed documented order (four
// interleaved accumulators combined pairwise), so results are reproducible
// for identical inputs regardless of caller-side threading.
// `accumulate` adds bias+sum onto existing contents instead of overwriting,
// which is how multi-branch first layers combine their outputs.
template <typename T>
void conv2d(const ConvSpec& spec, const TensorT<T>& in, const TensorT<T>& weights,
            const std::vector<T>& bias, TensorT<T>& out, bool accumulate = false);

template <typename T>
void relu_inplace(TensorT<T>& x) {
  for (auto& e : x.v) e = e > T(0) ? e : T(0);
}

// Gradients. `gout` is dL/d(out). Accumulates into gin/gw/gb (callers zero
// them once per batch); any of the three may be null to skip.
template <typename T>
void conv2d_backward(const ConvSpec& spec, const TensorT<T>& in, const TensorT<T>& weights,
                     const TensorT<T>& gout, TensorT<T>* gin, TensorT<T>* gw, std::vector<T>* gb);

// dL/dx = dL/dy where pre-activation > 0, else 0. `pre` is the recorded
// pre-ReLU tensor, gout is modified in place.
template <typename T>
void relu_backward_inplace(const TensorT<T>& pre, TensorT<T>& gout) {
  for (size_t i = 0; i < pre.v.size(); ++i)
    if (!(pre.v[i] > T(0))) gout.v[i] = T(0);
}

// Adam with bias correction. One state per parameter vector.
struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;

  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
  }
};

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(double* params, const double* grads, size_t n, AdamState& state, const AdamParams& hp);

}  // namespace llicti
