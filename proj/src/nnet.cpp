// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/nnet.hpp"

#include <algorithm>
#include <cmath>

namespace llicti {

void ConvSpec::validate() const {
  if (in_ch < 1 || out_ch < 1 || kh < 1 || kw < 1) throw ArgumentError("conv spec: non-positive dims");
  if (static_cast<int>(taps.size()) != kh * kw) throw ArgumentError("conv spec: tap count != kh*kw");
  for (size_t i = 1; i < taps.size(); ++i) {
    bool inc = taps[i][0] > taps[i - 1][0] ||
               (taps[i][0] == taps[i - 1][0] && taps[i][1] > taps[i - 1][1]);
    if (!inc) throw ArgumentError("conv spec: taps not strictly increasing row-major");
  }
}

ConvSpec make_conv_spec(int in_ch, int out_ch, int row_lo, int row_hi, int col_lo, int col_hi) {
  ConvSpec s;
  s.in_ch = in_ch;
  s.out_ch = out_ch;
  s.kh = row_hi - row_lo + 1;
  s.kw = col_hi - col_lo + 1;
  s.taps.reserve(static_cast<size_t>(s.kh) * s.kw);
  for (int r = row_lo; r <= row_hi; ++r)
    for (int c = col_lo; c <= col_hi; ++c)
      s.taps.push_back({static_cast<int8_t>(r), static_cast<int8_t>(c)});
  s.validate();
  return s;
}

namespace {

inline int clampi(int x, int lim) { return x < 0 ? 0 : (x >= lim ? lim - 1 : x); }

// Reduction order is fixed: flatten (tap, in_ch) row-major into one sequence,
// feed elements round-robin into 4 accumulators, then combine (a0+a1)+(a2+a3).
template <typename T>
inline T reduce_taps(const T* wrow, const T* const* tap_ptrs, int ntap, int in_stride, int nin) {
  T a0 = T(0), a1 = T(0), a2 = T(0), a3 = T(0);
  size_t k = 0;
  for (int t = 0; t < ntap; ++t) {
    const T* src = tap_ptrs[t];
    for (int ic = 0; ic < nin; ++ic, ++k) {
      const T prod = wrow[k] * src[static_cast<size_t>(ic) * in_stride];
      switch (k & 3u) {
        case 0: a0 += prod; break;
        case 1: a1 += prod; break;
        case 2: a2 += prod; break;
        default: a3 += prod; break;
      }
    }
  }
  return (a0 + a1) + (a2 + a3);
}

}  // namespace

template <typename T>
void conv2d(const ConvSpec& spec, const TensorT<T>& in, const TensorT<T>& weights,
            const std::vector<T>& bias, TensorT<T>& out, bool accumulate) {
  if (in.c != spec.in_ch) throw ShapeError("conv2d: input channels mismatch");
  if (out.c != spec.out_ch) throw ShapeError("conv2d: output channels mismatch");
  if (weights.c != spec.out_ch || weights.h != spec.in_ch || weights.w != spec.tap_count())
    throw ShapeError("conv2d: weight tensor shape mismatch");
  if (!bias.empty() && static_cast<int>(bias.size()) != spec.out_ch)
    throw ShapeError("conv2d: bias size mismatch");
  if (out.h == 0 || out.w == 0) return;
  if (in.h == 0 || in.w == 0) throw ShapeError("conv2d: empty input with non-empty output");

  const int ntap = spec.tap_count();
  const size_t in_plane = static_cast<size_t>(in.h) * in.w;

  // Weights are stored [oc][ic][tap]; the reduction wants [tap][ic], so build
  // a transposed row per output channel once.
  std::vector<T> wrow(static_cast<size_t>(ntap) * spec.in_ch);
  std::vector<const T*> tap_ptrs(ntap);

  for (int oc = 0; oc < spec.out_ch; ++oc) {
    {
      const T* w = weights.map(0) + static_cast<size_t>(oc) * spec.in_ch * ntap;
      size_t k = 0;
      for (int t = 0; t < ntap; ++t)
        for (int ic = 0; ic < spec.in_ch; ++ic, ++k) wrow[k] = w[static_cast<size_t>(ic) * ntap + t];
    }
    const T b = bias.empty() ? T(0) : bias[oc];
    T* dst = out.map(oc);
    for (int u = 0; u < out.h; ++u) {
      for (int v = 0; v < out.w; ++v) {
        for (int t = 0; t < ntap; ++t) {
          const int su = clampi(u + spec.taps[t][0], in.h);
          const int sv = clampi(v + spec.taps[t][1], in.w);
          tap_ptrs[t] = in.v.data() + static_cast<size_t>(su) * in.w + sv;
        }
        const T acc = reduce_taps<T>(wrow.data(), tap_ptrs.data(), ntap,
                                     static_cast<int>(in_plane), spec.in_ch);
        T& o = dst[static_cast<size_t>(u) * out.w + v];
        if (accumulate)
          o += b + acc;
        else
          o = b + acc;
      }
    }
  }
}

template <typename T>
void conv2d_backward(const ConvSpec& spec, const TensorT<T>& in, const TensorT<T>& weights,
                     const TensorT<T>& gout, TensorT<T>* gin, TensorT<T>* gw, std::vector<T>* gb) {
  if (gout.c != spec.out_ch) throw ShapeError("conv2d_backward: gout channels mismatch");
  if (gout.h == 0 || gout.w == 0) return;
  const int ntap = spec.tap_count();

  for (int oc = 0; oc < spec.out_ch; ++oc) {
    const T* go = gout.map(oc);
    if (gb) {
      T s = T(0);
      const size_t n = static_cast<size_t>(gout.h) * gout.w;
      for (size_t i = 0; i < n; ++i) s += go[i];
      (*gb)[oc] += s;
    }
    for (int ic = 0; ic < spec.in_ch; ++ic) {
      const T* src = in.map(ic);
      T* gsrc = gin ? gin->map(ic) : nullptr;
      const T* w = weights.map(0) + (static_cast<size_t>(oc) * spec.in_ch + ic) * ntap;
      T* gwp = gw ? gw->map(0) + (static_cast<size_t>(oc) * spec.in_ch + ic) * ntap : nullptr;
      for (int t = 0; t < ntap; ++t) {
        const int dr = spec.taps[t][0], dc = spec.taps[t][1];
        T gwt = T(0);
        for (int u = 0; u < gout.h; ++u) {
          const int su = clampi(u + dr, in.h);
          const T* srow = src + static_cast<size_t>(su) * in.w;
          T* grow = gsrc ? gsrc + static_cast<size_t>(su) * in.w : nullptr;
          const T* gorow = go + static_cast<size_t>(u) * gout.w;
          for (int v = 0; v < gout.w; ++v) {
            const int sv = clampi(v + dc, in.w);
            gwt += gorow[v] * srow[sv];
            if (grow) grow[sv] += gorow[v] * w[t];
          }
        }
        if (gwp) gwp[t] += gwt;
      }
    }
  }
}

void adam_step(double* params, const double* grads, size_t n, AdamState& state, const AdamParams& hp) {
  if (state.m.size() != n || state.v.size() != n) throw StateError("adam: state not initialized");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

template void conv2d<float>(const ConvSpec&, const TensorT<float>&, const TensorT<float>&,
                            const std::vector<float>&, TensorT<float>&, bool);
template void conv2d<double>(const ConvSpec&, const TensorT<double>&, const TensorT<double>&,
                             const std::vector<double>&, TensorT<double>&, bool);
template void conv2d_backward<float>(const ConvSpec&, const TensorT<float>&, const TensorT<float>&,
                                     const TensorT<float>&, TensorT<float>*, TensorT<float>*,
                                     std::vector<float>*);
template void conv2d_backward<double>(const ConvSpec&, const TensorT<double>&, const TensorT<double>&,
                                      const TensorT<double>&, TensorT<double>*, TensorT<double>*,
                                      std::vector<double>*);

}  // namespace llicti
