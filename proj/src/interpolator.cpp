// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/interpolator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace llicti {

void ICNNConfig::validate() const {
  if (layers < 2) throw ArgumentError("config: layers must be >= 2");
  if (channels < 1) throw ArgumentError("config: channels must be >= 1");
  if (mixtures < 1) throw ArgumentError("config: mixtures must be >= 1");
  if (scales < 1) throw ArgumentError("config: scales must be >= 1");
}

std::string ICNNConfig::describe() const {
  std::ostringstream os;
  os << "C=" << channels << " L=" << layers << " K=" << mixtures << " S=" << scales
     << (share_across_scales ? " shared" : " per-scale")
     << (per_mixture_alpha ? " per-mixture-alpha" : "");
  return os.str();
}

TapRange tap_geometry(InterpId id, int input_index) {
  // Targets at parent coords: x11:(2u+1,2v+1) x01:(2u,2v+1) x10:(2u+1,2v).
  // Context samples at x00:(2r,2c) x11:(2r+1,2c+1) x01:(2r,2c+1).
  switch (id) {
    case InterpId::X11:
      if (input_index == 0) return {-1, 2, -1, 2};  // x00, 4x4
      break;
    case InterpId::X01:
      if (input_index == 0) return {-1, 1, -1, 2};  // x00, 3x4
      if (input_index == 1) return {-2, 1, -1, 1};  // x11, 4x3
      break;
    case InterpId::X10:
      if (input_index == 0) return {-1, 2, -1, 1};  // x00, 4x3
      if (input_index == 1) return {-1, 1, -2, 1};  // x11, 3x4
      if (input_index == 2) return {-1, 2, -2, 1};  // x01, 4x4
      break;
  }
  throw ArgumentError("tap_geometry: bad input index");
}

namespace {

constexpr uint32_t kWeightsVersion = 1;
constexpr char kWeightsMagic[4] = {'L', 'L', 'I', 'W'};

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  double unit() { return u64_to_unit_double(eng()); }
  // He-uniform: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
  float he(int fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    return static_cast<float>((2.0 * unit() - 1.0) * limit);
  }
};

ConvLayerT<float> make_layer(const ConvSpec& spec, Rng& rng) {
  ConvLayerT<float> l;
  l.spec = spec;
  l.w = Tensor(spec.out_ch, spec.in_ch, spec.tap_count());
  l.b.assign(spec.out_ch, 0.0f);
  const int fan_in = spec.in_ch * spec.tap_count();
  for (auto& x : l.w.v) x = rng.he(fan_in);
  return l;
}

// Bias of the final layer seeds the untrained model at a usable operating
// point: means at the channel midpoint and wide scales. With all-zero biases
// the discretized likelihood of mid-range symbols underflows, the p_min
// floor kicks in and gradients vanish, so training could never move.
constexpr float kInitLogSigma = 4.5f;  // sigma ~ 90 symbol units

void init_final_bias(HeadNetT<float>& head, HeadId id, const ICNNConfig& cfg) {
  const int k = cfg.mixtures;
  switch (id) {
    case HeadId::Mu:
      for (int ch = 0; ch < 3; ++ch) {
        const float center = (ch == 0) ? 127.5f : 0.0f;  // YCoCg-R midpoints
        for (int i = 0; i < k; ++i) head.final.b[ch * k + i] = center;
      }
      break;
    case HeadId::Sigma:
      for (auto& b : head.final.b) b = kInitLogSigma;
      break;
    default:
      break;  // pi, alpha stay zero: uniform mixture, no cross-channel terms
  }
}

HeadNetT<float> make_head(InterpId id, HeadId hid, const ICNNConfig& cfg, Rng& rng) {
  HeadNetT<float> head;
  const int c = cfg.channels;
  for (int i = 0; i < context_count(id); ++i) {
    const TapRange t = tap_geometry(id, i);
    head.branches.push_back(make_layer(
        make_conv_spec(Plane::kChannels, c, t.row_lo, t.row_hi, t.col_lo, t.col_hi), rng));
  }
  for (int l = 0; l < cfg.layers - 2; ++l)
    head.hidden.push_back(make_layer(make_1x1_spec(c, c), rng));
  head.final = make_layer(make_1x1_spec(c, cfg.head_out_channels(hid)), rng);
  init_final_bias(head, hid, cfg);
  return head;
}

}  // namespace

ICNNWeights build_interpolators(const ICNNConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ICNNWeights w;
  w.config = config;
  w.sets.resize(config.weight_sets());
  for (auto& set : w.sets)
    for (int i = 0; i < 3; ++i) {
      const auto id = static_cast<InterpId>(i);
      for (int h = 0; h < kNumHeads; ++h)
        set[i].heads[h] = make_head(id, static_cast<HeadId>(h), config, rng);
    }
  return w;
}

const InterpNetT<float>& ICNNWeights::net(InterpId id, int scale) const {
  if (scale < 1 || scale > config.scales) throw ArgumentError("net: scale out of range");
  const int set = config.share_across_scales ? 0 : scale - 1;
  return sets[set][static_cast<int>(id)];
}

uint64_t ICNNWeights::checksum() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for_each_tensor([&](const ConvLayerT<float>& l) {
    h = fnv1a64(l.w.v.data(), l.w.v.size() * sizeof(float), h);
    h = fnv1a64(l.b.data(), l.b.size() * sizeof(float), h);
  });
  return h;
}

Tensor plane_to_tensor(const Plane& p) {
  Tensor t(Plane::kChannels, p.height, p.width);
  for (int c = 0; c < Plane::kChannels; ++c) {
    const float center = 0.5f * (p.lo[c] + p.hi[c]);
    const float half = 0.5f * (p.hi[c] - p.lo[c]);
    const float inv = half > 0 ? 1.0f / half : 1.0f;
    const int32_t* src = p.channel(c);
    float* dst = t.map(c);
    const size_t n = p.pixels();
    for (size_t i = 0; i < n; ++i) dst[i] = (static_cast<float>(src[i]) - center) * inv;
  }
  return t;
}

namespace {

Tensor head_forward(const HeadNetT<float>& head, const std::vector<const Tensor*>& ctx,
                    int target_h, int target_w) {
  Tensor act(head.branches[0].spec.out_ch, target_h, target_w);
  for (size_t i = 0; i < head.branches.size(); ++i)
    conv2d(head.branches[i].spec, *ctx[i], head.branches[i].w, head.branches[i].b, act, i > 0);
  relu_inplace(act);
  for (const auto& l : head.hidden) {
    Tensor next(l.spec.out_ch, target_h, target_w);
    conv2d(l.spec, act, l.w, l.b, next);
    relu_inplace(next);
    act = std::move(next);
  }
  Tensor out(head.final.spec.out_ch, target_h, target_w);
  conv2d(head.final.spec, act, head.final.w, head.final.b, out);
  return out;
}

}  // namespace

RawHeads interpolator_forward(const ICNNWeights& w, InterpId id, int scale,
                              const std::vector<const Tensor*>& context, int target_h,
                              int target_w) {
  if (static_cast<int>(context.size()) != context_count(id))
    throw ArgumentError(std::string("forward: ") + interp_name(id) + " expects " +
                        std::to_string(context_count(id)) + " context subbands, got " +
                        std::to_string(context.size()));
  const InterpNetT<float>& net = w.net(id, scale);
  RawHeads out;
  out.pi = head_forward(net.heads[static_cast<int>(HeadId::Pi)], context, target_h, target_w);
  out.mu = head_forward(net.heads[static_cast<int>(HeadId::Mu)], context, target_h, target_w);
  out.sigma = head_forward(net.heads[static_cast<int>(HeadId::Sigma)], context, target_h, target_w);
  out.alpha = head_forward(net.heads[static_cast<int>(HeadId::Alpha)], context, target_h, target_w);
  return out;
}

int64_t count_params(const ICNNConfig& config) {
  config.validate();
  int64_t per_set = 0;
  for (int i = 0; i < 3; ++i) {
    const auto id = static_cast<InterpId>(i);
    for (int h = 0; h < kNumHeads; ++h) {
      for (int k = 0; k < context_count(id); ++k) {
        const TapRange t = tap_geometry(id, k);
        per_set += static_cast<int64_t>(Plane::kChannels) * config.channels * t.kh() * t.kw() +
                   config.channels;
      }
      per_set += static_cast<int64_t>(config.layers - 2) *
                 (static_cast<int64_t>(config.channels) * config.channels + config.channels);
      const int out = config.head_out_channels(static_cast<HeadId>(h));
      per_set += static_cast<int64_t>(config.channels) * out + out;
    }
  }
  return per_set * config.weight_sets();
}

double count_macs(const ICNNConfig& config, int image_h, int image_w) {
  config.validate();
  if (image_h < 1 || image_w < 1) throw ArgumentError("count_macs: empty image");

  // MACs per output pixel of one interpolator's four heads.
  auto per_pixel = [&](InterpId id) {
    int64_t macs = 0;
    for (int h = 0; h < kNumHeads; ++h) {
      for (int k = 0; k < context_count(id); ++k) {
        const TapRange t = tap_geometry(id, k);
        macs += static_cast<int64_t>(Plane::kChannels) * config.channels * t.kh() * t.kw();
      }
      macs += static_cast<int64_t>(config.layers - 2) * config.channels * config.channels;
      macs += static_cast<int64_t>(config.channels) * config.head_out_channels(static_cast<HeadId>(h));
    }
    return macs;
  };
  const int64_t m11 = per_pixel(InterpId::X11);
  const int64_t m01 = per_pixel(InterpId::X01);
  const int64_t m10 = per_pixel(InterpId::X10);

  int64_t total = 0;
  int h = image_h, w = image_w;
  for (int i = 1; i <= config.scales; ++i) {
    const int64_t n11 = static_cast<int64_t>(h / 2) * (w / 2);
    const int64_t n01 = static_cast<int64_t>(ceil_div2(h)) * (w / 2);
    const int64_t n10 = static_cast<int64_t>(h / 2) * ceil_div2(w);
    total += n11 * m11 + n01 * m01 + n10 * m10;
    h = ceil_div2(h);
    w = ceil_div2(w);
  }
  return static_cast<double>(total) / (static_cast<double>(image_h) * image_w) / 1000.0;
}

// ---- persistence ----
//
// Layout: magic "LLIW" | u8 version | u32le header length | JSON header |
// float32le payload | u64le FNV-1a of payload. The JSON header carries the
// config, the tensor manifest and the scalar count, so files are inspectable
// with a hex viewer plus any JSON tool.

void save_weights(const ICNNWeights& w, const std::string& path) {
  nlohmann::json hdr;
  hdr["format"] = "llicti-weights";
  hdr["version"] = kWeightsVersion;
  hdr["config"] = {{"channels", w.config.channels},
                   {"layers", w.config.layers},
                   {"mixtures", w.config.mixtures},
                   {"scales", w.config.scales},
                   {"share_across_scales", w.config.share_across_scales},
                   {"per_mixture_alpha", w.config.per_mixture_alpha}};

  std::vector<float> payload;
  nlohmann::json manifest = nlohmann::json::array();
  w.for_each_tensor([&](const ConvLayerT<float>& l) {
    manifest.push_back({{"w", {l.w.c, l.w.h, l.w.w}}, {"b", static_cast<int>(l.b.size())}});
    payload.insert(payload.end(), l.w.v.begin(), l.w.v.end());
    payload.insert(payload.end(), l.b.begin(), l.b.end());
  });
  hdr["tensors"] = manifest;
  hdr["scalar_count"] = payload.size();
  const uint64_t checksum = fnv1a64(payload.data(), payload.size() * sizeof(float));
  hdr["checksum"] = checksum;

  const std::string htext = hdr.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open weights file for writing: " + path);
  f.write(kWeightsMagic, 4);
  const uint8_t ver = kWeightsVersion;
  f.write(reinterpret_cast<const char*>(&ver), 1);
  const uint32_t hlen = static_cast<uint32_t>(htext.size());
  uint8_t lenb[4] = {static_cast<uint8_t>(hlen), static_cast<uint8_t>(hlen >> 8),
                     static_cast<uint8_t>(hlen >> 16), static_cast<uint8_t>(hlen >> 24)};
  f.write(reinterpret_cast<const char*>(lenb), 4);
  f.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  f.write(reinterpret_cast<const char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(float)));
  uint8_t csb[8];
  for (int i = 0; i < 8; ++i) csb[i] = static_cast<uint8_t>(checksum >> (8 * i));
  f.write(reinterpret_cast<const char*>(csb), 8);
  if (!f) throw IoError("write failed: " + path);
}

namespace {

void read_exact(std::ifstream& f, void* dst, size_t n, const std::string& path) {
  f.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(f.gcount()) != n)
    throw FormatError("truncated weights file: " + path);
}

}  // namespace

ICNNWeights load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open weights file: " + path);

  char magic[4];
  read_exact(f, magic, 4, path);
  if (std::memcmp(magic, kWeightsMagic, 4) != 0) throw FormatError("bad weights magic: " + path);
  uint8_t ver = 0;
  read_exact(f, &ver, 1, path);
  if (ver != kWeightsVersion)
    throw FormatError("unsupported weights version " + std::to_string(ver) + ": " + path);
  uint8_t lenb[4];
  read_exact(f, lenb, 4, path);
  const uint32_t hlen = static_cast<uint32_t>(lenb[0]) | (static_cast<uint32_t>(lenb[1]) << 8) |
                        (static_cast<uint32_t>(lenb[2]) << 16) |
                        (static_cast<uint32_t>(lenb[3]) << 24);
  std::string htext(hlen, '\0');
  read_exact(f, htext.data(), hlen, path);

  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(htext);
  } catch (const std::exception& e) {
    throw FormatError(std::string("weights header is not valid JSON: ") + e.what());
  }

  ICNNConfig cfg;
  try {
    const auto& jc = hdr.at("config");
    cfg.channels = jc.at("channels").get<int>();
    cfg.layers = jc.at("layers").get<int>();
    cfg.mixtures = jc.at("mixtures").get<int>();
    cfg.scales = jc.at("scales").get<int>();
    cfg.share_across_scales = jc.at("share_across_scales").get<bool>();
    cfg.per_mixture_alpha = jc.at("per_mixture_alpha").get<bool>();
  } catch (const std::exception& e) {
    throw FormatError(std::string("weights header missing config fields: ") + e.what());
  }
  cfg.validate();

  // Rebuild the structure deterministically and then overwrite every scalar.
  ICNNWeights w = build_interpolators(cfg, 0);
  const size_t expected = hdr.at("scalar_count").get<size_t>();
  if (expected != static_cast<size_t>(count_params(cfg)))
    throw FormatError("weights scalar count does not match config: " + path);

  std::vector<float> payload(expected);
  read_exact(f, payload.data(), expected * sizeof(float), path);
  uint8_t csb[8];
  read_exact(f, csb, 8, path);
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<uint64_t>(csb[i]) << (8 * i);
  const uint64_t actual = fnv1a64(payload.data(), payload.size() * sizeof(float));
  if (stored != actual) throw FormatError("weights checksum mismatch: " + path);
  if (hdr.at("checksum").get<uint64_t>() != actual)
    throw FormatError("weights header checksum mismatch: " + path);

  size_t pos = 0;
  w.for_each_tensor([&](ConvLayerT<float>& l) {
    std::memcpy(l.w.v.data(), payload.data() + pos, l.w.v.size() * sizeof(float));
    pos += l.w.v.size();
    std::memcpy(l.b.data(), payload.data() + pos, l.b.size() * sizeof(float));
    pos += l.b.size();
  });
  return w;
}

ICNNWeights load_weights(const std::string& path, const ICNNConfig& expected) {
  ICNNWeights w = load_weights(path);
  if (!(w.config == expected))
    throw FormatError("weights config mismatch: file has [" + w.config.describe() +
                      "], expected [" + expected.describe() + "]");
  return w;
}

}  // namespace llicti
