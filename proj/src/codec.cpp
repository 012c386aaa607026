// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/codec.hpp"

#include <atomic>
#include <chrono>
#include <cstring>
#include <functional>
#include <thread>

#include "llicti/coder.hpp"
#include "llicti/colorspace.hpp"
#include "llicti/probmodel.hpp"
#include "llicti/pyramid.hpp"

namespace llicti {

namespace {

constexpr int kMaxDim = 1 << 20;

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void append_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

struct ByteReader {
  std::span<const uint8_t> d;
  size_t pos = 0;

  uint8_t u8() {
    if (pos >= d.size()) throw CorruptionError("stream truncated in header");
    return d[pos++];
  }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  }
};

// Subband shapes of scale i given the shape of x00^(i-1).
struct ScaleShapes {
  int h00, w00, h01, w01, h10, w10, h11, w11;
};
ScaleShapes scale_shapes(int parent_h, int parent_w) {
  return {ceil_div2(parent_h), ceil_div2(parent_w), ceil_div2(parent_h), parent_w / 2,
          parent_h / 2,        ceil_div2(parent_w), parent_h / 2,        parent_w / 2};
}

std::vector<uint32_t> expected_symbol_counts(int h, int w, int scales) {
  std::vector<uint32_t> counts;
  counts.reserve(static_cast<size_t>(scales) * 3);
  std::vector<ScaleShapes> shapes;
  int ch = h, cw = w;
  for (int i = 1; i <= scales; ++i) {
    shapes.push_back(scale_shapes(ch, cw));
    ch = shapes.back().h00;
    cw = shapes.back().w00;
  }
  for (int i = scales - 1; i >= 0; --i) {
    const ScaleShapes& s = shapes[i];
    counts.push_back(3u * s.h11 * s.w11);
    counts.push_back(3u * s.h01 * s.w01);
    counts.push_back(3u * s.h10 * s.w10);
  }
  return counts;
}

SymbolSupport channel_support(const Plane& p, int ch) { return {p.lo[ch], p.hi[ch]}; }

// Runs fn(begin, end, worker) over [0, n) in fixed-size blocks. Work results
// must be keyed by block so the outcome is identical for any thread count.
void parallel_blocks(size_t n, size_t block, int threads, int max_workers,
                     const std::function<void(size_t, size_t, int)>& fn) {
  if (n == 0) return;
  const size_t nblocks = (n + block - 1) / block;
  if (threads <= 1 || nblocks <= 1) {
    for (size_t b = 0; b < nblocks; ++b) fn(b * block, std::min(n, (b + 1) * block), 0);
    return;
  }
  const int workers = std::min<int>({threads, static_cast<int>(nblocks), max_workers});
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      for (;;) {
        const size_t b = next.fetch_add(1);
        if (b >= nblocks) return;
        fn(b * block, std::min(n, (b + 1) * block), t);
      }
    });
  for (auto& th : pool) th.join();
}

constexpr size_t kCdfBlock = 2048;

// Shared per-subband machinery for encode/decode/estimate. The three modes
// run the identical forward/activation path so encoder and decoder always
// see bit-identical probability tables.
struct SubbandCoder {
  const ICNNWeights& weights;
  int threads;

  explicit SubbandCoder(const ICNNWeights& w, int nthreads)
      : weights(w), threads(nthreads) {}

  std::vector<QuantizedCdf> cdfs;           // block scratch, encode/decode
  std::vector<CdfBuilder> builders;

  SubbandDist prepare(InterpId id, int scale, const std::vector<const Plane*>& ctx_planes,
                      int th, int tw) {
    std::vector<Tensor> tensors;
    tensors.reserve(ctx_planes.size());
    for (const Plane* p : ctx_planes) tensors.push_back(plane_to_tensor(*p));
    std::vector<const Tensor*> ctx;
    for (const Tensor& t : tensors) ctx.push_back(&t);
    RawHeads raw = interpolator_forward(weights, id, scale, ctx, th, tw);
    return activate(raw, weights.config);
  }

  void ensure_workers() {
    const int w = std::max(1, std::min(threads, 64));
    if (static_cast<int>(builders.size()) < w) builders.resize(w);
  }

  // Mean updates for channel `ch` across all pixels of the subband, using the
  // already-coded channel planes of the same subband.
  static void apply_mean_updates(SubbandDist& dist, int ch, const Plane& target) {
    if (ch == 0) return;
    const int32_t* v1 = target.channel(0);
    const int32_t* v2 = target.channel(1);
    const size_t n = dist.pixels;
    for (size_t p = 0; p < n; ++p) update_means_channel(dist, ch, p, v1[p], ch == 2 ? v2[p] : 0);
  }

  void encode_subband(RangeEncoder& rc, InterpId id, int scale,
                      const std::vector<const Plane*>& ctx_planes, const Plane& target) {
    if (target.empty()) return;
    SubbandDist dist = prepare(id, scale, ctx_planes, target.height, target.width);
    ensure_workers();
    const size_t n = target.pixels();
    cdfs.resize(std::min(n, kCdfBlock));
    for (int ch = 0; ch < 3; ++ch) {
      apply_mean_updates(dist, ch, target);
      const SymbolSupport support = channel_support(target, ch);
      const int32_t* vals = target.channel(ch);
      for (size_t base = 0; base < n; base += kCdfBlock) {
        const size_t hi = std::min(n, base + kCdfBlock);
        parallel_blocks(hi - base, 256, threads, static_cast<int>(builders.size()),
                        [&](size_t b, size_t e, int w) {
                          for (size_t p = b; p < e; ++p) {
                            std::span<const double> pi(dist.pi_at(ch, base + p), dist.k);
                            std::span<const double> mu(dist.mu_at(ch, base + p), dist.k);
                            std::span<const double> sg(dist.sigma_at(ch, base + p), dist.k);
                            builders[w].build(pi, mu, sg, support, cdfs[p]);
                          }
                        });
        for (size_t p = base; p < hi; ++p) {
          const int sym = vals[p] - support.lo;
          if (sym < 0 || sym >= support.count())
            throw RangeError("encode: sample outside channel support");
          rc.encode(cdfs[p - base], sym);
        }
      }
    }
  }

  void decode_subband(RangeDecoder& rc, InterpId id, int scale,
                      const std::vector<const Plane*>& ctx_planes, Plane& target) {
    if (target.empty()) return;
    SubbandDist dist = prepare(id, scale, ctx_planes, target.height, target.width);
    ensure_workers();
    const size_t n = target.pixels();
    cdfs.resize(std::min(n, kCdfBlock));
    for (int ch = 0; ch < 3; ++ch) {
      apply_mean_updates(dist, ch, target);
      const SymbolSupport support = channel_support(target, ch);
      int32_t* vals = target.channel(ch);
      for (size_t base = 0; base < n; base += kCdfBlock) {
        const size_t hi = std::min(n, base + kCdfBlock);
        parallel_blocks(hi - base, 256, threads, static_cast<int>(builders.size()),
                        [&](size_t b, size_t e, int w) {
                          for (size_t p = b; p < e; ++p) {
                            std::span<const double> pi(dist.pi_at(ch, base + p), dist.k);
                            std::span<const double> mu(dist.mu_at(ch, base + p), dist.k);
                            std::span<const double> sg(dist.sigma_at(ch, base + p), dist.k);
                            builders[w].build(pi, mu, sg, support, cdfs[p]);
                          }
                        });
        for (size_t p = base; p < hi; ++p)
          vals[p] = rc.decode(cdfs[p - base]) + support.lo;
      }
    }
  }

  // Model bits of one subband (no coder); also the trainer's rate oracle.
  double estimate_subband(InterpId id, int scale, const std::vector<const Plane*>& ctx_planes,
                          const Plane& target) {
    if (target.empty()) return 0.0;
    SubbandDist dist = prepare(id, scale, ctx_planes, target.height, target.width);
    const size_t n = target.pixels();
    double bits = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      apply_mean_updates(dist, ch, target);
      const SymbolSupport support = channel_support(target, ch);
      const int32_t* vals = target.channel(ch);
      double partial = 0.0;
      for (size_t p = 0; p < n; ++p) {
        std::span<const double> pi(dist.pi_at(ch, p), dist.k);
        std::span<const double> mu(dist.mu_at(ch, p), dist.k);
        std::span<const double> sg(dist.sigma_at(ch, p), dist.k);
        partial += gmm_bits(vals[p], pi, mu, sg, support);
      }
      bits += partial;
    }
    return bits;
  }
};

Plane extract_coarsest_rgb(const Plane& rgb, int scales) {
  const int stride = 1 << scales;
  Plane out = make_rgb_plane((rgb.height + stride - 1) / stride, (rgb.width + stride - 1) / stride);
  for (int c = 0; c < 3; ++c)
    for (int u = 0; u < out.height; ++u)
      for (int v = 0; v < out.width; ++v) out.at(c, u, v) = rgb.at(c, u * stride, v * stride);
  return out;
}

void validate_rgb_image(const Plane& rgb) {
  if (rgb.empty()) throw ArgumentError("encode: empty image");
  if (rgb.height > kMaxDim || rgb.width > kMaxDim) throw ArgumentError("encode: image too large");
  for (int c = 0; c < 3; ++c) {
    if (rgb.lo[c] != 0 || rgb.hi[c] != 255) throw ArgumentError("encode: image must be 8-bit RGB");
    const int32_t* p = rgb.channel(c);
    for (size_t i = 0; i < rgb.pixels(); ++i)
      if (p[i] < 0 || p[i] > 255) throw RangeError("encode: sample outside [0,255]");
  }
}

}  // namespace

std::vector<uint8_t> encode(const Plane& rgb, const ICNNWeights& weights, const CodecOptions& opt,
                            EncodeStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_rgb_image(rgb);
  const int scales = weights.config.scales;

  const Plane ycc = plane_rgb_to_ycc(rgb);
  const Pyramid pyr = build_pyramid(ycc, scales);

  std::vector<uint8_t> out;
  out.insert(out.end(), kStreamMagic, kStreamMagic + 4);
  out.push_back(kStreamVersion);
  out.push_back(static_cast<uint8_t>(scales));
  append_u32(out, static_cast<uint32_t>(rgb.height));
  append_u32(out, static_cast<uint32_t>(rgb.width));
  append_u64(out, weights.checksum());
  for (uint32_t c : expected_symbol_counts(rgb.height, rgb.width, scales)) append_u32(out, c);
  const size_t header_bytes = out.size();

  // Coarsest subband as raw 8-bit RGB (sampled before color conversion).
  const Plane coarse_rgb = extract_coarsest_rgb(rgb, scales);
  BitSink sink;
  for (int c = 0; c < 3; ++c) {
    const int32_t* p = coarse_rgb.channel(c);
    for (size_t i = 0; i < coarse_rgb.pixels(); ++i)
      sink.write_fixed(static_cast<uint32_t>(p[i]), 8);
  }
  const std::vector<uint8_t> fixed = sink.take();
  out.insert(out.end(), fixed.begin(), fixed.end());

  SubbandCoder coder(weights, opt.threads);
  RangeEncoder rc;
  // Emitted-byte probes lag the true interval state by the coder's pending
  // bytes; close enough for per-scale reporting.
  std::vector<size_t> scale_bytes(static_cast<size_t>(scales), 0);
  size_t last_mark = 0;
  for (int i = scales; i >= 1; --i) {
    const Subbands& s = pyr.levels[i - 1];
    coder.encode_subband(rc, InterpId::X11, i, {&s.x00}, s.x11);
    coder.encode_subband(rc, InterpId::X01, i, {&s.x00, &s.x11}, s.x01);
    coder.encode_subband(rc, InterpId::X10, i, {&s.x00, &s.x11, &s.x01}, s.x10);
    scale_bytes[i - 1] = rc.emitted() - last_mark;
    last_mark = rc.emitted();
  }
  const std::vector<uint8_t> payload = rc.finish();
  out.insert(out.end(), payload.begin(), payload.end());
  scale_bytes[0] += payload.size() - last_mark;

  if (stats) {
    stats->header_bytes = header_bytes;
    stats->fixed_bytes = fixed.size();
    stats->coded_bytes = payload.size();
    stats->total_bytes = out.size();
    stats->scale_bytes = std::move(scale_bytes);
    stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

BitstreamHeader parse_header(std::span<const uint8_t> stream) {
  ByteReader r{stream};
  char magic[4];
  for (char& m : magic) m = static_cast<char>(r.u8());
  if (std::memcmp(magic, kStreamMagic, 4) != 0) throw FormatError("bad stream magic");
  BitstreamHeader h;
  h.version = r.u8();
  if (h.version != kStreamVersion)
    throw FormatError("unsupported stream version " + std::to_string(h.version));
  h.scales = r.u8();
  h.height = static_cast<int>(r.u32());
  h.width = static_cast<int>(r.u32());
  if (h.scales < 1 || h.scales > 30) throw FormatError("invalid scale count in header");
  if (h.height < 1 || h.width < 1 || h.height > kMaxDim || h.width > kMaxDim)
    throw FormatError("invalid image dimensions in header");
  h.weights_checksum = r.u64();
  h.symbol_counts.resize(static_cast<size_t>(h.scales) * 3);
  for (auto& c : h.symbol_counts) c = r.u32();
  return h;
}

Plane decode(std::span<const uint8_t> stream, const ICNNWeights& weights, const CodecOptions& opt) {
  const BitstreamHeader h = parse_header(stream);
  if (h.weights_checksum != weights.checksum())
    throw FormatError("stream was produced with a different weight set");
  if (h.scales != weights.config.scales)
    throw FormatError("stream scale count does not match weights config");
  const auto expected = expected_symbol_counts(h.height, h.width, h.scales);
  if (expected != h.symbol_counts) throw FormatError("header symbol counts inconsistent with shape");

  const int stride = 1 << h.scales;
  Plane coarse_rgb = make_rgb_plane((h.height + stride - 1) / stride,
                                    (h.width + stride - 1) / stride);
  const size_t fixed_size = coarse_rgb.pixels() * 3;
  // 5 = minimum range-coder payload (flush); checked before any subspan.
  if (stream.size() < h.byte_size() + fixed_size + 5)
    throw CorruptionError("stream truncated before payload");
  BitSource src(stream.subspan(h.byte_size()));
  for (int c = 0; c < 3; ++c) {
    int32_t* p = coarse_rgb.channel(c);
    for (size_t i = 0; i < coarse_rgb.pixels(); ++i)
      p[i] = static_cast<int32_t>(src.read_fixed(8));
  }
  src.align_to_byte();

  // Shapes of x00^(i-1) per scale so subband planes can be sized top-down.
  std::vector<std::pair<int, int>> parent_shapes(h.scales + 1);
  parent_shapes[0] = {h.height, h.width};
  for (int i = 1; i <= h.scales; ++i) {
    parent_shapes[i] = {ceil_div2(parent_shapes[i - 1].first),
                        ceil_div2(parent_shapes[i - 1].second)};
  }

  SubbandCoder coder(weights, opt.threads);
  RangeDecoder rc(stream.subspan(h.byte_size() + fixed_size));

  Plane x00 = plane_rgb_to_ycc(coarse_rgb);
  for (int i = h.scales; i >= 1; --i) {
    const auto [ph, pw] = parent_shapes[i - 1];
    const ScaleShapes ss = scale_shapes(ph, pw);
    Plane x11 = Plane(ss.h11, ss.w11);
    Plane x01 = Plane(ss.h01, ss.w01);
    Plane x10 = Plane(ss.h10, ss.w10);
    for (Plane* p : {&x11, &x01, &x10}) p->copy_ranges_from(x00);

    coder.decode_subband(rc, InterpId::X11, i, {&x00}, x11);
    coder.decode_subband(rc, InterpId::X01, i, {&x00, &x11}, x01);
    coder.decode_subband(rc, InterpId::X10, i, {&x00, &x11, &x01}, x10);
    x00 = merge(x00, x01, x10, x11);
  }
  return plane_ycc_to_rgb(x00);
}

RateReport estimate_bits(const Plane& rgb, const ICNNWeights& weights, const CodecOptions& opt) {
  validate_rgb_image(rgb);
  const int scales = weights.config.scales;
  const Plane ycc = plane_rgb_to_ycc(rgb);
  const Pyramid pyr = build_pyramid(ycc, scales);

  RateReport rep;
  rep.scales = scales;
  rep.image_pixels = rgb.pixels();
  rep.scale_bits.assign(static_cast<size_t>(scales), 0.0);
  rep.fixed_bits = static_cast<double>(pyr.coarsest().pixels()) * 3 * 8;
  BitstreamHeader h;
  h.symbol_counts = expected_symbol_counts(rgb.height, rgb.width, scales);
  rep.header_bytes = h.byte_size();

  SubbandCoder coder(weights, opt.threads);
  for (int i = scales; i >= 1; --i) {
    const Subbands& s = pyr.levels[i - 1];
    double bits = 0.0;
    bits += coder.estimate_subband(InterpId::X11, i, {&s.x00}, s.x11);
    bits += coder.estimate_subband(InterpId::X01, i, {&s.x00, &s.x11}, s.x01);
    bits += coder.estimate_subband(InterpId::X10, i, {&s.x00, &s.x11, &s.x01}, s.x10);
    rep.scale_bits[i - 1] = bits;
  }
  return rep;
}

}  // namespace llicti
