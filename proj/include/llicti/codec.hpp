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
#include <string>
#include <vector>

#include "llicti/interpolator.hpp"
#include "llicti/plane.hpp"

namespace llicti {

inline constexpr char kStreamMagic[4] = {'L', 'L', 'T', 'I'};
inline constexpr uint8_t kStreamVersion = 1;

struct BitstreamHeader {
  uint8_t version = kStreamVersion;
  int scales = 0;
  int height = 0;
  int width = 0;
  uint64_t weights_checksum = 0;
  // Coding order: scale S..1, subbands x11, x01, x10; 3 channels per pixel.
  std::vector<uint32_t> symbol_counts;

  size_t byte_size() const { return 4 + 1 + 1 + 4 + 4 + 8 + symbol_counts.size() * 4; }
};

struct CodecOptions {
  int threads = 1;
};

struct EncodeStats {
  size_t header_bytes = 0;
  size_t fixed_bytes = 0;
  size_t coded_bytes = 0;   // range-coded payload incl. flush
  size_t total_bytes = 0;
  // Actual payload bytes attributed per scale, index 0 = scale 1.
  std::vector<size_t> scale_bytes;
  double seconds = 0.0;
};

// Model-estimated rate (no entropy coder run).
struct RateReport {
  int scales = 0;
  size_t image_pixels = 0;
  std::vector<double> scale_bits;  // index 0 = scale 1; sum of the 3 subbands
  double fixed_bits = 0.0;
  size_t header_bytes = 0;

  double model_bits() const {
    double s = 0.0;
    for (double b : scale_bits) s += b;
    return s;
  }
  double total_bits() const { return model_bits() + fixed_bits; }
  double bpp() const { return total_bits() / static_cast<double>(image_pixels); }
  double bpsp() const { return bpp() / 3.0; }
  // Container prediction: header + fixed segment + payload + coder flush.
  double estimated_bytes() const {
    return static_cast<double>(header_bytes) + fixed_bits / 8.0 + model_bits() / 8.0 + 5.0;
  }
};

std::vector<uint8_t> encode(const Plane& rgb, const ICNNWeights& weights,
                            const CodecOptions& opt = {}, EncodeStats* stats = nullptr);

Plane decode(std::span<const uint8_t> stream, const ICNNWeights& weights,
             const CodecOptions& opt = {});

// Parses and validates only the container header (magic/version/shape).
BitstreamHeader parse_header(std::span<const uint8_t> stream);

RateReport estimate_bits(const Plane& rgb, const ICNNWeights& weights,
                         const CodecOptions& opt = {});

}  // namespace llicti
