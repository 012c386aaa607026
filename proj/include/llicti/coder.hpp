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

#include "llicti/probmodel.hpp"

namespace llicti {

// Bit-level writer/reader for fixed-length codes. Bits are packed MSB-first
// within each byte.
class BitSink {
 public:
  void write_fixed(uint32_t value, int nbits);
  void align_to_byte();
  const std::vector<uint8_t>& bytes() const { return buf_; }
  std::vector<uint8_t> take() {
    align_to_byte();
    return std::move(buf_);
  }

 private:
  std::vector<uint8_t> buf_;
  int bitpos_ = 0;  // bits already used in buf_.back()
};

class BitSource {
 public:
  explicit BitSource(std::span<const uint8_t> data) : data_(data) {}
  uint32_t read_fixed(int nbits);
  void align_to_byte();
  size_t byte_pos() const { return pos_; }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  int bitpos_ = 0;
};

// Byte-wise renormalizing range coder, 32-bit range and carry propagation
// through a cached byte plus a pending-0xFF run. CDF totals are fixed at
// 2^16 (kCdfTotal); the range stays >= 2^24 between symbols, so the
// per-symbol truncation loss is bounded by 2^-8 of the interval.
//
// The stream has no in-band terminator: the caller must know the symbol
// count (the bitstream header carries it).
class RangeEncoder {
 public:
  void encode(const QuantizedCdf& cdf, int sym_index);
  void encode_span(uint32_t cum_lo, uint32_t cum_hi);
  // Flushes the remaining state (5 bytes) and returns the stream.
  std::vector<uint8_t> finish();
  size_t emitted() const { return out_.size(); }

 private:
  void shift_low();

  std::vector<uint8_t> out_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;  // absorbs the initial zero cache byte
  bool finished_ = false;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> data);
  int decode(const QuantizedCdf& cdf);
  size_t consumed() const { return pos_; }

 private:
  uint8_t next_byte();

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

}  // namespace llicti
