// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/coder.hpp"

#include <algorithm>

namespace llicti {

void BitSink::write_fixed(uint32_t value, int nbits) {
  if (nbits < 1 || nbits > 32) throw ArgumentError("write_fixed: nbits outside [1,32]");
  if (nbits < 32 && value >= (1u << nbits)) throw ArgumentError("write_fixed: value out of range");
  for (int i = nbits - 1; i >= 0; --i) {
    if (bitpos_ == 0) buf_.push_back(0);
    const uint32_t bit = (value >> i) & 1u;
    buf_.back() |= static_cast<uint8_t>(bit << (7 - bitpos_));
    bitpos_ = (bitpos_ + 1) & 7;
  }
}

void BitSink::align_to_byte() { bitpos_ = 0; }

uint32_t BitSource::read_fixed(int nbits) {
  if (nbits < 1 || nbits > 32) throw ArgumentError("read_fixed: nbits outside [1,32]");
  uint32_t v = 0;
  for (int i = 0; i < nbits; ++i) {
    if (pos_ >= data_.size()) throw CorruptionError("read_fixed past end of stream");
    const uint32_t bit = (data_[pos_] >> (7 - bitpos_)) & 1u;
    v = (v << 1) | bit;
    if (++bitpos_ == 8) {
      bitpos_ = 0;
      ++pos_;
    }
  }
  return v;
}

void BitSource::align_to_byte() {
  if (bitpos_ != 0) {
    bitpos_ = 0;
    ++pos_;
  }
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_ >> 24) != 0xFFu || (low_ >> 32) != 0) {
    const auto carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t b = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(b + carry));
      b = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::encode_span(uint32_t cum_lo, uint32_t cum_hi) {
  if (finished_) throw StateError("encode after finish");
  if (cum_lo >= cum_hi || cum_hi > kCdfTotal) throw ArgumentError("encode: bad cumulative span");
  range_ >>= kCdfTotalBits;
  low_ += static_cast<uint64_t>(cum_lo) * range_;
  range_ *= cum_hi - cum_lo;
  while (range_ < (1u << 24)) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode(const QuantizedCdf& cdf, int sym_index) {
  if (sym_index < 0 || sym_index >= cdf.alphabet())
    throw ArgumentError("encode: symbol index outside alphabet");
  encode_span(cdf.c[sym_index], cdf.c[sym_index + 1]);
}

std::vector<uint8_t> RangeEncoder::finish() {
  if (!finished_) {
    for (int i = 0; i < 5; ++i) shift_low();
    finished_ = true;
  }
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> data) : data_(data) {
  // First byte is the encoder's initial cache (always 0); skip it and load
  // the next four.
  next_byte();
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ >= data_.size()) throw CorruptionError("range decoder ran past end of stream");
  return data_[pos_++];
}

int RangeDecoder::decode(const QuantizedCdf& cdf) {
  range_ >>= kCdfTotalBits;
  uint32_t target = code_ / range_;
  if (target >= kCdfTotal) target = kCdfTotal - 1;

  // Largest s with c[s] <= target; c is strictly increasing.
  const auto it = std::upper_bound(cdf.c.begin(), cdf.c.end(), target);
  const int sym = static_cast<int>(it - cdf.c.begin()) - 1;

  const uint32_t lo = cdf.c[sym], hi = cdf.c[sym + 1];
  code_ -= lo * range_;
  range_ *= hi - lo;
  while (range_ < (1u << 24)) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return sym;
}

}  // namespace llicti
