// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace llicti {

// Error hierarchy. Every failure surfaced to callers derives from Error so
// the CLI can map it onto a one-line "error: <kind>: <msg>" diagnostic.
struct Error : std::runtime_error {
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& m) : Error("argument", m) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& m) : Error("range", m) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format", m) {}
};
struct CorruptionError : Error {
  explicit CorruptionError(const std::string& m) : Error("corruption", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};
struct StateError : Error {
  explicit StateError(const std::string& m) : Error("state", m) {}
};
struct CapacityError : Error {
  explicit CapacityError(const std::string& m) : Error("capacity", m) {}
};

// Floor division by two (rounds toward -inf, also for negatives).
constexpr int floor_div2(int x) { return x >> 1; }

constexpr int ceil_div2(int x) { return (x + 1) >> 1; }

// FNV-1a, used to fingerprint weight payloads so bitstreams can be tied to
// the exact weight set that produced them.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic RNG helpers. std::mt19937_64 is portable; the distributions
// in <random> are not, so derive uniforms from raw engine output ourselves.
inline double u64_to_unit_double(uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace llicti
