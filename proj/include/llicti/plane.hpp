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

// One integer-valued image: 3 channels in planar layout, each channel with a
// declared value range. Empty planes (height or width 0) are legal; they show
// up as subbands of one-pixel-wide inputs and carry no samples.
struct Plane {
  int height = 0;
  int width = 0;
  static constexpr int kChannels = 3;
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{255, 255, 255};
  std::vector<int32_t> data;  // [c][u][v], c-major

  Plane() = default;
  Plane(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0) {
    if (h < 0 || w < 0) throw ArgumentError("negative plane dimensions");
  }

  bool empty() const { return height == 0 || width == 0; }
  size_t pixels() const { return static_cast<size_t>(height) * width; }

  int32_t& at(int c, int u, int v) {
    return data[(static_cast<size_t>(c) * height + u) * width + v];
  }
  int32_t at(int c, int u, int v) const {
    return data[(static_cast<size_t>(c) * height + u) * width + v];
  }
  const int32_t* channel(int c) const { return data.data() + static_cast<size_t>(c) * height * width; }
  int32_t* channel(int c) { return data.data() + static_cast<size_t>(c) * height * width; }

  // Declared ranges travel with the data through split/merge.
  void copy_ranges_from(const Plane& p) {
    lo = p.lo;
    hi = p.hi;
  }

  bool same_content(const Plane& o) const {
    return height == o.height && width == o.width && data == o.data;
  }
};

inline Plane make_rgb_plane(int h, int w) {
  Plane p(h, w);
  p.lo = {0, 0, 0};
  p.hi = {255, 255, 255};
  return p;
}

inline Plane make_ycc_plane(int h, int w) {
  Plane p(h, w);
  p.lo = {0, -255, -255};
  p.hi = {255, 255, 255};
  return p;
}

}  // namespace llicti
