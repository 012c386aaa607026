// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#pragma once

#include "llicti/common.hpp"
#include "llicti/plane.hpp"

namespace llicti {

struct RgbPixel {
  int r = 0, g = 0, b = 0;
  bool operator==(const RgbPixel&) const = default;
};

// y in [0,255]; co,cg in [-255,255]. Round-trips exactly with RgbPixel.
struct YccPixel {
  int y = 0, co = 0, cg = 0;
  bool operator==(const YccPixel&) const = default;
};

// YCoCg-R lifting. The halving steps must round toward -inf so the inverse
// can recover the exact intermediates from negative values.
inline YccPixel rgb_to_ycocgr(RgbPixel p) {
  if (p.r < 0 || p.r > 255 || p.g < 0 || p.g > 255 || p.b < 0 || p.b > 255)
    throw RangeError("rgb component outside [0,255]");
  int co = p.r - p.b;
  int t = p.b + floor_div2(co);
  int cg = p.g - t;
  int y = t + floor_div2(cg);
  return {y, co, cg};
}

inline RgbPixel ycocgr_to_rgb(YccPixel p) {
  if (p.y < 0 || p.y > 255 || p.co < -255 || p.co > 255 || p.cg < -255 || p.cg > 255)
    throw RangeError("ycocg component outside declared range");
  int t = p.y - floor_div2(p.cg);
  int g = p.cg + t;
  int b = t - floor_div2(p.co);
  int r = b + p.co;
  return {r, g, b};
}

// Whole-plane converters. Channel order of the result: Y, Co, Cg.
Plane plane_rgb_to_ycc(const Plane& rgb);
Plane plane_ycc_to_rgb(const Plane& ycc);

}  // namespace llicti
