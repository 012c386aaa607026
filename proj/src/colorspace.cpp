// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/colorspace.hpp"

namespace llicti {

Plane plane_rgb_to_ycc(const Plane& rgb) {
  Plane out = make_ycc_plane(rgb.height, rgb.width);
  const size_t n = rgb.pixels();
  const int32_t* r = rgb.channel(0);
  const int32_t* g = rgb.channel(1);
  const int32_t* b = rgb.channel(2);
  int32_t* y = out.channel(0);
  int32_t* co = out.channel(1);
  int32_t* cg = out.channel(2);
  for (size_t i = 0; i < n; ++i) {
    YccPixel p = rgb_to_ycocgr({r[i], g[i], b[i]});
    y[i] = p.y;
    co[i] = p.co;
    cg[i] = p.cg;
  }
  return out;
}

Plane plane_ycc_to_rgb(const Plane& ycc) {
  Plane out = make_rgb_plane(ycc.height, ycc.width);
  const size_t n = ycc.pixels();
  const int32_t* y = ycc.channel(0);
  const int32_t* co = ycc.channel(1);
  const int32_t* cg = ycc.channel(2);
  int32_t* r = out.channel(0);
  int32_t* g = out.channel(1);
  int32_t* b = out.channel(2);
  for (size_t i = 0; i < n; ++i) {
    RgbPixel p = ycocgr_to_rgb({y[i], co[i], cg[i]});
    r[i] = p.r;
    g[i] = p.g;
    b[i] = p.b;
  }
  return out;
}

}  // namespace llicti
