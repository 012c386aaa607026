// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#include "llicti/pyramid.hpp"

#include <string>

namespace llicti {

Subbands split(const Plane& parent) {
  if (parent.empty()) throw ArgumentError("split: empty plane");
  const int h = parent.height, w = parent.width;
  const int he = ceil_div2(h), ho = h / 2;
  const int we = ceil_div2(w), wo = w / 2;

  Subbands s;
  s.x00 = Plane(he, we);
  s.x01 = Plane(he, wo);
  s.x10 = Plane(ho, we);
  s.x11 = Plane(ho, wo);
  for (Plane* p : {&s.x00, &s.x01, &s.x10, &s.x11}) p->copy_ranges_from(parent);

  for (int c = 0; c < Plane::kChannels; ++c) {
    for (int u = 0; u < h; ++u) {
      Plane& even = (u & 1) ? s.x10 : s.x00;
      Plane& odd = (u & 1) ? s.x11 : s.x01;
      const int su = u >> 1;
      for (int v = 0; v < w; ++v) {
        if (v & 1)
          odd.at(c, su, v >> 1) = parent.at(c, u, v);
        else
          even.at(c, su, v >> 1) = parent.at(c, u, v);
      }
    }
  }
  return s;
}

Plane merge(const Plane& x00, const Plane& x01, const Plane& x10, const Plane& x11) {
  const int h = x00.height + x10.height;
  const int w = x00.width + x01.width;
  auto bad = [&](const char* name) {
    throw ShapeError(std::string("merge: subband ") + name + " inconsistent with parent " +
                     std::to_string(h) + "x" + std::to_string(w));
  };
  if (x00.height != ceil_div2(h) || x00.width != ceil_div2(w)) bad("x00");
  if (x01.height != ceil_div2(h) || x01.width != w / 2) bad("x01");
  if (x10.height != h / 2 || x10.width != ceil_div2(w)) bad("x10");
  if (x11.height != h / 2 || x11.width != w / 2) bad("x11");

  Plane out(h, w);
  out.copy_ranges_from(x00);
  for (int c = 0; c < Plane::kChannels; ++c) {
    for (int u = 0; u < h; ++u) {
      const Plane& even = (u & 1) ? x10 : x00;
      const Plane& odd = (u & 1) ? x11 : x01;
      const int su = u >> 1;
      for (int v = 0; v < w; ++v)
        out.at(c, u, v) = (v & 1) ? odd.at(c, su, v >> 1) : even.at(c, su, v >> 1);
    }
  }
  return out;
}

Pyramid build_pyramid(const Plane& image, int scales) {
  if (scales < 1) throw ArgumentError("build_pyramid: scales must be >= 1");
  if (image.empty()) throw ArgumentError("build_pyramid: empty image");
  Pyramid pyr;
  pyr.scales = scales;
  pyr.levels.reserve(scales);
  const Plane* cur = &image;
  for (int i = 0; i < scales; ++i) {
    pyr.levels.push_back(split(*cur));
    cur = &pyr.levels.back().x00;
  }
  return pyr;
}

Plane reconstruct(const Pyramid& pyr) {
  Plane acc = pyr.coarsest();
  for (int i = pyr.scales - 1; i >= 0; --i) {
    const Subbands& s = pyr.levels[i];
    acc = merge(acc, s.x01, s.x10, s.x11);
  }
  return acc;
}

}  // namespace llicti
