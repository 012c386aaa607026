// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#pragma once

#include <vector>

#include "llicti/plane.hpp"

namespace llicti {

// The four parity subbands of one even/odd split. x00 holds the even/even
// samples and takes the ceil share on both axes, so x00 of a 1x1 plane is
// 1x1 and the recursion stays closed for any input size.
struct Subbands {
  Plane x00, x01, x10, x11;
};

// x00[u,v]=p[2u,2v]  x01[u,v]=p[2u,2v+1]  x10[u,v]=p[2u+1,2v]  x11[u,v]=p[2u+1,2v+1]
Subbands split(const Plane& parent);

// Exact inverse of split; throws ShapeError when the four shapes cannot have
// come from one parent.
Plane merge(const Plane& x00, const Plane& x01, const Plane& x10, const Plane& x11);

struct Pyramid {
  int scales = 0;
  // levels[i-1] holds scale i: the split of x00^(i-1).
  std::vector<Subbands> levels;

  const Plane& coarsest() const { return levels.back().x00; }
};

Pyramid build_pyramid(const Plane& image, int scales);

// Reassembles x00^(0) from a pyramid whose subbands are all populated.
Plane reconstruct(const Pyramid& pyr);

}  // namespace llicti
