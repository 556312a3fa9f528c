#pragma once

#include "nogap/grid.hpp"

namespace nogap {

// x^2 + y^2 - r^2 on [-1, 1]^2.
GridField circle_field(int n, double r = 0.5);
// x - 0.5 on the unit square.
GridField slab_field(int n);
// s^3 - 0.125 on (0, 2).
GridField cube_field_1d(int n);

// w = s^3 on (0,1] continued as a positive C^1 profile vanishing at s = 2; z = -s on (0,1]
// continued linearly to z(2) = 0. z is not compactly supported.
struct SharpnessFixture {
  GridField w;
  GridField z;
};
SharpnessFixture sharpness_fixture(int n);

}  // namespace nogap
