#include "nogap/field_fixtures.hpp"

namespace nogap {

GridField circle_field(int n, double r) {
  return GridField::sample(Grid::square(n, Box{-1.0, 1.0, -1.0, 1.0}),
                           [r](Point p) { return p.x * p.x + p.y * p.y - r * r; });
}

GridField slab_field(int n) {
  return GridField::sample(Grid::square(n), [](Point p) { return p.x - 0.5; });
}

GridField cube_field_1d(int n) {
  return GridField::sample(Grid::interval(n, 0.0, 2.0),
                           [](Point p) { return p.x * p.x * p.x - 0.125; });
}

SharpnessFixture sharpness_fixture(int n) {
  const Grid g = Grid::interval(n, 0.0, 2.0);
  auto w = GridField::sample(g, [](Point p) {
    const double s = p.x;
    if (s <= 1.0) return s * s * s;
    const double t = s - 1.0;
    return ((3.0 * t - 7.0) * t + 3.0) * t + 1.0;
  });
  auto z = GridField::sample(g, [](Point p) { return p.x <= 1.0 ? -p.x : -(2.0 - p.x); });
  return {std::move(w), std::move(z)};
}

}  // namespace nogap
