#include <cmath>
#include <numbers>
#include <stdexcept>

#include "monotomo/geometry.hpp"

namespace monotomo::shapes {

namespace {

template <class Curve>
Region sampled(Vec2 center, double scale, int vertices, Curve curve) {
  if (vertices < 64) throw std::invalid_argument("shape polygons use at least 64 vertices");
  std::vector<Vec2> pts;
  pts.reserve(vertices);
  for (int k = 0; k < vertices; ++k) {
    const double t = 2.0 * std::numbers::pi * k / vertices;
    pts.push_back(center + scale * curve(t));
  }
  return Region::polygon(std::move(pts));
}

}  // namespace

// Bilobed curve r(t) = 1 + 0.5 cos 2t, normalized so the lobes reach `scale`.
Region peanut(Vec2 center, double scale, int vertices) {
  return sampled(center, scale, vertices, [](double t) {
    const double r = (1.0 + 0.5 * std::cos(2.0 * t)) / 1.5;
    return Vec2(r * std::cos(t), r * std::sin(t));
  });
}

// Kite curve (cos t + 0.65 cos 2t - 0.65, 1.5 sin t), recentered and scaled
// to unit half-height.
Region kite(Vec2 center, double scale, int vertices) {
  return sampled(center, scale, vertices, [](double t) {
    const double x = std::cos(t) + 0.65 * std::cos(2.0 * t) - 0.65;
    const double y = 1.5 * std::sin(t);
    return Vec2((x + 0.4) / 1.5, y / 1.5);
  });
}

// Teardrop (2 sin(t/2), -sin t), halved; the corner sits on the -x side.
Region droplet(Vec2 center, double scale, int vertices) {
  return sampled(center, scale, vertices, [](double t) {
    return Vec2(std::sin(t / 2.0) - 0.5, -0.5 * std::sin(t));
  });
}

Region hollow_circle(Vec2 center, double outer_radius, double inner_radius) {
  if (!(inner_radius > 0.0 && inner_radius < outer_radius)) {
    throw std::invalid_argument("hollow circle needs 0 < inner < outer radius");
  }
  return Region::intersection(Region::circle(center, outer_radius),
                              Region::complement(Region::circle(center, inner_radius)));
}

}  // namespace monotomo::shapes
