#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "monotomo/potentials.hpp"

namespace monotomo {

namespace {

// Half-plane beyond the tangent line of T with outward normal n, pushed out
// by a hair so that no centroid of T can satisfy it. Empty when it misses
// the domain.
std::optional<Region> tangent_half_plane(const Region& T, const Vec2& n, double radius) {
  const auto h = T.support(n);
  if (!h) throw std::invalid_argument("fictitious_anomalies: test anomaly must be bounded");
  const double offset = *h + 1e-9 * radius;
  if (offset >= radius) return std::nullopt;
  return Region::half_plane(offset * n, n);
}

}  // namespace

std::vector<Region> fictitious_anomalies(const Region& T, const Mesh& domain, FictitiousStyle style, int directions) {
  if (directions < 1) throw std::invalid_argument("fictitious_anomalies: directions must be positive");
  const double radius = domain.radius();
  const auto rmax = T.max_radius();
  if (!rmax) throw std::invalid_argument("fictitious_anomalies: test anomaly must be bounded");
  if (*rmax >= radius * (1.0 - 1e-12)) throw std::invalid_argument("fictitious_anomalies: test anomaly touches the boundary");

  std::vector<std::optional<Region>> halves;
  halves.reserve(directions);
  for (int m = 0; m < directions; ++m) {
    const double t = 2.0 * std::numbers::pi * m / directions;
    halves.push_back(tangent_half_plane(T, Vec2(std::cos(t), std::sin(t)), radius));
  }

  std::vector<Region> out;
  if (style == FictitiousStyle::ConvexTangent) {
    for (auto& h : halves) {
      if (h) out.push_back(std::move(*h));
    }
    return out;
  }
  // Partner a quarter turn away: adjacent sides for axis-aligned squares.
  const int quarter = std::max(1, static_cast<int>(std::lround(directions / 4.0)));
  if (directions < 2) return out;
  for (int m = 0; m < directions; ++m) {
    const auto& a = halves[m];
    const auto& b = halves[(m + quarter) % directions];
    if (a && b) out.push_back(Region::union_of({*a, *b}));
  }
  return out;
}

}  // namespace monotomo
