#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace monotomo::testing {

std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(MONOTOMO_SOURCE_DIR) / relative;
}

cli::RunConfig shipped_config(const std::string& name) {
  return cli::load_config(source_path("configs/" + name + ".ini"));
}

Eigen::VectorXd random_trace(const Discretization& disc, std::mt19937_64& gen, int modes) {
  std::normal_distribution<double> normal;
  std::vector<double> a(modes), b(modes);
  for (int n = 0; n < modes; ++n) {
    a[n] = normal(gen) / (n + 1);
    b[n] = normal(gen) / (n + 1);
  }
  BoundaryPotential f = sample_boundary(disc, [&](const Vec2& p) {
    const double t = std::atan2(p.y(), p.x());
    double v = 0.0;
    for (int n = 0; n < modes; ++n) v += a[n] * std::cos((n + 1) * t) + b[n] * std::sin((n + 1) * t);
    return v;
  });
  const Eigen::MatrixXd mass = boundary_mass_matrix(disc.mesh());
  return f.values / std::sqrt(f.values.dot(mass * f.values));
}

BoundaryPotential fourier_trace(const Discretization& disc, int n, double scale) {
  return sample_boundary(disc, [n](const Vec2& p) { return std::cos(n * std::atan2(p.y(), p.x())); }, scale);
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

RegionSamples::RegionSamples(const Region& region, double radius, int grid) : spacing_(2.0 * radius / (grid - 1)) {
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const Vec2 p(-radius + spacing_ * a, -radius + spacing_ * b);
      if (p.norm() < radius && region.contains(p)) points_.push_back(p);
    }
  }
  hull_ = convex_hull(points_);
}

double RegionSamples::distance_to_square(const Vec2& center, double half) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : points_) {
    const Vec2 q = (p - center).cwiseAbs() - Vec2(half, half);
    d = std::min(d, q.cwiseMax(0.0).norm());
  }
  return d;
}

bool RegionSamples::in_hull(const Vec2& p) const {
  if (hull_.size() < 3) return false;
  for (std::size_t k = 0; k < hull_.size(); ++k) {
    if (cross(hull_[k], hull_[(k + 1) % hull_.size()], p) < 0) return false;
  }
  return true;
}

std::vector<CellClass> classify_cells(const TestGrid& grid, const Region& region, double radius) {
  const RegionSamples samples(region, radius);
  const double side = grid.cell_side();
  std::vector<CellClass> out;
  for (int i = 0; i < grid.n * grid.n; ++i) {
    const Vec2 c = grid.cell_center(i);
    int hits = 0;
    for (int a = 0; a <= 8; ++a) {
      for (int b = 0; b <= 8; ++b) hits += region.contains(c + side * Vec2(a / 8.0 - 0.5, b / 8.0 - 0.5)) ? 1 : 0;
    }
    const double d = samples.distance_to_square(c, side / 2);
    if (hits == 81) {
      out.push_back(CellClass::Interior);
    } else if (d > side + samples.spacing()) {
      // Padding by one sample spacing keeps undersampling from labeling a
      // near cell as far.
      out.push_back(CellClass::Far);
    } else if (hits == 0 && d > 0.0) {
      out.push_back(CellClass::Disjoint);
    } else {
      out.push_back(CellClass::Boundary);
    }
  }
  return out;
}

std::vector<std::string> verdict_map(const TestGrid& grid, const std::vector<CellClass>& classes,
                                     const ReconstructionResult& result) {
  std::vector<std::string> rows;
  for (int row = 0; row < grid.n; ++row) {
    std::string line;
    for (int col = 0; col < grid.n; ++col) {
      const int i = row * grid.n + col;
      const bool kept = result.verdicts[i].kept;
      if (classes[i] == CellClass::Interior) line += kept ? '#' : '!';
      else if (classes[i] == CellClass::Far) line += kept ? 'X' : '.';
      else line += kept ? '+' : '.';
    }
    rows.push_back(line);
  }
  return rows;
}

}  // namespace monotomo::testing
