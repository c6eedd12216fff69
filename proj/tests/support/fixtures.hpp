#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "monotomo/inversion.hpp"

namespace monotomo::testing {

/// Shipped configuration under configs/.
cli::RunConfig shipped_config(const std::string& name);
std::filesystem::path source_path(const std::string& relative);

/// Zero-mean trace with `modes` random Fourier modes, unit boundary-mass norm.
Eigen::VectorXd random_trace(const Discretization& disc, std::mt19937_64& gen, int modes = 6);

/// cos(n theta) on the boundary nodes (not normalized).
BoundaryPotential fourier_trace(const Discretization& disc, int n, double scale = 1.0);

/// Sampled picture of a region inside the disk, for oracle geometry.
class RegionSamples {
 public:
  RegionSamples(const Region& region, double radius, int grid = 301);

  /// Distance from the axis-aligned square (center, half side) to the sampled
  /// region; infinity when the region has no samples.
  double distance_to_square(const Vec2& center, double half) const;
  /// Whether p lies in the convex hull of the samples.
  bool in_hull(const Vec2& p) const;
  /// Grid spacing of the samples.
  double spacing() const { return spacing_; }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<Vec2> points_;
  std::vector<Vec2> hull_;  // counterclockwise
  double spacing_;
};

enum class CellClass {
  Interior,  // every one of 9x9 sample points lies in A
  Far,       // farther than one cell side from A
  Disjoint,  // no sample point in A, not far
  Boundary,  // anything else
};

std::vector<CellClass> classify_cells(const TestGrid& grid, const Region& region, double radius);

/// Map row per grid row; '#' kept interior, '+' kept other, '.' discarded,
/// '!' interior discarded, 'X' far kept.
std::vector<std::string> verdict_map(const TestGrid& grid, const std::vector<CellClass>& classes,
                                     const ReconstructionResult& result);

}  // namespace monotomo::testing
