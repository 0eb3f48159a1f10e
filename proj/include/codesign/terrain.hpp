#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace codesign {

enum class TerrainKind { flat, rough, stairs, ramp };

std::string_view to_string(TerrainKind kind);
/// Throws std::invalid_argument for an unknown name.
TerrainKind terrain_kind_from_string(std::string_view name);

class TerrainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Extent {
  double min_m = -2.0;
  double max_m = 8.0;
};

/// Sagittal-plane terrain: height h(x) and friction mu(x). Queries outside the
/// extent are clamped to the boundary. Immutable after construction.
class Terrain {
 public:
  TerrainKind kind() const { return kind_; }
  const Extent& extent() const { return extent_; }

  double height(double x) const;
  double slope(double x) const;  // dh/dx
  double friction(double x) const;

  /// Convex surface corners (stair nosings) with x in [x0, x1].
  void corners(double x0, double x1, std::vector<Eigen::Vector2d>& out) const;

  friend Terrain make_flat(double mu, Extent extent);
  friend Terrain make_rough(std::uint64_t seed, double amplitude_m, double correlation_m,
                            double mu, Extent extent);
  friend Terrain make_stairs(double step_height_m, double step_depth_m, double mu,
                             Extent extent);
  friend Terrain make_ramp(double slope_rad, double mu_low, double mu_default, Extent extent);

 private:
  Terrain() = default;
  double clamp(double x) const;

  TerrainKind kind_ = TerrainKind::flat;
  Extent extent_;
  double mu_ = 0.9;
  double mu_low_ = 0.9;
  // rough: Catmull-Rom samples on a lattice
  std::vector<double> nodes_;
  double spacing_ = 1.0;
  // stairs
  double step_height_ = 0.0;
  double step_depth_ = 1.0;
  // ramp
  double grade_ = 0.0;
};

Terrain make_flat(double mu, Extent extent = {});
/// Value-noise bumps on a lattice spaced one correlation length apart,
/// interpolated with C1 cubics and scaled to the requested RMS height.
Terrain make_rough(std::uint64_t seed, double amplitude_m, double correlation_m, double mu,
                   Extent extent = {});
/// Descending staircase for x >= 0, flat approach for x < 0.
Terrain make_stairs(double step_height_m, double step_depth_m, double mu, Extent extent = {});
/// Ascending ramp with reduced friction for x >= 0, flat approach for x < 0.
Terrain make_ramp(double slope_rad, double mu_low, double mu_default = 0.9, Extent extent = {});

}  // namespace codesign
