#include "codesign/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace codesign {

std::string_view to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::flat: return "flat";
    case TerrainKind::rough: return "rough";
    case TerrainKind::stairs: return "stairs";
    case TerrainKind::ramp: return "ramp";
  }
  return "unknown";
}

TerrainKind terrain_kind_from_string(std::string_view name) {
  if (name == "flat") return TerrainKind::flat;
  if (name == "rough") return TerrainKind::rough;
  if (name == "stairs") return TerrainKind::stairs;
  if (name == "ramp") return TerrainKind::ramp;
  throw std::invalid_argument("unknown terrain '" + std::string(name) +
                              "' (expected flat, rough, stairs or ramp)");
}

namespace {

void require_extent(const Extent& e) {
  if (!(e.min_m < e.max_m)) throw TerrainError("terrain extent is empty");
}

void require_mu(double mu) {
  if (!(mu > 0.0)) throw TerrainError("friction coefficient must be positive");
}

// Catmull-Rom weights for the four neighbours of a sample at fraction s.
struct Cubic {
  double p0, p1, p2, p3;
  double value(double s) const {
    return p1 + 0.5 * s * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                          s * (3.0 * (p1 - p2) + p3 - p0)));
  }
  double derivative(double s) const {
    return 0.5 * (p2 - p0 + s * (2.0 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                                 3.0 * s * (3.0 * (p1 - p2) + p3 - p0)));
  }
};

}  // namespace

double Terrain::clamp(double x) const { return std::clamp(x, extent_.min_m, extent_.max_m); }

double Terrain::height(double x) const {
  x = clamp(x);
  switch (kind_) {
    case TerrainKind::flat:
      return 0.0;
    case TerrainKind::rough: {
      const double u = (x - extent_.min_m) / spacing_;
      const auto i = static_cast<std::size_t>(u);
      const Cubic c{nodes_[i], nodes_[i + 1], nodes_[i + 2], nodes_[i + 3]};
      return c.value(u - static_cast<double>(i));
    }
    case TerrainKind::stairs:
      return -step_height_ * std::floor(std::max(x, 0.0) / step_depth_);
    case TerrainKind::ramp:
      return x >= 0.0 ? grade_ * x : 0.0;
  }
  return 0.0;
}

double Terrain::slope(double x) const {
  if (x < extent_.min_m || x > extent_.max_m) return 0.0;
  switch (kind_) {
    case TerrainKind::rough: {
      const double u = (x - extent_.min_m) / spacing_;
      const auto i = static_cast<std::size_t>(u);
      const Cubic c{nodes_[i], nodes_[i + 1], nodes_[i + 2], nodes_[i + 3]};
      return c.derivative(u - static_cast<double>(i)) / spacing_;
    }
    case TerrainKind::ramp:
      return x >= 0.0 ? grade_ : 0.0;
    default:
      return 0.0;
  }
}

double Terrain::friction(double x) const {
  if (kind_ == TerrainKind::ramp && clamp(x) >= 0.0) return mu_low_;
  return mu_;
}

void Terrain::corners(double x0, double x1, std::vector<Eigen::Vector2d>& out) const {
  if (kind_ != TerrainKind::stairs) return;
  x0 = std::max(x0, extent_.min_m);
  x1 = std::min(x1, extent_.max_m);
  const double first = std::max(1.0, std::ceil(x0 / step_depth_));
  for (double k = first; k * step_depth_ <= x1; k += 1.0) {
    out.emplace_back(k * step_depth_, -(k - 1.0) * step_height_);
  }
}

Terrain make_flat(double mu, Extent extent) {
  require_mu(mu);
  require_extent(extent);
  Terrain t;
  t.kind_ = TerrainKind::flat;
  t.extent_ = extent;
  t.mu_ = t.mu_low_ = mu;
  return t;
}

Terrain make_rough(std::uint64_t seed, double amplitude_m, double correlation_m, double mu,
                   Extent extent) {
  if (!(amplitude_m > 0.0 && correlation_m > 0.0)) {
    throw TerrainError("rough terrain: amplitude and correlation length must be positive");
  }
  require_mu(mu);
  require_extent(extent);
  Terrain t;
  t.kind_ = TerrainKind::rough;
  t.extent_ = extent;
  t.mu_ = t.mu_low_ = mu;
  t.spacing_ = correlation_m;
  const auto cells = static_cast<std::size_t>(std::ceil((extent.max_m - extent.min_m) / correlation_m));
  // One lattice node before the extent and two after so every query has four neighbours.
  t.nodes_.resize(cells + 4);
  std::mt19937_64 rng(seed);
  for (double& v : t.nodes_) v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;

  const std::size_t samples = cells * 16;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k <= samples; ++k) {
    const double x = extent.min_m + (extent.max_m - extent.min_m) * static_cast<double>(k) /
                                        static_cast<double>(samples);
    const double h = t.height(x);
    sum_sq += h * h;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(samples + 1));
  for (double& v : t.nodes_) v *= amplitude_m / rms;
  return t;
}

Terrain make_stairs(double step_height_m, double step_depth_m, double mu, Extent extent) {
  if (!(step_height_m > 0.0 && step_depth_m > 0.0)) {
    throw TerrainError("stairs: step height and depth must be positive");
  }
  require_mu(mu);
  require_extent(extent);
  Terrain t;
  t.kind_ = TerrainKind::stairs;
  t.extent_ = extent;
  t.mu_ = t.mu_low_ = mu;
  t.step_height_ = step_height_m;
  t.step_depth_ = step_depth_m;
  return t;
}

Terrain make_ramp(double slope_rad, double mu_low, double mu_default, Extent extent) {
  if (!(slope_rad > 0.0 && slope_rad < 0.5 * std::numbers::pi)) {
    throw TerrainError("ramp: slope must lie in (0, pi/2)");
  }
  require_mu(mu_low);
  require_mu(mu_default);
  require_extent(extent);
  Terrain t;
  t.kind_ = TerrainKind::ramp;
  t.extent_ = extent;
  t.mu_ = mu_default;
  t.mu_low_ = mu_low;
  t.grade_ = std::tan(slope_rad);
  return t;
}

}  // namespace codesign
