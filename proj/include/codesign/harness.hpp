#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "codesign/config.hpp"
#include "codesign/metrics.hpp"
#include "codesign/optimizer.hpp"

// Orchestration: per-terrain co-design runs, cross-evaluation, geometry
// export and the text report.
namespace codesign::harness {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<TerrainKind, 4> kAllTerrains = {
    TerrainKind::flat, TerrainKind::rough, TerrainKind::stairs, TerrainKind::ramp};

// Published hardware results of the original platform. Different simulator
// and scale, so these annotate reports and are never compared against.
struct ReferenceRow {
  TerrainKind terrain;
  double eop_efficiency_m_per_j;
  double eop_speed_m_per_s;
  double sop_efficiency_m_per_j;
  double sop_speed_m_per_s;
};

struct ReferenceTable {
  static constexpr double nominal_efficiency_m_per_j = 0.016;
  static constexpr double nominal_speed_m_per_s = 0.52;
  static constexpr std::array<ReferenceRow, 4> rows = {{
      {TerrainKind::flat, 0.0248, 0.685, 0.00829, 2.963},
      {TerrainKind::rough, 0.0202, 1.078, 0.00522, 2.521},
      {TerrainKind::stairs, 0.0208, 1.138, 0.01527, 2.183},
      {TerrainKind::ramp, 0.0089, 0.069, 0.00182, 1.276},
  }};
  static const ReferenceRow& row(TerrainKind terrain);
};

inline constexpr const char* kReferenceLabel =
    "published reference (different simulator, not a target)";

/// One trial of a design on a terrain followed by the metric. A degenerate
/// (zero-energy) trial scores worst_case().
metrics::ObjectiveValue evaluate(const Design& design, TerrainKind terrain, const RunConfig& config,
                                 int repetition = 0);

struct CodesignRun {
  TerrainKind terrain = TerrainKind::flat;
  opt::OptHistory history;
  metrics::ObjectiveValue nominal;
  std::filesystem::path dir;
};

/// Optimizes the design for one terrain and writes trial_log.csv,
/// best_design.json, summary.json and summary.txt under out_dir/<terrain>/.
CodesignRun run_codesign(const RunConfig& config, TerrainKind terrain,
                         const std::filesystem::path& out_dir);

void write_history_csv(std::ostream& out, const opt::OptHistory& history);

/// Reads a design record: either a bare design object or an object with a
/// "design" member. Throws HarnessError naming the file.
Design read_design_file(const std::filesystem::path& path);

struct DesignEntry {
  std::string name;
  std::string source;  // file it came from, or "config" for the nominal
  Design design;
};

struct CrossEvalCell {
  metrics::ObjectiveValue mean;
  std::vector<metrics::ObjectiveValue> repetitions;
  std::vector<std::uint64_t> terrain_seeds;  // 0 for seedless terrains
};

struct CrossEvalMatrix {
  std::vector<DesignEntry> designs;
  std::vector<TerrainKind> terrains;
  std::vector<std::vector<CrossEvalCell>> cells;  // [design][terrain]

  const CrossEvalCell& cell(std::size_t design, std::size_t terrain) const {
    return cells.at(design).at(terrain);
  }
};

/// Every design on every terrain, config.repetitions trials per cell. Cells
/// run concurrently; the serial version is the reference.
CrossEvalMatrix cross_evaluate(const std::vector<DesignEntry>& designs,
                               const std::vector<TerrainKind>& terrains, const RunConfig& config);
CrossEvalMatrix cross_evaluate_serial(const std::vector<DesignEntry>& designs,
                                      const std::vector<TerrainKind>& terrains,
                                      const RunConfig& config);

/// matrix.csv plus cells/<design>_<terrain>.csv and cells/<design>_<terrain>.json.
void write_cross_eval(const CrossEvalMatrix& matrix, const std::filesystem::path& dir);

/// Closed outline of a semicircular wheg centred at the origin and bulging
/// toward +x: outer arc of radius R, inner arc R - t, straight end caps. The
/// last vertex repeats the first.
std::vector<Eigen::Vector2d> wheg_outline(double radius_m, double thickness_m, int arc_points);

/// Writes wheg_front.txt and wheg_back.txt ("x y" per line, meters).
void export_geometry(const Design& design, const std::filesystem::path& dir, int arc_points = 64);

struct TerrainSummary {
  TerrainKind terrain = TerrainKind::flat;
  opt::ObjectiveKind objective = opt::ObjectiveKind::efficiency;
  Design best_design;
  metrics::ObjectiveValue best;
  metrics::ObjectiveValue nominal;
};

/// "2.00×" style ratio, or "n/a" when the denominator is not positive.
std::string format_ratio(double numerator, double denominator);

std::string format_report(const std::vector<TerrainSummary>& runs,
                          const std::optional<CrossEvalMatrix>& matrix = std::nullopt);

/// Report over the artifacts found under out_dir (per-terrain summaries and,
/// if present, the cross-evaluation matrix). Throws HarnessError if there are
/// none.
std::string report(const std::filesystem::path& out_dir);

}  // namespace codesign::harness
