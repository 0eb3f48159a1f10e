#include "codesign/harness.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace codesign::harness {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarnessError(path.string() + ": cannot open for writing");
  return out;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw HarnessError(dir.string() + ": " + ec.message());
}

ojson value_json(const metrics::ObjectiveValue& v) {
  ojson j;
  j["efficiency_m_per_j"] = v.efficiency_m_per_j;
  j["speed_m_per_s"] = v.speed_m_per_s;
  j["displacement_m"] = v.displacement_m;
  j["avg_power_w"] = v.avg_power_w;
  j["energy_j"] = v.energy_j;
  j["valid"] = v.valid;
  return j;
}

metrics::ObjectiveValue value_from_json(const nlohmann::json& j) {
  metrics::ObjectiveValue v;
  v.efficiency_m_per_j = j.at("efficiency_m_per_j").get<double>();
  v.speed_m_per_s = j.at("speed_m_per_s").get<double>();
  v.displacement_m = j.at("displacement_m").get<double>();
  v.avg_power_w = j.at("avg_power_w").get<double>();
  v.energy_j = j.at("energy_j").get<double>();
  v.valid = j.at("valid").get<bool>();
  return v;
}

ojson reference_json(TerrainKind terrain) {
  const auto& row = ReferenceTable::row(terrain);
  ojson j;
  j["label"] = kReferenceLabel;
  j["nominal_efficiency_m_per_j"] = ReferenceTable::nominal_efficiency_m_per_j;
  j["nominal_speed_m_per_s"] = ReferenceTable::nominal_speed_m_per_s;
  j["eop_efficiency_m_per_j"] = row.eop_efficiency_m_per_j;
  j["eop_speed_m_per_s"] = row.eop_speed_m_per_s;
  j["sop_efficiency_m_per_j"] = row.sop_efficiency_m_per_j;
  j["sop_speed_m_per_s"] = row.sop_speed_m_per_s;
  return j;
}

metrics::ObjectiveValue mean_of(const std::vector<metrics::ObjectiveValue>& reps) {
  metrics::ObjectiveValue m;
  m.valid = true;
  for (const auto& r : reps) {
    m.efficiency_m_per_j += r.efficiency_m_per_j;
    m.speed_m_per_s += r.speed_m_per_s;
    m.displacement_m += r.displacement_m;
    m.avg_power_w += r.avg_power_w;
    m.energy_j += r.energy_j;
    m.valid = m.valid && r.valid;
  }
  const double n = static_cast<double>(reps.size());
  m.efficiency_m_per_j /= n;
  m.speed_m_per_s /= n;
  m.displacement_m /= n;
  m.avg_power_w /= n;
  m.energy_j /= n;
  return m;
}

double objective_of(const metrics::ObjectiveValue& v, opt::ObjectiveKind kind) {
  return opt::score(v, kind);
}

std::string summary_text(const TerrainSummary& s) {
  std::ostringstream out;
  const auto& ref = ReferenceTable::row(s.terrain);
  out << "terrain: " << to_string(s.terrain) << "\n";
  out << "objective: " << opt::to_string(s.objective) << "\n";
  out << "best:    efficiency " << num(s.best.efficiency_m_per_j) << " m/J, speed "
      << num(s.best.speed_m_per_s) << " m/s, displacement " << num(s.best.displacement_m)
      << " m\n";
  out << "nominal: efficiency " << num(s.nominal.efficiency_m_per_j) << " m/J, speed "
      << num(s.nominal.speed_m_per_s) << " m/s, displacement " << num(s.nominal.displacement_m)
      << " m\n";
  out << "improvement vs nominal: "
      << format_ratio(objective_of(s.best, s.objective), objective_of(s.nominal, s.objective))
      << "\n";
  out << kReferenceLabel << ": EOP " << ref.eop_efficiency_m_per_j << " m/J " << ref.eop_speed_m_per_s
      << " m/s, SOP " << ref.sop_efficiency_m_per_j << " m/J " << ref.sop_speed_m_per_s
      << " m/s, nominal " << ReferenceTable::nominal_efficiency_m_per_j << " m/J "
      << ReferenceTable::nominal_speed_m_per_s << " m/s\n";
  return out.str();
}

CrossEvalMatrix make_matrix(const std::vector<DesignEntry>& designs,
                            const std::vector<TerrainKind>& terrains, const RunConfig& config) {
  if (designs.empty()) throw HarnessError("cross-evaluation needs at least one design");
  if (terrains.empty()) throw HarnessError("cross-evaluation needs at least one terrain");
  CrossEvalMatrix m;
  m.designs = designs;
  m.terrains = terrains;
  m.cells.assign(designs.size(), std::vector<CrossEvalCell>(terrains.size()));
  for (auto& row : m.cells) {
    for (std::size_t t = 0; t < terrains.size(); ++t) {
      row[t].repetitions.resize(static_cast<std::size_t>(config.repetitions));
      for (int r = 0; r < config.repetitions; ++r) {
        row[t].terrain_seeds.push_back(terrain_seed(config.terrain, terrains[t], r));
      }
    }
  }
  return m;
}

void finish_matrix(CrossEvalMatrix& m) {
  for (auto& row : m.cells) {
    for (auto& cell : row) cell.mean = mean_of(cell.repetitions);
  }
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError(path.string() + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(path.string() + ": " + e.what());
  }
}

}  // namespace

const ReferenceRow& ReferenceTable::row(TerrainKind terrain) {
  for (const auto& r : rows) {
    if (r.terrain == terrain) return r;
  }
  throw std::invalid_argument("no reference row for terrain");
}

metrics::ObjectiveValue evaluate(const Design& design, TerrainKind terrain, const RunConfig& config,
                                 int repetition) {
  const Terrain ground = make_terrain(config.terrain, terrain, repetition);
  const auto trial = sim::run_trial(design, ground, config.sim);
  try {
    return metrics::efficiency(trial, config.metrics);
  } catch (const metrics::DegenerateTrialError&) {
    return metrics::worst_case();
  }
}

void write_history_csv(std::ostream& out, const opt::OptHistory& history) {
  out << "iter";
  for (const char* name : kDesignFieldNames) out << ',' << name;
  out << ",displacement_m,avg_power_w,efficiency,speed,valid,incumbent\n";
  for (const auto& t : history.trials) {
    out << t.iter;
    for (double v : t.design.to_vector()) out << ',' << num(v);
    out << ',' << num(t.value.displacement_m) << ',' << num(t.value.avg_power_w) << ','
        << num(t.value.efficiency_m_per_j) << ',' << num(t.value.speed_m_per_s) << ','
        << (t.value.valid ? 1 : 0) << ',' << num(t.incumbent) << '\n';
  }
}

CodesignRun run_codesign(const RunConfig& config, TerrainKind terrain, const fs::path& out_dir) {
  CodesignRun run;
  run.terrain = terrain;
  run.dir = out_dir / std::string(to_string(terrain));
  make_dirs(run.dir);

  const Terrain ground = make_terrain(config.terrain, terrain);
  auto objective = [&](const Design& d) {
    const auto trial = sim::run_trial(d, ground, config.sim);
    return metrics::efficiency(trial, config.metrics);
  };
  run.history = opt::optimize(objective, config.bounds, config.optimizer, config.objective);
  run.nominal = evaluate(config.nominal, terrain, config);

  {
    auto out = open_out(run.dir / "trial_log.csv");
    write_history_csv(out, run.history);
  }

  const auto& best = run.history.best();
  {
    ojson j;
    j["terrain"] = std::string(to_string(terrain));
    j["objective"] = opt::to_string(config.objective);
    j["seed"] = config.optimizer.seed;
    j["iter"] = best.iter;
    j["design"] = to_json(best.design);
    j["value"] = value_json(best.value);
    auto out = open_out(run.dir / "best_design.json");
    out << j.dump(2) << '\n';
  }

  const TerrainSummary summary{terrain, config.objective, best.design, best.value, run.nominal};
  {
    ojson j;
    j["terrain"] = std::string(to_string(terrain));
    j["objective"] = opt::to_string(config.objective);
    j["seed"] = config.optimizer.seed;
    j["budget"] = config.optimizer.budget;
    j["trials"] = run.history.trials.size();
    j["best_iter"] = best.iter;
    j["best_design"] = to_json(best.design);
    j["best"] = value_json(best.value);
    j["nominal_design"] = to_json(config.nominal);
    j["nominal"] = value_json(run.nominal);
    const double nominal_score = objective_of(run.nominal, config.objective);
    if (nominal_score > 0.0) {
      j["improvement_ratio"] = best.score / nominal_score;
    } else {
      j["improvement_ratio"] = nullptr;
    }
    j["reference"] = reference_json(terrain);
    auto out = open_out(run.dir / "summary.json");
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_out(run.dir / "summary.txt");
    out << summary_text(summary);
  }
  return run;
}

Design read_design_file(const fs::path& path) {
  const auto j = read_json(path);
  try {
    const auto& d = j.contains("design") ? j.at("design") : j;
    const Design design = design_from_json(d);
    if (auto v = validate_gait(design.gait); !v.empty()) throw DesignError(v.front());
    return design;
  } catch (const std::exception& e) {
    throw HarnessError(path.string() + ": " + e.what());
  }
}

CrossEvalMatrix cross_evaluate_serial(const std::vector<DesignEntry>& designs,
                                      const std::vector<TerrainKind>& terrains,
                                      const RunConfig& config) {
  CrossEvalMatrix m = make_matrix(designs, terrains, config);
  for (std::size_t d = 0; d < designs.size(); ++d) {
    for (std::size_t t = 0; t < terrains.size(); ++t) {
      for (int r = 0; r < config.repetitions; ++r) {
        m.cells[d][t].repetitions[static_cast<std::size_t>(r)] =
            evaluate(designs[d].design, terrains[t], config, r);
      }
    }
  }
  finish_matrix(m);
  return m;
}

CrossEvalMatrix cross_evaluate(const std::vector<DesignEntry>& designs,
                               const std::vector<TerrainKind>& terrains, const RunConfig& config) {
  CrossEvalMatrix m = make_matrix(designs, terrains, config);
  const long nt = static_cast<long>(terrains.size());
  const long nr = config.repetitions;
  const long tasks = static_cast<long>(designs.size()) * nt * nr;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < tasks; ++k) {
    const auto d = static_cast<std::size_t>(k / (nt * nr));
    const auto t = static_cast<std::size_t>((k / nr) % nt);
    const auto r = static_cast<int>(k % nr);
    try {
      m.cells[d][t].repetitions[static_cast<std::size_t>(r)] =
          evaluate(designs[d].design, terrains[t], config, r);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  finish_matrix(m);
  return m;
}

void write_cross_eval(const CrossEvalMatrix& m, const fs::path& dir) {
  make_dirs(dir / "cells");
  {
    auto out = open_out(dir / "matrix.csv");
    out << "design,terrain,efficiency,speed,displacement_m,avg_power_w,valid\n";
    for (std::size_t d = 0; d < m.designs.size(); ++d) {
      for (std::size_t t = 0; t < m.terrains.size(); ++t) {
        const auto& v = m.cell(d, t).mean;
        out << m.designs[d].name << ',' << to_string(m.terrains[t]) << ','
            << num(v.efficiency_m_per_j) << ',' << num(v.speed_m_per_s) << ','
            << num(v.displacement_m) << ',' << num(v.avg_power_w) << ',' << (v.valid ? 1 : 0)
            << '\n';
      }
    }
  }
  ojson matrix;
  matrix["terrains"] = ojson::array();
  for (auto t : m.terrains) matrix["terrains"].push_back(std::string(to_string(t)));
  matrix["designs"] = ojson::array();
  for (std::size_t d = 0; d < m.designs.size(); ++d) {
    ojson row;
    row["name"] = m.designs[d].name;
    row["source"] = m.designs[d].source;
    row["design"] = to_json(m.designs[d].design);
    row["cells"] = ojson::array();
    for (std::size_t t = 0; t < m.terrains.size(); ++t) {
      const auto& cell = m.cell(d, t);
      row["cells"].push_back(value_json(cell.mean));

      const std::string stem = safe_name(m.designs[d].name) + "_" +
                               std::string(to_string(m.terrains[t]));
      auto csv = open_out(dir / "cells" / (stem + ".csv"));
      csv << "rep,terrain_seed,displacement_m,avg_power_w,efficiency,speed,valid\n";
      for (std::size_t r = 0; r < cell.repetitions.size(); ++r) {
        const auto& v = cell.repetitions[r];
        csv << r << ',' << cell.terrain_seeds[r] << ',' << num(v.displacement_m) << ','
            << num(v.avg_power_w) << ',' << num(v.efficiency_m_per_j) << ','
            << num(v.speed_m_per_s) << ',' << (v.valid ? 1 : 0) << '\n';
      }
      ojson prov;
      prov["design"] = m.designs[d].name;
      prov["source"] = m.designs[d].source;
      prov["terrain"] = std::string(to_string(m.terrains[t]));
      prov["repetitions"] = cell.repetitions.size();
      prov["terrain_seeds"] = cell.terrain_seeds;
      prov["seed_varied"] = m.terrains[t] == TerrainKind::rough;
      prov["mean"] = value_json(cell.mean);
      auto js = open_out(dir / "cells" / (stem + ".json"));
      js << prov.dump(2) << '\n';
    }
    matrix["designs"].push_back(std::move(row));
  }
  auto out = open_out(dir / "matrix.json");
  out << matrix.dump(2) << '\n';
}

std::vector<Eigen::Vector2d> wheg_outline(double radius_m, double thickness_m, int arc_points) {
  if (!(radius_m > 0.0) || !(thickness_m > 0.0) || thickness_m >= radius_m) {
    throw std::invalid_argument("wheg outline needs 0 < thickness < radius");
  }
  if (arc_points < 2) throw std::invalid_argument("wheg outline needs at least 2 arc points");
  const double inner = radius_m - thickness_m;
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(2 * arc_points + 1));
  for (int i = 0; i < arc_points; ++i) {
    const double a = 0.5 * std::numbers::pi - std::numbers::pi * i / (arc_points - 1);
    pts.emplace_back(radius_m * std::cos(a), radius_m * std::sin(a));
  }
  for (int i = 0; i < arc_points; ++i) {
    const double a = -0.5 * std::numbers::pi + std::numbers::pi * i / (arc_points - 1);
    pts.emplace_back(inner * std::cos(a), inner * std::sin(a));
  }
  pts.push_back(pts.front());
  return pts;
}

void export_geometry(const Design& design, const fs::path& dir, int arc_points) {
  make_dirs(dir);
  const std::pair<const char*, double> whegs[] = {{"wheg_front.txt", design.morph.front_len_m},
                                                  {"wheg_back.txt", design.morph.back_len_m}};
  for (const auto& [name, radius] : whegs) {
    const auto pts = wheg_outline(radius, design.morph.thickness_m, arc_points);
    auto out = open_out(dir / name);
    char buf[64];
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof buf, "%.12g %.12g\n", p.x(), p.y());
      out << buf;
    }
  }
}

std::string format_ratio(double numerator, double denominator) {
  if (!(denominator > 0.0) || !std::isfinite(numerator)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f×", numerator / denominator);
  return buf;
}

std::string format_report(const std::vector<TerrainSummary>& runs,
                          const std::optional<CrossEvalMatrix>& matrix) {
  std::ostringstream out;
  char buf[256];
  out << "Co-design results\n\n";
  std::snprintf(buf, sizeof buf, "%-8s %-10s %12s %10s %12s %10s %8s\n", "terrain", "objective",
                "best_eff", "best_v", "nominal_eff", "nominal_v", "ratio");
  out << buf;
  for (const auto& r : runs) {
    const std::string ratio = format_ratio(objective_of(r.best, r.objective),
                                           objective_of(r.nominal, r.objective));
    std::snprintf(buf, sizeof buf, "%-8s %-10s %12.5g %10.4g %12.5g %10.4g %8s\n",
                  std::string(to_string(r.terrain)).c_str(), opt::to_string(r.objective),
                  r.best.efficiency_m_per_j, r.best.speed_m_per_s, r.nominal.efficiency_m_per_j,
                  r.nominal.speed_m_per_s, ratio.c_str());
    out << buf;
  }

  out << "\n" << kReferenceLabel << "\n";
  std::snprintf(buf, sizeof buf, "  nominal platform: efficiency %g m/J, speed %g m/s\n",
                ReferenceTable::nominal_efficiency_m_per_j, ReferenceTable::nominal_speed_m_per_s);
  out << buf;
  std::snprintf(buf, sizeof buf, "  %-8s %12s %10s %12s %10s\n", "terrain", "EOP_eff", "EOP_v",
                "SOP_eff", "SOP_v");
  out << buf;
  for (const auto& row : ReferenceTable::rows) {
    std::snprintf(buf, sizeof buf, "  %-8s %12g %10g %12g %10g\n",
                  std::string(to_string(row.terrain)).c_str(), row.eop_efficiency_m_per_j,
                  row.eop_speed_m_per_s, row.sop_efficiency_m_per_j, row.sop_speed_m_per_s);
    out << buf;
  }

  if (matrix) {
    out << "\nCross-evaluation (mean efficiency, m/J)\n";
    std::snprintf(buf, sizeof buf, "%-12s", "design");
    out << buf;
    for (auto t : matrix->terrains) {
      std::snprintf(buf, sizeof buf, " %12s", std::string(to_string(t)).c_str());
      out << buf;
    }
    out << "\n";
    for (std::size_t d = 0; d < matrix->designs.size(); ++d) {
      std::snprintf(buf, sizeof buf, "%-12s", matrix->designs[d].name.c_str());
      out << buf;
      for (std::size_t t = 0; t < matrix->terrains.size(); ++t) {
        std::snprintf(buf, sizeof buf, " %12.5g", matrix->cell(d, t).mean.efficiency_m_per_j);
        out << buf;
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string report(const fs::path& out_dir) {
  std::vector<TerrainSummary> runs;
  for (auto terrain : kAllTerrains) {
    const fs::path path = out_dir / std::string(to_string(terrain)) / "summary.json";
    if (!fs::exists(path)) continue;
    const auto j = read_json(path);
    try {
      TerrainSummary s;
      s.terrain = terrain;
      s.objective = opt::objective_kind_from_string(j.at("objective").get<std::string>());
      s.best_design = design_from_json(j.at("best_design"));
      s.best = value_from_json(j.at("best"));
      s.nominal = value_from_json(j.at("nominal"));
      runs.push_back(s);
    } catch (const std::exception& e) {
      throw HarnessError(path.string() + ": " + e.what());
    }
  }

  std::optional<CrossEvalMatrix> matrix;
  const fs::path mpath = out_dir / "cross_eval" / "matrix.json";
  if (fs::exists(mpath)) {
    const auto j = read_json(mpath);
    try {
      CrossEvalMatrix m;
      for (const auto& t : j.at("terrains")) {
        m.terrains.push_back(terrain_kind_from_string(t.get<std::string>()));
      }
      for (const auto& row : j.at("designs")) {
        m.designs.push_back({row.at("name").get<std::string>(),
                             row.at("source").get<std::string>(),
                             design_from_json(row.at("design"))});
        std::vector<CrossEvalCell> cells;
        for (const auto& c : row.at("cells")) cells.push_back({value_from_json(c), {}, {}});
        m.cells.push_back(std::move(cells));
      }
      matrix = std::move(m);
    } catch (const std::exception& e) {
      throw HarnessError(mpath.string() + ": " + e.what());
    }
  }

  if (runs.empty() && !matrix) {
    throw HarnessError(out_dir.string() + ": no run summaries or cross-evaluation found");
  }
  return format_report(runs, matrix);
}

}  // namespace codesign::harness
