// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance [runs_dir]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "codesign/compliance.hpp"
#include "codesign/config.hpp"
#include "codesign/gait.hpp"
#include "codesign/harness.hpp"
#include "codesign/metrics.hpp"
#include "codesign/optimizer.hpp"
#include "codesign/sim.hpp"

using namespace codesign;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double displacement(const sim::TrialResult& r) {
  return metrics::forward_displacement(r.samples.front().state.pose, r.samples.back().state.pose);
}

// 1. Closed-form compliance.
Outcome castigliano() {
  std::mt19937_64 rng(2024);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
  };
  double worst_fd = 0.0, worst_product = 0.0, worst_quad = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double E = log_uniform(1e8, 2e11);
    const double I = log_uniform(1e-14, 1e-9);
    const double R = log_uniform(0.01, 0.2);
    const double F = log_uniform(1e-3, 100.0);
    const compliance::BeamSection s{E, 0.01, 0.0, I};
    const double h = 1e-4 * F;
    const double fd = (compliance::strain_energy(F + h, s, R) - compliance::strain_energy(F - h, s, R)) / (2 * h);
    const double delta = compliance::tip_deflection(F, s, R);
    worst_fd = std::max(worst_fd, rel(fd, delta));
    worst_product = std::max(worst_product, rel(delta * compliance::tip_stiffness(s, R), F));

    // Bending energy integral with moment arm R sin(theta), composite Simpson.
    const int n = 2000;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double th = pi * k / n;
      const double m = F * R * std::sin(th);
      sum += (k == 0 || k == n ? 1 : k % 2 ? 4 : 2) * m * m / (2 * E * I) * R;
    }
    worst_quad = std::max(worst_quad, rel(sum * pi / n / 3.0, compliance::strain_energy(F, s, R)));
  }
  return {worst_fd < 1e-8 && worst_product < 1e-12 && worst_quad < 1e-8,
          fmt("max rel: dU/dF %.2e, delta*K/F %.2e, energy quadrature %.2e", worst_fd, worst_product,
              worst_quad)};
}

// 2. Rigid-link chain against the beam spring.
Outcome chain_fidelity() {
  const auto section = compliance::BeamSection::rectangular(2e9, 0.01, 0.0025);
  const double R = 0.03;
  const double K = compliance::tip_stiffness(section, R);
  auto error_at = [&](int n, double load) {
    auto chain = compliance::discretize_wheg(R, n);
    chain.joint_stiffnesses = compliance::joint_stiffnesses(chain, K);
    const double F = load * section.flexural_rigidity() / (R * R);
    return rel(compliance::static_deflection_oracle(chain, F), F / K);
  };
  const double e8 = error_at(8, 1e-4), e16 = error_at(16, 1e-4), e32 = error_at(32, 1e-4);
  const double large = error_at(16, 0.05);
  return {e16 < 0.02 && e8 > e16 && e16 > e32,
          fmt("rel error n=8 %.3e, n=16 %.3e, n=32 %.3e (n=16 at load 0.05 EI/R^2: %.3e, info)", e8,
              e16, e32, large)};
}

// 3. Gait clock.
double integrate_rate(const GaitParams& g, double t0, double t1, bool offset) {
  std::vector<double> cuts = {t0, t1};
  for (double base = std::floor(t0 / g.period_s) - 1; base * g.period_s < t1 + g.period_s; ++base) {
    for (double frac : {0.0, g.slow_fraction, 0.5, 0.5 + g.slow_fraction, 1.0}) {
      const double t = (base + frac) * g.period_s;
      if (t > t0 && t < t1) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    sum += gait::wheg_rate(0.5 * (cuts[i] + cuts[i + 1]), g, offset) * (cuts[i + 1] - cuts[i]);
  }
  return sum;
}

Outcome gait_clock() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Bounds b = Bounds::defaults();
  int checked = 0, failures = 0;
  double worst_advance = 0.0, worst_antiphase = 0.0;
  while (checked < 50) {
    DesignVector v;
    for (std::size_t i = 0; i < kDesignDims; ++i) v[i] = b.lower[i] + u(rng) * (b.upper[i] - b.lower[i]);
    const GaitParams g = Design::from_vector(v).gait;
    if (!validate_gait(g).empty()) continue;
    ++checked;
    const double max_rate = std::max(gait::slow_rate(g), gait::fast_rate(g));
    const int n = 2000;
    const double eps = 2.0 * g.period_s / n;
    for (bool offset : {false, true}) {
      double prev = gait::wheg_angle(0.0, g, offset);
      for (int i = 1; i <= n; ++i) {
        const double a = gait::wheg_angle(i * eps, g, offset);
        if (!(a > prev) || a - prev > max_rate * eps * (1 + 1e-9) + 1e-12) ++failures;
        prev = a;
      }
      worst_advance = std::max(worst_advance,
                               std::abs(integrate_rate(g, 0.1, 0.1 + g.period_s, offset) - 2 * pi));
    }
    for (double t = 0.0; t < 2 * g.period_s; t += 0.0173) {
      worst_antiphase = std::max(worst_antiphase, std::abs(gait::wheg_angle(t, g, true) -
                                                           gait::wheg_angle(t + 0.5 * g.period_s, g, false)));
    }
  }
  return {failures == 0 && worst_advance < 1e-9 && worst_antiphase < 1e-12,
          fmt("50 gaits: %d continuity/monotonicity violations, advance err %.2e, antiphase err %.2e",
              failures, worst_advance, worst_antiphase)};
}

// 4. Simulator physicality.
double wheg_reach(double radius, double angle) {
  const double dx = -std::sin(angle), dz = -std::cos(angle);
  double lowest = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double phi = pi * i / 20000;
    lowest = std::min(lowest, radius * dz + radius * (-std::cos(phi) * dz + std::sin(phi) * dx));
  }
  return -lowest;
}

double spring_balance_height(const sim::RobotModel& m, const GaitParams& g) {
  std::array<double, sim::kLegs> reach{}, k{};
  for (int l = 0; l < sim::kLegs; ++l) {
    const auto& hub = m.hubs[sim::hub_of_leg(l)];
    reach[l] = wheg_reach(hub.radius_m, gait::wheg_angle(0.0, g, gait::kTripodOfLeg[l] == gait::Tripod::B));
    k[l] = hub.stiffness_n_per_m;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double h = 0.5 * (lo + hi);
    double f = 0.0;
    for (int l = 0; l < sim::kLegs; ++l) f += k[l] * std::max(0.0, reach[l] - h);
    (f > m.body_mass_kg * m.gravity_mps2 ? lo : hi) = h;
  }
  return 0.5 * (lo + hi);
}

Outcome sim_physicality(const RunConfig& c, std::vector<sim::TrialResult>& trials) {
  const Terrain flat = make_terrain(c.terrain, TerrainKind::flat);
  const auto trial = sim::run_trial(c.nominal, flat, c.sim);
  int violations = 0;
  for (const auto& s : trial.samples) {
    for (int l = 0; l < sim::kLegs; ++l) {
      if (s.normal_force_n[l] < 0.0 || std::abs(s.torque_nm[l]) > c.sim.servo.torque_limit_nm) ++violations;
    }
  }
  const auto model = sim::build_robot(c.nominal, c.sim);
  const auto rest = sim::settle(model, flat, c.nominal.gait, c.sim);
  const double ride = sim::ride_height(rest, flat);
  const double balance = spring_balance_height(model, c.nominal.gait);

  sim::SimConfig fine = c.sim;
  fine.dt_s /= 2;
  const auto half = sim::run_trial(c.nominal, flat, fine);
  const double d = displacement(trial), dh = displacement(half);
  trials.push_back(trial);
  trials.push_back(half);
  const bool ok = trial.outcome == sim::TrialOutcome::completed && violations == 0 &&
                  rel(ride, balance) < 0.1 && rel(dh, d) < 0.05;
  return {ok, fmt("%d force/torque violations; ride %.5f m vs balance %.5f m; displacement %.4f m, "
                  "dt/2 %.4f m (%.2f%%)",
                  violations, ride, balance, d, dh, 100 * rel(dh, d))};
}

// 5. Metric identity.
Outcome metric_identity(const std::vector<sim::TrialResult>& trials,
                        const std::vector<opt::OptHistory>& histories) {
  double worst = 0.0;
  int checked = 0;
  for (const auto& t : trials) {
    const auto v = metrics::efficiency(t);
    if (!v.valid) continue;
    worst = std::max(worst, rel(v.efficiency_m_per_j * t.total_clamped_energy_j(), displacement(t)));
    ++checked;
  }
  for (const auto& h : histories) {
    for (const auto& t : h.trials) {
      if (!t.value.valid || t.value.displacement_m == 0.0) continue;
      worst = std::max(worst, rel(t.value.efficiency_m_per_j * t.value.energy_j, t.value.displacement_m));
      ++checked;
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst_rigid = 0.0;
  for (int k = 0; k < 100; ++k) {
    const sim::Pose a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const double rot = u(rng), tx = u(rng), tz = u(rng);
    auto apply = [&](const sim::Pose& p) {
      return sim::Pose{tx + std::cos(rot) * p.x_m - std::sin(rot) * p.z_m,
                       tz + std::sin(rot) * p.x_m + std::cos(rot) * p.z_m, p.pitch_rad + rot};
    };
    worst_rigid = std::max(worst_rigid, std::abs(metrics::forward_displacement(apply(a), apply(b)) -
                                                 metrics::forward_displacement(a, b)));
  }
  return {checked > 0 && worst < 1e-9 && worst_rigid < 1e-12,
          fmt("%d trials, max rel |gamma*E - d| %.2e; rigid-transform max diff %.2e", checked, worst,
              worst_rigid)};
}

// 6. Optimizer on a known function.
double branin(double x1, double x2) {
  const double b = 5.1 / (4 * pi * pi), c = 5 / pi, t = 1 / (8 * pi);
  return std::pow(x2 - b * x1 * x1 + c * x1 - 6, 2) + 10 * (1 - t) * std::cos(x1) + 10;
}

Outcome optimizer_competence() {
  double grid_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 3000; ++i) {
    for (int j = 0; j <= 3000; ++j) grid_min = std::min(grid_min, branin(-5 + 15.0 * i / 3000, 15.0 * j / 3000));
  }
  const double known = 0.397887;
  const opt::UnitObjective f = [](std::span<const double> x) {
    return -branin(-5 + 15 * x[0], 15 * x[1]);
  };
  std::vector<double> bo, rs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    opt::OptOptions o;
    o.budget = 100;
    o.seed = seed;
    bo.push_back(-opt::maximize(f, 7, o).best().value);
    rs.push_back(-opt::random_search(f, 7, 100, seed).best().value);
  }
  const double mbo = median(bo), mrs = median(rs);
  return {std::abs(grid_min - known) < 1e-5 && mbo - known < 0.5 && mbo <= mrs,
          fmt("grid minimum %.6f; median best BO %.4f vs random %.4f (optimum %.6f)", grid_min, mbo,
              mrs, known)};
}

struct Codesign {
  std::vector<opt::OptHistory> histories;
  std::vector<harness::CodesignRun> first_seed;
  Outcome c7;
};

// 7. End-to-end co-design per terrain.
Codesign codesign_runs(const RunConfig& base, const fs::path& root) {
  Codesign out;
  std::vector<std::string> lines;
  bool ok = true;
  for (auto terrain : harness::kAllTerrains) {
    std::vector<double> best, best_disp;
    metrics::ObjectiveValue nominal;
    for (int k = 0; k < 3; ++k) {
      RunConfig c = base;
      c.optimizer.seed = base.optimizer.seed + k;
      const auto run = harness::run_codesign(c, terrain, root / ("seed" + std::to_string(c.optimizer.seed)));
      const auto& b = run.history.best();
      best.push_back(b.value.efficiency_m_per_j);
      best_disp.push_back(b.value.displacement_m);
      nominal = run.nominal;
      out.histories.push_back(run.history);
      if (k == 0) out.first_seed.push_back(run);
      std::fprintf(stderr, "  %s seed %llu: best %.4g nominal %.4g\n", std::string(to_string(terrain)).c_str(),
                   static_cast<unsigned long long>(c.optimizer.seed), b.value.efficiency_m_per_j,
                   nominal.efficiency_m_per_j);
    }
    const double med = median(best);
    bool pass;
    if (terrain == TerrainKind::ramp && std::abs(nominal.displacement_m) < 0.01) {
      pass = median(best_disp) > 0.1;
      lines.push_back(fmt("ramp nominal stalls, best displacement %.3f m", median(best_disp)));
    } else {
      pass = med >= 1.2 * nominal.efficiency_m_per_j;
      lines.push_back(fmt("%s %.3gx", std::string(to_string(terrain)).c_str(),
                          med / nominal.efficiency_m_per_j));
    }
    ok = ok && pass;
  }
  std::string detail = "median best / nominal:";
  for (const auto& l : lines) detail += " " + l + ";";
  out.c7 = {ok, detail};
  return out;
}

// 8. Cross-evaluation.
Outcome cross_eval(const RunConfig& c, const std::vector<harness::CodesignRun>& runs,
                   const fs::path& dir) {
  std::vector<harness::DesignEntry> designs{{"nominal", "config", c.nominal}};
  for (const auto& r : runs) {
    designs.push_back({std::string(to_string(r.terrain)), (r.dir / "best_design.json").string(),
                       r.history.best().design});
  }
  const std::vector<TerrainKind> terrains(harness::kAllTerrains.begin(), harness::kAllTerrains.end());
  const auto m = harness::cross_evaluate(designs, terrains, c);
  harness::write_cross_eval(m, dir);
  bool ok = true;
  int own_best = 0;
  std::string detail = "own vs nominal:";
  for (std::size_t t = 0; t < terrains.size(); ++t) {
    const double own = m.cell(t + 1, t).mean.efficiency_m_per_j;
    const double nom = m.cell(0, t).mean.efficiency_m_per_j;
    ok = ok && own >= nom;
    bool best = true;
    for (std::size_t d = 1; d < designs.size(); ++d) best = best && own >= m.cell(d, t).mean.efficiency_m_per_j;
    own_best += best;
    detail += fmt(" %s %.4g/%.4g;", std::string(to_string(terrains[t])).c_str(), own, nom);
  }
  detail += fmt(" own design best on %d/4 terrains (info)", own_best);
  return {ok, detail};
}

// 9. Determinism.
Outcome determinism(const RunConfig& base, const fs::path& first, const fs::path& again) {
  int identical = 0;
  for (auto terrain : harness::kAllTerrains) {
    harness::run_codesign(base, terrain, again);
    const std::string name(to_string(terrain));
    const std::string a = slurp(first / name / "trial_log.csv");
    identical += !a.empty() && a == slurp(again / name / "trial_log.csv");
  }
  return {identical == 4, fmt("%d/4 trial logs byte-identical", identical)};
}

// 10. Report annotations.
Outcome report_constants(const fs::path& dir) {
  const std::string text = harness::report(dir);
  struct Row {
    const char* terrain;
    std::array<double, 4> values;
  };
  const std::array<Row, 4> table = {{{"flat", {0.0248, 0.685, 0.00829, 2.963}},
                                     {"rough", {0.0202, 1.078, 0.00522, 2.521}},
                                     {"stairs", {0.0208, 1.138, 0.01527, 2.183}},
                                     {"ramp", {0.0089, 0.069, 0.00182, 1.276}}}};
  const auto label = text.find("published reference");
  bool ok = label != std::string::npos && text.find("not a target") != std::string::npos;
  int cells = 0;
  if (ok) {
    std::istringstream in(text.substr(label));
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string first;
      ls >> first;
      for (const auto& row : table) {
        if (first != row.terrain) continue;
        for (double expected : row.values) {
          double v;
          if (ls >> v && v == expected) ++cells;
        }
      }
    }
  }
  const bool nominal = text.find("efficiency 0.016 m/J") != std::string::npos &&
                       text.find("speed 0.52 m/s") != std::string::npos;
  return {ok && nominal && cells == 16,
          fmt("labelled %s, nominal constants %s, %d/16 table cells", ok ? "yes" : "no",
              nominal ? "present" : "missing", cells)};
}

template <typename F>
Outcome timed(const char* name, F&& f) {
  std::fprintf(stderr, "running %s\n", name);
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o = f();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.detail += fmt(" [%.2f s]", s);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  fs::remove_all(root);
  fs::create_directories(root);
  const RunConfig config = default_config();

  std::array<Outcome, 10> out;
  std::vector<sim::TrialResult> trials;
  Codesign cd;
  out[0] = timed("castigliano", castigliano);
  out[1] = timed("chain", chain_fidelity);
  out[2] = timed("gait", gait_clock);
  out[3] = timed("sim", [&] { return sim_physicality(config, trials); });
  out[5] = timed("optimizer", optimizer_competence);
  out[6] = timed("codesign", [&] {
    cd = codesign_runs(config, root / "codesign");
    return cd.c7;
  });
  out[4] = timed("metrics", [&] { return metric_identity(trials, cd.histories); });
  const fs::path first = root / "codesign" / ("seed" + std::to_string(config.optimizer.seed));
  out[7] = timed("cross-eval", [&] { return cross_eval(config, cd.first_seed, first / "cross_eval"); });
  out[8] = timed("determinism", [&] { return determinism(config, first, root / "rerun"); });
  out[9] = timed("report", [&] { return report_constants(first); });

  const char* names[] = {"castigliano consistency", "chain fidelity",    "gait clock",
                         "simulator physicality",   "metric identity",   "optimizer competence",
                         "end-to-end co-design",    "cross-evaluation",  "determinism",
                         "report annotations"};
  int failed = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::printf("%s C%zu %s: %s\n", out[i].pass ? "PASS" : "FAIL", i + 1, names[i], out[i].detail.c_str());
    failed += !out[i].pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
