#include "codesign/compliance.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace codesign::compliance {

using std::numbers::pi;

namespace {

void require_radius(double radius_m) {
  if (!(radius_m > 0.0)) throw ComplianceError("wheg radius must be positive");
}

void require_config(const WhegChain& chain, std::span<const double> config) {
  if (static_cast<int>(config.size()) != chain.n_segments) {
    throw ComplianceError("configuration has " + std::to_string(config.size()) +
                          " angles, chain has " + std::to_string(chain.n_segments) + " joints");
  }
}

std::span<const double> rest(const WhegChain& chain) {
  return {chain.joint_angles_rad.data(), static_cast<std::size_t>(chain.joint_angles_rad.size())};
}

}  // namespace

BeamSection BeamSection::rectangular(double youngs_modulus_pa, double width_m, double thickness_m) {
  if (!(youngs_modulus_pa > 0.0 && width_m > 0.0 && thickness_m > 0.0)) {
    throw ComplianceError("beam section: E, width and thickness must be positive");
  }
  return {youngs_modulus_pa, width_m, thickness_m, width_m * std::pow(thickness_m, 3) / 12.0};
}

double strain_energy(double force_n, const BeamSection& section, double radius_m) {
  require_radius(radius_m);
  return 0.5 * pi * force_n * force_n * std::pow(radius_m, 3) /
         (2.0 * section.flexural_rigidity());
}

double tip_deflection(double force_n, const BeamSection& section, double radius_m) {
  require_radius(radius_m);
  return pi * force_n * std::pow(radius_m, 3) / (2.0 * section.flexural_rigidity());
}

double tip_stiffness(const BeamSection& section, double radius_m) {
  require_radius(radius_m);
  return 2.0 * section.flexural_rigidity() / (pi * std::pow(radius_m, 3));
}

WhegChain discretize_wheg(double radius_m, int n_segments) {
  if (n_segments < 2) throw ComplianceError("wheg chain needs at least 2 segments");
  require_radius(radius_m);
  WhegChain chain;
  chain.radius_m = radius_m;
  chain.n_segments = n_segments;
  const double turn = pi / n_segments;
  chain.segment_length_m = 2.0 * radius_m * std::sin(0.5 * turn);
  chain.joint_angles_rad = Eigen::VectorXd::Constant(n_segments, -turn);
  // First chord leaves the hub half a turn below the tangent.
  chain.joint_angles_rad[0] = -0.5 * turn;
  return chain;
}

Eigen::Matrix2Xd chain_points(const WhegChain& chain, std::span<const double> config) {
  require_config(chain, config);
  Eigen::Matrix2Xd p(2, chain.n_segments + 1);
  p.col(0).setZero();
  double heading = 0.0;
  for (int k = 0; k < chain.n_segments; ++k) {
    heading += config[k];
    p.col(k + 1) = p.col(k) + chain.segment_length_m *
                                  Eigen::Vector2d(std::cos(heading), std::sin(heading));
  }
  return p;
}

Eigen::Vector2d chain_tip(const WhegChain& chain, std::span<const double> config) {
  return chain_points(chain, config).col(chain.n_segments);
}

Eigen::Matrix2Xd chain_jacobian(const WhegChain& chain, std::span<const double> config) {
  const Eigen::Matrix2Xd p = chain_points(chain, config);
  const Eigen::Vector2d tip = p.col(chain.n_segments);
  Eigen::Matrix2Xd jac(2, chain.n_segments);
  for (int i = 0; i < chain.n_segments; ++i) {
    const Eigen::Vector2d r = tip - p.col(i);
    jac.col(i) << -r.y(), r.x();
  }
  return jac;
}

Eigen::MatrixXd projected_stiffness_matrix(const WhegChain& chain, double tip_stiffness_n_per_m) {
  const Eigen::RowVectorXd j2 = chain_jacobian(chain, rest(chain)).row(1);
  return tip_stiffness_n_per_m * j2.transpose() * j2;
}

Eigen::VectorXd joint_stiffnesses(const WhegChain& chain, double tip_stiffness_n_per_m) {
  if (!(tip_stiffness_n_per_m > 0.0)) throw ComplianceError("tip stiffness must be positive");
  const Eigen::RowVectorXd j2 = chain_jacobian(chain, rest(chain)).row(1);
  if (j2.cwiseAbs().maxCoeff() == 0.0) {
    throw ComplianceError("vertical Jacobian row is identically zero");
  }
  const double flexural_rigidity = 0.5 * pi * std::pow(chain.radius_m, 3) * tip_stiffness_n_per_m;
  return Eigen::VectorXd::Constant(chain.n_segments, flexural_rigidity / chain.segment_length_m);
}

Eigen::VectorXd joint_damping(const Eigen::VectorXd& stiffnesses, double segment_inertia_kgm2,
                              double damping_ratio) {
  return (2.0 * damping_ratio) * (stiffnesses * segment_inertia_kgm2).cwiseSqrt();
}

StaticSolution solve_static_deflection(const WhegChain& chain, double force_n,
                                       const StaticSolveOptions& options) {
  const int n = chain.n_segments;
  if (chain.joint_stiffnesses.size() != n) {
    throw ComplianceError("chain stiffnesses are not assigned");
  }
  const Eigen::VectorXd& kt = chain.joint_stiffnesses;
  const Eigen::VectorXd& q0 = chain.joint_angles_rad;
  const Eigen::Vector2d force(0.0, force_n);

  // Joint torque from the tip load: tau_i = (tip - p_i) x f.
  auto residual = [&](const Eigen::VectorXd& dq, Eigen::Matrix2Xd& pts) {
    const Eigen::VectorXd q = q0 + dq;
    pts = chain_points(chain, {q.data(), static_cast<std::size_t>(n)});
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d arm = pts.col(n) - pts.col(i);
      r[i] = kt[i] * dq[i] - (arm.x() * force.y() - arm.y() * force.x());
    }
    return r;
  };

  StaticSolution sol;
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(n);
  Eigen::Matrix2Xd pts;
  Eigen::VectorXd r = residual(dq, pts);
  double norm = r.cwiseAbs().maxCoeff();
  int it = 0;
  while (norm >= options.residual_tol_nm) {
    if (it == options.max_iterations) {
      throw ComplianceError("static deflection did not converge, residual " +
                            std::to_string(norm) + " N m");
    }
    ++it;
    // d tau_i / d q_j = -(tip - p_max(i,j)) . f
    Eigen::MatrixXd jac = kt.asDiagonal();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        jac(i, j) += (pts.col(n) - pts.col(std::max(i, j))).dot(force);
      }
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(r);
    double scale = 1.0;
    Eigen::Matrix2Xd trial_pts;
    Eigen::VectorXd trial_dq = dq - step;
    Eigen::VectorXd trial_r = residual(trial_dq, trial_pts);
    while (trial_r.cwiseAbs().maxCoeff() > norm && scale > 1e-6) {
      scale *= 0.5;
      trial_dq = dq - scale * step;
      trial_r = residual(trial_dq, trial_pts);
    }
    dq = trial_dq;
    r = trial_r;
    pts = trial_pts;
    norm = r.cwiseAbs().maxCoeff();
  }

  const Eigen::Vector2d tip0 = chain_tip(chain, {q0.data(), static_cast<std::size_t>(n)});
  sol.deflection_m = pts(1, n) - tip0.y();
  sol.iterations = it;
  sol.residual_nm = norm;
  sol.joint_displacement = dq;
  return sol;
}

double static_deflection_oracle(const WhegChain& chain, double force_n,
                                const StaticSolveOptions& options) {
  return solve_static_deflection(chain, force_n, options).deflection_m;
}

}  // namespace codesign::compliance
