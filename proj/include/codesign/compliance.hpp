#pragma once

#include <span>
#include <stdexcept>

#include <Eigen/Dense>

// Compliance model of a semicircular wheg loaded at its free tip.
//
// The wheg is a curved beam of radius R clamped at the hub, with a vertical
// force F at the tip (the diametrically opposite end). Castigliano's theorem
// on the bending energy gives a linear tip spring K = 2EI/(pi R^3). For rigid
// body simulators the beam is replaced by a chain of rigid chords joined by
// torsional springs; the chain here is used offline to validate K.
namespace codesign::compliance {

class ComplianceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rectangular cross-section, I = w t^3 / 12.
struct BeamSection {
  double youngs_modulus_pa;
  double width_m;
  double thickness_m;
  double area_moment_m4;

  static BeamSection rectangular(double youngs_modulus_pa, double width_m, double thickness_m);
  double flexural_rigidity() const { return youngs_modulus_pa * area_moment_m4; }
};

double strain_energy(double force_n, const BeamSection& section, double radius_m);
double tip_deflection(double force_n, const BeamSection& section, double radius_m);
double tip_stiffness(const BeamSection& section, double radius_m);

/// Rigid-link approximation of the wheg. The hub sits at the origin, the rest
/// shape bulges toward +x and ends at (0, -2R). Joint angles are relative:
/// joint 0 sets the absolute direction of the first chord, joint i > 0 the
/// turn between chords i-1 and i.
struct WhegChain {
  double radius_m = 0.0;
  int n_segments = 0;
  double segment_length_m = 0.0;
  Eigen::VectorXd joint_angles_rad;   // rest configuration
  Eigen::VectorXd joint_stiffnesses;  // N m / rad, empty until assigned
};

WhegChain discretize_wheg(double radius_m, int n_segments);

/// Joint positions p_0..p_n (p_n is the tip) for a configuration.
Eigen::Matrix2Xd chain_points(const WhegChain& chain, std::span<const double> config);
Eigen::Vector2d chain_tip(const WhegChain& chain, std::span<const double> config);

/// d(tip)/d(config), 2 x n.
Eigen::Matrix2Xd chain_jacobian(const WhegChain& chain, std::span<const double> config);

/// The full joint-space stiffness K J2^T J2 at rest, J2 being the vertical
/// row of the chain Jacobian. Rank one: it reproduces the tip spring exactly
/// but is not realizable with independent joint springs.
Eigen::MatrixXd projected_stiffness_matrix(const WhegChain& chain, double tip_stiffness_n_per_m);

/// Independent per-joint torsional stiffnesses whose lumped bending energy
/// discretizes the Castigliano integral: K_T = EI / L_seg with EI = pi R^3 K / 2.
/// Tip compliance converges to 1/K as O(1/n^2).
Eigen::VectorXd joint_stiffnesses(const WhegChain& chain, double tip_stiffness_n_per_m);

/// c_i = 2 zeta sqrt(K_T,i I_seg).
Eigen::VectorXd joint_damping(const Eigen::VectorXd& stiffnesses, double segment_inertia_kgm2,
                              double damping_ratio);

struct StaticSolveOptions {
  int max_iterations = 200;
  double residual_tol_nm = 1e-10;
};

struct StaticSolution {
  double deflection_m = 0.0;  // upward tip displacement
  int iterations = 0;
  double residual_nm = 0.0;
  Eigen::VectorXd joint_displacement;
};

/// Large-deflection static equilibrium K_T dq = J(q0 + dq)^T f for an upward
/// tip force, solved with damped Newton. Throws ComplianceError on
/// non-convergence (message carries the residual).
StaticSolution solve_static_deflection(const WhegChain& chain, double force_n,
                                       const StaticSolveOptions& options = {});

double static_deflection_oracle(const WhegChain& chain, double force_n,
                                const StaticSolveOptions& options = {});

}  // namespace codesign::compliance
