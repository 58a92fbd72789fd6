#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace lgq {

// Closed-ring level in the angular-momentum sector l: the unique kappa with
// gamma * R * I_l(kappa R) * K_l(kappa R) = 1, which exists iff gamma*R > 2l.
struct RingLevel {
  int l = 0;
  double energy = 0.0;  // -kappa^2
  double kappa = 0.0;
  int multiplicity = 1;  // 2 for l >= 1 (the +-l pair), 1 for l = 0
};

std::optional<RingLevel> ring_exact(double radius, double gamma, int l, double tol = 1e-13);

// All existing sectors, ascending in energy (l = 0 is the deepest).
std::vector<RingLevel> ring_exact_all(double radius, double gamma, double tol = 1e-13);

// Continuous-spectrum threshold of a straight line with coupling gamma.
double line_threshold(double gamma);

// The single isolated eigenvalue of two perpendicular lines.
double cross_eigenvalue(double gamma);

// Spectral threshold kappa of the infinite equidistant chain with period
// l0/n and per-site coupling alpha:
//   alpha = n/(2*l0*kappa) - ln(2*pi*n/l0)/(2*pi)
//           + sum_m [ ((2*pi*m)^2 + (kappa*l0/n)^2)^(-1/2) - 1/(2*pi*m) ],
// the series summed to m_max with an integral tail estimate.
double polymer_threshold(double alpha, int n, double l0, long m_max = 100000,
                         double tol = 1e-10);

// Energy of the polymer threshold, -kappa^2.
double polymer_threshold_energy(double alpha, int n, double l0, long m_max = 100000,
                                double tol = 1e-10);

// Residual of the defining equation at a given kappa (diagnostic).
double polymer_residual(double alpha, int n, double l0, double kappa, long m_max = 100000);

// Integral-operator reference for the lowest state of a two-arm star:
// midpoint Nystrom discretization of the kernel (gamma/2pi) K0(kappa*d) over
// both arms, with the diagonal log-singular cell integrated exactly. A bound
// state sits where the top eigenvalue crosses 1; it is strictly decreasing
// in kappa.
class StarBS {
 public:
  StarBS(double beta, double gamma, double arm_length, int nodes_per_arm);

  double lambda_max(double kappa) const;

  // Root of lambda_max(kappa) = 1 on (gamma/2, bracket_hi * gamma], bisected
  // to kappa_tol; empty when lambda_max < 1 on the whole bracket (no bound
  // state at this resolution, e.g. the straight line beta = pi).
  std::optional<double> bound_state_energy(double kappa_tol = 1e-8,
                                           double bracket_hi = 1.25) const;

  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double arm_length() const { return arm_length_; }
  int nodes_per_arm() const { return nodes_per_arm_; }

 private:
  double beta_, gamma_, arm_length_, cell_;
  int nodes_per_arm_;
  Eigen::MatrixXd dist_;  // pairwise distances between quadrature nodes
};

inline StarBS star_bs_lowest(double beta, double gamma, double arm_length,
                             int nodes_per_arm) {
  return StarBS(beta, gamma, arm_length, nodes_per_arm);
}

// Upper estimate for the number of bound states of a bent line at angle beta:
// (1/16pi) * cot(beta/2) * (8 sec(beta/2) - 5)^{3/2} / (8 sec(beta/2) - 3)^{1/2}.
double nest_bound(double beta);

}  // namespace lgq
