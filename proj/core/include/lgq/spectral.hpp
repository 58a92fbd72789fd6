#pragma once

#include <Eigen/Core>
#include <vector>

#include "lgq/geometry.hpp"

namespace lgq {

// Precomputed pairwise geometry for the matrix family kappa -> Lambda(-kappa^2).
struct LambdaSystem {
  DiscretizedGraph graph;
  Eigen::MatrixXd distances;  // symmetric, zero diagonal, positive off-diagonal

  explicit LambdaSystem(DiscretizedGraph g);
  Eigen::Index size() const { return distances.rows(); }
};

// diag = (2*pi*|Y|*alpha + ln(kappa/2) + C_E) / (2*pi)
// offdiag(y,y') = -K0(kappa * r_yy') / (2*pi)
Eigen::MatrixXd assemble_lambda(const LambdaSystem& sys, double kappa);

struct Inertia {
  int n_neg = 0, n_zero = 0, n_pos = 0;
};

// Symmetric-indefinite (Bunch-Kaufman) factorization; zero pivots at
// tolerance zero_tol_rel * max|entry|.
Inertia inertia(const Eigen::MatrixXd& m, double zero_tol_rel = 1e-12);

// Sign and log|det| from the same factorization.
struct SLogDet {
  int sign = 0;
  double log_abs = 0.0;
};
SLogDet slogdet(const Eigen::MatrixXd& m);

struct SpectrumLevel {
  double energy = 0.0;  // E = -kappa^2 < 0
  double kappa = 0.0;
  int multiplicity = 1;
  double lambda_residual = 0.0;  // |eigenvalue of Lambda| at the located root
  bool above_threshold = false;  // E > -gamma^2/4 on graphs with cut-off edges
  bool branch_warning = false;   // root from an interval the scan could not fully resolve
};

struct Spectrum {
  std::vector<SpectrumLevel> levels;  // ascending in energy, clustered
  double degeneracy_tol = 0.0;        // absolute clustering width actually used

  std::size_t total_multiplicity() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += (std::size_t)l.multiplicity;
    return n;
  }
};

// Scan kappa on a geometric grid, track sorted-eigenvalue sign changes through
// the negative-eigenvalue count, bisect each per-index bracket until the
// corresponding eigenvalue of Lambda is below tol in magnitude, and cluster
// roots into degenerate levels at degeneracy_rel_tol * |E|. Intervals where
// the count jumps by more than one are refined up to refine_cap extra nodes;
// roots from unresolved intervals carry branch_warning.
Spectrum find_eigenvalues(const LambdaSystem& sys, double kappa_min, double kappa_max,
                          int scan_points, double tol, double degeneracy_rel_tol = 1e-6,
                          int refine_cap = 64);

// Solver window defaults: all spectra of interest lie in (-gamma^2, 0).
double default_kappa_min(const LambdaSystem& sys);
double default_kappa_max(const LambdaSystem& sys);

// Unit-norm null directions of Lambda at a located root E0: eigenvectors with
// |eigenvalue| < 10 * tol; one column per vector. Throws if none qualifies.
Eigen::MatrixXd null_vector(const LambdaSystem& sys, double E0, double tol = 1e-8);

struct Rect {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

struct EigenfunctionGrid {
  std::vector<double> xs, ys;
  Eigen::MatrixXd values;                                      // ys.size() rows, xs.size() cols
  Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> near_site;  // same shape
  double kappa0 = 0.0;
  Eigen::VectorXd coefficients;
};

// psi(x) = sum_y c_y K0(kappa0 |x - y|) / (2*pi) on a rectangular lattice;
// nodes within spacing/10 of a point of Y are flagged (logarithmic spike).
EigenfunctionGrid eval_eigenfunction(const LambdaSystem& sys, const Eigen::VectorXd& c,
                                     double kappa0, const Rect& window, int nx, int ny);

// alpha - max_x (1/|Y|) sum_{y != x} K0(kappa |x-y|)/(2*pi); positive margin
// certifies the invertibility regime of the matrix family at this kappa.
double schur_margin(const LambdaSystem& sys, double kappa);

struct ScaleCheckReport {
  double max_rel_mismatch = 0.0;
  int levels_compared = 0;
};

// Verifies E(s*Y, alpha + ln(s)/(2*pi*|Y|)) = E(Y, alpha) / s^2 by solving
// both systems over matched windows.
ScaleCheckReport scaled_spectrum_check(const LambdaSystem& sys, double s, double kappa_min,
                                       double kappa_max, int scan_points, double tol);

}  // namespace lgq
