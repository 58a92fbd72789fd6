#include "lgq/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "eig_util.hpp"
#include "lgq/specfun.hpp"
#include "lgq/threads.hpp"

namespace lgq {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2.0 * kPi;

}  // namespace

std::optional<RingLevel> ring_exact(double radius, double gamma, int l, double tol) {
  if (!(radius > 0.0) || !(gamma > 0.0)) throw std::domain_error("radius and gamma must be positive");
  if (l < 0) throw std::domain_error("l must be non-negative");
  if (!(tol > 0.0)) throw std::domain_error("tol must be positive");
  double gr = gamma * radius;
  if (!(gr > 2.0 * (double)l)) return std::nullopt;  // P_l(0+) = 1/(2l): no root

  auto f = [&](double kappa) { return gr * bessel_ik_product(l, kappa * radius) - 1.0; };
  // P_l is strictly decreasing; f > 0 near 0 (for l = 0 it diverges, for
  // l >= 1 it starts at gr/(2l) - 1 > 0) and f(gamma) <= gamma*R/(2*gamma*R) - 1 < 0.
  double lo = 1e-12 / radius, hi = gamma;
  while (!(f(lo) > 0.0)) {
    lo *= 0.125;
    if (lo < 1e-300) throw std::runtime_error("failed to bracket ring level");
  }
  for (int it = 0; it < 300 && (hi - lo) > tol * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  RingLevel lvl;
  lvl.l = l;
  lvl.kappa = 0.5 * (lo + hi);
  lvl.energy = -lvl.kappa * lvl.kappa;
  lvl.multiplicity = l == 0 ? 1 : 2;
  return lvl;
}

std::vector<RingLevel> ring_exact_all(double radius, double gamma, double tol) {
  std::vector<RingLevel> out;
  for (int l = 0;; ++l) {
    auto lvl = ring_exact(radius, gamma, l, tol);
    if (!lvl) break;
    out.push_back(*lvl);
  }
  return out;
}

double line_threshold(double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
  return -0.25 * gamma * gamma;
}

double cross_eigenvalue(double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
  return -0.5 * gamma * gamma;
}

double polymer_residual(double alpha, int n, double l0, double kappa, long m_max) {
  if (n < 1 || !(l0 > 0.0) || !(kappa > 0.0))
    throw std::domain_error("polymer parameters must be positive");
  if (m_max < 10000) throw std::domain_error("series cutoff must be at least 1e4");
  double q = kappa * l0 / (double)n;
  double q2 = q * q;
  double series = 0.0;
  for (long m = m_max; m >= 1; --m) {  // ascending magnitude for accurate summation
    double u = kTwoPi * (double)m;
    series += 1.0 / std::sqrt(u * u + q2) - 1.0 / u;
  }
  // Tail: midpoint (Euler-Maclaurin) integral from m_max + 1/2 of the same
  // integrand, sum_{m>M} t_m ~ (1/2pi) ln((u + sqrt(u^2+q^2)) / (2u)) at the
  // lower endpoint (the antiderivative vanishes at infinity).
  double u0 = kTwoPi * ((double)m_max + 0.5);
  series -= std::log((u0 + std::sqrt(u0 * u0 + q2)) / (2.0 * u0)) / kTwoPi;
  double rhs = (double)n / (2.0 * l0 * kappa) - std::log(kTwoPi * (double)n / l0) / kTwoPi +
               series;
  return rhs - alpha;
}

double polymer_threshold(double alpha, int n, double l0, long m_max, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("tol must be positive");
  auto f = [&](double kappa) { return polymer_residual(alpha, n, l0, kappa, m_max); };
  // f is strictly decreasing in kappa: +inf at 0+, -inf at infinity.
  double lo = 1e-8, hi = 1.0;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("no spectral threshold in bracket");
  }
  if (!(f(lo) > 0.0)) {
    while (!(f(lo) > 0.0)) {
      lo *= 0.125;
      if (lo < 1e-300) throw std::runtime_error("no spectral threshold in bracket");
    }
  }
  for (int it = 0; it < 300 && (hi - lo) > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  double kappa = 0.5 * (lo + hi);
  if (std::abs(f(kappa)) >= tol)
    throw std::runtime_error("threshold residual did not reach the requested tolerance");
  return kappa;
}

double polymer_threshold_energy(double alpha, int n, double l0, long m_max, double tol) {
  double kappa = polymer_threshold(alpha, n, l0, m_max, tol);
  return -kappa * kappa;
}

StarBS::StarBS(double beta, double gamma, double arm_length, int nodes_per_arm)
    : beta_(beta), gamma_(gamma), arm_length_(arm_length), nodes_per_arm_(nodes_per_arm) {
  if (!(beta > 0.0) || !(beta <= kPi)) throw std::domain_error("beta must lie in (0, pi]");
  if (!(gamma > 0.0) || !(arm_length > 0.0))
    throw std::domain_error("gamma and arm_length must be positive");
  if (nodes_per_arm < 50) throw std::domain_error("need at least 50 nodes per arm");

  int n = nodes_per_arm;
  cell_ = arm_length / (double)n;
  std::vector<double> s((std::size_t)n);
  for (int i = 0; i < n; ++i) s[(std::size_t)i] = ((double)i + 0.5) * cell_;

  double cb = std::cos(beta);
  dist_.resize(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double same = std::abs(s[(std::size_t)i] - s[(std::size_t)j]);
      double cross = std::sqrt(std::max(
          0.0, s[(std::size_t)i] * s[(std::size_t)i] + s[(std::size_t)j] * s[(std::size_t)j] -
                   2.0 * s[(std::size_t)i] * s[(std::size_t)j] * cb));
      dist_(i, j) = same;
      dist_(n + i, n + j) = same;
      dist_(i, n + j) = cross;
      dist_(n + i, j) = cross;
    }
  }
}

double StarBS::lambda_max(double kappa) const {
  if (!(kappa > 0.0)) throw std::domain_error("kappa must be positive");
  Eigen::Index n2 = dist_.rows();
  double pref = gamma_ / kTwoPi;
  // Diagonal cell: exact integral of K0 over the singular cell,
  // int_{-h/2}^{h/2} K0(kappa |t|) dt = (2/kappa) * int_0^{kappa h/2} K0.
  double diag = pref * (2.0 / kappa) * int_k0(kappa * cell_ / 2.0);
  Eigen::MatrixXd b(n2, n2);
  parallel_for((std::size_t)n2, [&](std::size_t jj) {
    Eigen::Index j = (Eigen::Index)jj;
    b(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n2; ++i)
      b(i, j) = pref * cell_ * bessel_k0(kappa * dist_(i, j));
  });
  for (Eigen::Index j = 0; j < n2; ++j)
    for (Eigen::Index i = j + 1; i < n2; ++i) b(j, i) = b(i, j);
  return detail::eigenvalue_at_index(std::move(b), (int)n2 - 1);
}

std::optional<double> StarBS::bound_state_energy(double kappa_tol, double bracket_hi) const {
  double lo = 0.5 * gamma_ * (1.0 + 1e-6);
  double hi = bracket_hi * gamma_;
  if (lambda_max(lo) < 1.0) return std::nullopt;  // nothing below the line threshold
  while (lambda_max(hi) > 1.0) {
    hi *= 1.5;
    if (hi > 100.0 * gamma_)
      throw std::runtime_error("failed to bracket the integral-operator root");
  }
  for (int it = 0; it < 200 && (hi - lo) > kappa_tol; ++it) {
    double mid = 0.5 * (lo + hi);
    (lambda_max(mid) > 1.0 ? lo : hi) = mid;
  }
  double kappa = 0.5 * (lo + hi);
  return -kappa * kappa;
}

double nest_bound(double beta) {
  if (!(beta > 0.0) || !(beta < kPi)) throw std::domain_error("beta must lie in (0, pi)");
  double half = 0.5 * beta;
  double sec = 1.0 / std::cos(half);
  double cot = std::cos(half) / std::sin(half);
  double top = 8.0 * sec - 5.0;
  double bot = 8.0 * sec - 3.0;
  return cot * std::pow(top, 1.5) / (16.0 * kPi * std::sqrt(bot));
}

}  // namespace lgq
