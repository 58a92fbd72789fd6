#pragma once

namespace lgq {

// Euler-Mascheroni constant
inline constexpr double euler_gamma = 0.5772156649015328606065120900824024;

enum class SpecFunStatus { ok, underflow_to_zero };

struct SpecFunResult {
  double value = 0.0;
  SpecFunStatus status = SpecFunStatus::ok;
};

// Macdonald function K0(x), x > 0. Throws std::domain_error on x <= 0 or
// non-finite x. Relative error <= 1e-12; exponentially small tails that
// underflow double range return 0 with status underflow_to_zero.
SpecFunResult bessel_k0_ext(double x);
double bessel_k0(double x);

// K1(x), same contract as bessel_k0.
SpecFunResult bessel_k1_ext(double x);
double bessel_k1(double x);

// P_l(x) = I_l(x) * K_l(x) computed in product form (no overflow/underflow of
// the separate factors). l >= 0, x > 0. Relative error <= 1e-10.
SpecFunResult bessel_ik_product_ext(int l, double x);
double bessel_ik_product(int l, double x);

// int_0^x K0(t) dt, x >= 0. Series around the log singularity for small x,
// pi/2 minus an adaptively integrated tail for large x. Used for the exact
// diagonal-cell integral of Nystrom discretizations of K0 kernels.
double int_k0(double x);

}  // namespace lgq
