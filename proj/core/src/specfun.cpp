#include "lgq/specfun.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lgq {
namespace {

struct GslHandlerOff {
  GslHandlerOff() { gsl_set_error_handler_off(); }
};
const GslHandlerOff handler_off_once{};

void require_positive_finite(double x, const char* fn) {
  if (!std::isfinite(x) || x <= 0.0)
    throw std::domain_error(std::string(fn) + ": argument must be finite and > 0, got " +
                            std::to_string(x));
}

SpecFunResult from_gsl(int status, const gsl_sf_result& r, const char* fn) {
  if (status == GSL_SUCCESS) return {r.val, SpecFunStatus::ok};
  if (status == GSL_EUNDRFLW) return {0.0, SpecFunStatus::underflow_to_zero};
  throw std::runtime_error(std::string(fn) + ": " + gsl_strerror(status));
}

// adaptive Simpson on [a, b]
double simpson_rec(const auto& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const auto& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

SpecFunResult bessel_k0_ext(double x) {
  require_positive_finite(x, "bessel_k0");
  gsl_sf_result r;
  return from_gsl(gsl_sf_bessel_K0_e(x, &r), r, "bessel_k0");
}

double bessel_k0(double x) { return bessel_k0_ext(x).value; }

SpecFunResult bessel_k1_ext(double x) {
  require_positive_finite(x, "bessel_k1");
  gsl_sf_result r;
  return from_gsl(gsl_sf_bessel_K1_e(x, &r), r, "bessel_k1");
}

double bessel_k1(double x) { return bessel_k1_ext(x).value; }

namespace {

// Small-x product via the ascending series: the (x/2)^l and (x/2)^{-l} factors
// of I_l and K_l cancel exactly, leaving
//   I_l K_l = 1/(2l) * [sum_j (x^2/4)^j / (j! (l+1)_j)]
//                    * [sum_{k<l} (-x^2/4)^k / (k! (l-1)(l-2)...(l-k))]
// plus a correction of order (x/2)^{2l} ln x, negligible whenever the separate
// factors over/underflow double range (which is when this path is taken).
double ik_product_series(int l, double x) {
  const double q = 0.25 * x * x;
  double si = 1.0, ti = 1.0;
  for (int j = 1; j <= 64; ++j) {
    ti *= q / (double(j) * double(l + j));
    si += ti;
    if (ti < 1e-18 * si) break;
  }
  double sk = 1.0, tk = 1.0;
  for (int k = 1; k < l; ++k) {
    tk *= -q / (double(k) * double(l - k));
    sk += tk;
    if (std::abs(tk) < 1e-18 * std::abs(sk)) break;
  }
  return si * sk / (2.0 * l);
}

}  // namespace

SpecFunResult bessel_ik_product_ext(int l, double x) {
  require_positive_finite(x, "bessel_ik_product");
  if (l < 0) throw std::domain_error("bessel_ik_product: order must be >= 0");
  gsl_sf_result ri, rk;
  // e^{-x} I_l and e^{x} K_l: the scale factors cancel in the product
  const int si = gsl_sf_bessel_In_scaled_e(l, x, &ri);
  const int sk = gsl_sf_bessel_Kn_scaled_e(l, x, &rk);
  if (l >= 1 &&
      (sk == GSL_EOVRFLW || si == GSL_EUNDRFLW || (si == GSL_SUCCESS && ri.val == 0.0)))
    return {ik_product_series(l, x), SpecFunStatus::ok};
  const SpecFunResult i = from_gsl(si, ri, "bessel_ik_product");
  const SpecFunResult k = from_gsl(sk, rk, "bessel_ik_product");
  if (i.status == SpecFunStatus::underflow_to_zero || k.status == SpecFunStatus::underflow_to_zero)
    return {0.0, SpecFunStatus::underflow_to_zero};
  return {i.value * k.value, SpecFunStatus::ok};
}

double bessel_ik_product(int l, double x) { return bessel_ik_product_ext(l, x).value; }

double int_k0(double x) {
  if (!std::isfinite(x) || x < 0.0)
    throw std::domain_error("int_k0: argument must be finite and >= 0");
  if (x == 0.0) return 0.0;
  if (x <= 5.0) {
    // term-wise integral of K0(t) = -(ln(t/2)+C_E) I0(t) + sum_m H_m (t/2)^{2m}/(m!)^2
    const double lg = -std::log(0.5 * x) - euler_gamma;
    double am = 1.0;  // 1/((m!)^2 4^m)
    double hm = 0.0;  // harmonic number H_m
    double sum = 0.0;
    const double x2 = x * x;
    double xpow = x;  // x^{2m+1}
    for (int m = 0; m <= 40; ++m) {
      if (m > 0) {
        am /= 4.0 * m * m;
        hm += 1.0 / m;
        xpow *= x2;
      }
      const double inv = 1.0 / (2 * m + 1);
      const double term = am * xpow * ((lg + hm) * inv + inv * inv);
      sum += term;
      if (m > 3 && std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  // int_0^inf K0 = pi/2; subtract the exponentially small tail
  const auto tail_f = [](double t) { return gsl_sf_bessel_K0(t); };
  const double tail = integrate(tail_f, x, x + 60.0, 1e-16);
  return std::numbers::pi / 2.0 - tail;
}

}  // namespace lgq
