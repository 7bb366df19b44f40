#ifndef HERMEXP_TESTS_ORACLES_HPP
#define HERMEXP_TESTS_ORACLES_HPP

// Independent reference computations for the test suite. Deliberately slow:
// exact integer arithmetic where possible, brute-force integration otherwise.
// Nothing here shares an evaluation path with the library code under test.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

using big_float = boost::multiprecision::cpp_bin_float_50;
using big_int = boost::multiprecision::cpp_int;

inline big_float pi_big() { return boost::math::constants::pi<big_float>(); }

// integer coefficients of H_n in ascending powers, built from the raw
// recurrence H_{n+1} = 2t H_n - 2n H_{n-1}
inline std::vector<big_int> hermite_coeffs(int n) {
  std::vector<big_int> prev{big_int(1)};
  if (n == 0) return prev;
  std::vector<big_int> cur{big_int(0), big_int(2)};
  for (int k = 1; k < n; ++k) {
    std::vector<big_int> next(k + 2, big_int(0));
    for (size_t j = 0; j < cur.size(); ++j) next[j + 1] += 2 * cur[j];
    for (size_t j = 0; j < prev.size(); ++j) next[j] -= 2 * k * prev[j];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

// H_n(t) by Horner on the exact coefficients; the only rounding is the
// 50-digit evaluation itself
inline big_float hermite_poly_exact(int n, double t) {
  const std::vector<big_int> c = hermite_coeffs(n);
  const big_float bt(t);
  big_float acc(0);
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
    acc = acc * bt + big_float(c[j]);
  return acc;
}

inline big_float factorial_big(int n) {
  big_int f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return big_float(f);
}

inline big_float pow2_big(int n) { return big_float(big_int(1) << n); }

// orthonormal Hermite function Hcal_n(t) = H_n(t) e^{-t^2/2} / sqrt(2^n n! sqrt(pi))
inline big_float ortho_exact(int n, double t) {
  const big_float bt(t);
  return hermite_poly_exact(n, t) * exp(-bt * bt / 2) /
         sqrt(pow2_big(n) * factorial_big(n) * sqrt(pi_big()));
}

// kernel h_n(t) = H_n(t) e^{-t^2} / (2^n n! sqrt(pi))
inline big_float kernel_exact(int n, double t) {
  const big_float bt(t);
  return hermite_poly_exact(n, t) * exp(-bt * bt) /
         (pow2_big(n) * factorial_big(n) * sqrt(pi_big()));
}

inline double to_double(const big_float& x) { return x.convert_to<double>(); }

// central finite differences
template <class F>
double fd1(F f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}
template <class F>
double fd2(F f, double t, double h) {
  return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}

// composite Simpson rule with n panels (n even) on [a, b]
template <class F>
auto simpson(F f, double a, double b, int n) -> decltype(f(a)) {
  if (n % 2 != 0) throw std::invalid_argument("simpson: n must be even");
  const double h = (b - a) / n;
  auto acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

// plain trapezoid with n intervals
template <class F>
double trapezoid(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) acc += f(a + i * h);
  return acc * h;
}

// (-iq)^n (1 - iq)^{-n-alpha-1} through the Laplace representation
// (1-A)^{-beta} = (1/Gamma(beta)) integral_0^inf s^{beta-1} e^{-s} e^{sA} ds
inline std::complex<double> resolvent_power_laplace(double q, int n, double alpha) {
  const double beta = n + alpha + 1.0;
  const double upper = 60.0 + 10.0 * n;
  auto integrand = [&](double s) -> std::complex<double> {
    if (s == 0.0) return beta - 1.0 > 0.0 ? 0.0 : 1.0;
    return std::pow(s, beta - 1.0) * std::exp(std::complex<double>(-s, s * q));
  };
  const std::complex<double> integral =
      simpson(integrand, 0.0, upper, 200000);
  const std::complex<double> minus_a(0.0, -q);
  return std::pow(minus_a, n) * integral / std::tgamma(beta);
}

// exact value of integral t^{2j} e^{-t^2} dt over the line = (2j)! sqrt(pi) / (4^j j!)
inline big_float gaussian_even_moment(int j) {
  return factorial_big(2 * j) * sqrt(pi_big()) /
         (pow2_big(2 * j) * factorial_big(j));
}

}  // namespace oracles

#endif  // HERMEXP_TESTS_ORACLES_HPP
