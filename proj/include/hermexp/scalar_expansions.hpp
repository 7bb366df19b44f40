#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "hermexp/signed_log.hpp"

namespace hermexp {

// partial sum to degree m of the Hermite series of exp(lambda t);
// coefficient of H_n is lambda^n e^{lambda^2/4} / (2^n n!)
std::complex<double> exp_partial(std::complex<double> lambda, double t, int m);

// partial sum to even degree 2m of the series of cos(sqrt(a) t), a > 0;
// coefficient of H_{2n} is (-a)^n e^{-a/4} / (2^{2n} (2n)!)
double cos_partial(double a, double t, int m);

// odd-degree coefficients c_{2n-1}(s) of the Dirichlet family
// d_t(s) = sin(ts)/(pi s), expanded in Hermite polynomials of the
// concentration parameter t; entry n-1 holds the coefficient of H_{2n-1},
// n = 1..count
Eigen::VectorXd dirichlet_coeffs(double s, int count);

struct FejerCoeffs {
  double c0 = 0.0;         // coefficient of H_0
  Eigen::VectorXd evens;   // entry n-1 holds the coefficient of H_{2n}
};

// even-degree coefficients c_{2n}(s) of the Fejer family
// f_t(s) = 2 sin^2(ts/2)/(pi s^2), expanded like the Dirichlet family above
FejerCoeffs fejer_coeffs(double s, int count);

// integral over the concentration parameter of |c_{2n}| for the Fejer family,
// in closed form: 1 / ((2n-1) 2^{2n} n! sqrt(pi)), n >= 1
double fejer_coeff_l1_norm(int n);

// the two kernels d_t(s), f_t(s) themselves, stable near s = 0
double dirichlet_kernel(double s, double t);
double fejer_kernel(double s, double t);

// partial sums of the two kernel expansions: sum of c_n(s) H_n(t) over the
// first `terms` nonvanishing degrees, converging to the kernels above
double dirichlet_partial(double s, double t, int terms);
double fejer_partial(double s, double t, int terms);

// Lp distance between eta_lambda(t) = exp(-t^2 + lambda t) and the partial sum
// sqrt(pi) e^{lambda^2/4} sum_{n<=m} lambda^n h_n(t); p lies in [1, infinity)
double eta_partial_error(std::complex<double> lambda, int m, double p);

// n^{1/4} <h_n, phi> with the pairing integral done by a Gauss rule of size
// max(2n + 64, 64); probes which weights phi keep the pairing summable
double weighted_pairing_term(const std::function<double(double)>& phi, int n);

namespace detail {
// signed logs of the family coefficients, shared by the partial sums
SignedLogValue dirichlet_coeff_log(double s, int n);   // n >= 1, degree 2n-1
SignedLogValue fejer_even_coeff_log(double s, int n);  // n >= 1, degree 2n
}  // namespace detail

}  // namespace hermexp
