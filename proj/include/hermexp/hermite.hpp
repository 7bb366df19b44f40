#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hermexp/signed_log.hpp"

namespace hermexp {

inline constexpr int kDegreeCap = 4096;

// ln(n!), table-backed, valid for n <= 2*kDegreeCap + 1
double log_factorial(int n);

// ln sqrt(2^n n! sqrt(pi)), the normalization between H_n and Hcal_n
double log_norm_factor(int n);

// One step of the orthonormal recurrence
//   Hcal_{n+1}(t) = t*sqrt(2/(n+1))*Hcal_n(t) - sqrt(n/(n+1))*Hcal_{n-1}(t).
// Inline and branch-free so callers (and tests) reproduce the exact
// floating-point expression; parity in t is preserved bit for bit.
inline double ortho_step(double t, int n, double vn, double vnm1) {
  return t * std::sqrt(2.0 / (n + 1)) * vn - std::sqrt(n / (n + 1.0)) * vnm1;
}

// Per-point evaluation record of the orthonormal Hermite functions.
// |values[n]| <= 0.82 for all n; entries may underflow to 0 at extreme |t|.
struct OrthoHermiteSequence {
  double t = 0.0;
  Eigen::VectorXd values;
};

OrthoHermiteSequence ortho_hermite_seq(double t, int nmax);

// Scaled record Hcal_n(t) = mantissa[n] * exp(logscale[n]); exact where the
// plain value underflows (the Gaussian seed is carried in log domain once
// t*t > 1420).
struct ScaledOrthoSeq {
  double t = 0.0;
  Eigen::VectorXd mantissa;
  Eigen::VectorXd logscale;

  SignedLogValue log_value(int n) const {
    if (mantissa[n] == 0.0) return SignedLogValue::zero();
    return {mantissa[n] > 0.0 ? 1 : -1, std::log(std::abs(mantissa[n])) + logscale[n]};
  }
};

ScaledOrthoSeq ortho_hermite_scaled(double t, int nmax);

// H_n(t) in signed-log form; logmag assembled from log-factorials
SignedLogValue hermite_poly(int n, double t);

// H_0(t)..H_N(t) from a single recurrence pass
std::vector<SignedLogValue> hermite_poly_all(double t, int nmax);

// kernel h_n(t) = Hcal_n(t) e^{-t^2/2} / sqrt(2^n n! sqrt(pi)); always
// representable, underflows to 0 at large |t|
double h_fn(int n, double t);

// k-th derivative via h_n^(k) = (-1)^k 2^k (n+1)...(n+k) h_{n+k}; throws
// std::overflow_error if the recombined value exceeds double range
double h_fn_deriv(int n, int k, double t);

// the n real roots of H_n, ascending, exactly antisymmetric about 0
Eigen::VectorXd hermite_zeros(int n);

struct NormResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

// (integral |h_n|^p)^(1/p) for finite p >= 1 (relative target 1e-9, panels
// anchored at the zeros of H_n); for p = infinity, max of |h_n| over
// {0} union zeros(H_{n+1}), which are the extrema of h_n
NormResult h_norm_ex(int n, double p);
double h_norm(int n, double p);

struct MuckenhouptFit {
  double c = 0.0;
  double gamma = 0.125;
  bool holds = false;
};

// Fits the smallest C such that
//   |Hcal_n(t)| <= C (N^{1/3} + |N - t^2|)^{-1/4}   for t^2 <= 2N, N = 2n+1,
//   |Hcal_n(t)| <= C e^{-gamma t^2}                 for t^2 > 2N,
// over n in [n_lo, n_hi] on a dense grid, then verifies the same C on
// (n_hi, 4*n_hi]. The consequent polynomial bound
//   |H_n(t)| n^{1/12} <= C pi^{1/4} e^{t^2/2} sqrt(2^n n!)
// is checked on the oscillatory region with the same C.
MuckenhouptFit muckenhoupt_calibrate(int n_lo, int n_hi);

}  // namespace hermexp
