#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "hermexp/operator_models.hpp"

namespace hermexp {

// all coefficients of one expansion family up to degree max_n
CoefficientTable build_coeff_table(const OperatorModel& model, ExpansionKind kind,
                                   int max_n, const StateVector& x);

// sum_{n<=m} entry_n * H_{deg(n)}(t) where deg follows the table kind
// (group: n, cosine: 2n, sine: 2n+1); log-domain terms, compensated sums
StateVector partial_from_table(const CoefficientTable& table, double t, int m);

// truncated expansions T_m(t)x, C_m(t)x, S_m(t)x
StateVector group_partial(const OperatorModel& model, const StateVector& x,
                          double t, int m);
StateVector cosine_partial(const OperatorModel& model, const StateVector& x,
                           double t, int m);
StateVector sine_partial(const OperatorModel& model, const StateVector& x,
                         double t, int m);

// power series of the subordinated semigroup around z = 1/4, valid on
// |z - 1/4| < 1/4: group kind sums (1/(2^{2n} n!)) A^{2n} T_g(1/4)x (4z-1)^n,
// cosine kind the A^n T_c(1/4) analogue
StateVector holo_series(const OperatorModel& model, const StateVector& x,
                        std::complex<double> z, int m, ExpansionKind kind);

// Hermite expansion of the Fejer family: constant term plus
// sum_{n=1}^N K_n H_{2n}(t), inner s-integrals in closed Gaussian-moment form
// (diagonal and matrix models)
StateVector fejer_expansion(const OperatorModel& model, const StateVector& x,
                            double t, int terms, ExpansionKind kind);

// l2 norms of the individual Fejer series terms, n = 1..terms
Eigen::VectorXd fejer_expansion_term_norms(const OperatorModel& model,
                                           const StateVector& x, double t,
                                           int terms, ExpansionKind kind);

// Laguerre comparison series sum_{n<=m} resolvent_power(n, alpha) L_n^(a)(t)
StateVector laguerre_partial(const OperatorModel& model, const StateVector& x,
                             double t, int m, double alpha);

struct ErrorCurve {
  std::vector<int> degrees;
  std::vector<double> errors;
  double t = 0.0;
  double norm_p = 2.0;
  ExpansionKind kind = ExpansionKind::group;
};

ErrorCurve error_curve(const OperatorModel& model, const StateVector& x, double t,
                       const std::vector<int>& degrees, ExpansionKind kind,
                       double norm_p = 2.0);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;             // RMS of log-error fit deviations
  std::pair<int, int> window{0, 0};  // first and last degree used
};

// least-squares line through (log m, log error) after dropping the first
// `drop` points; a zero error terminates the fit window
RateFit rate_fit(const ErrorCurve& curve, int drop);

struct BoundCheck {
  double c = 0.0;
  bool holds = false;
};

// coefficient-decay bound check: fits the constant of
//   ||entry_n|| <= C sqrt((n-p)!) / (2^{(n+p)/2} n!) ||A^p x||       (group)
// (cosine/sine shapes analogous, the sine norm uses A^{p+1}) on
// n in [n_lo, n_fit_hi] and verifies it on (n_fit_hi, n_hi]
BoundCheck coeff_bound_check(const OperatorModel& model, const StateVector& x,
                             ExpansionKind kind, int p, int n_lo, int n_fit_hi,
                             int n_hi);

// standard test states: x_k = k^{-s} and x_k = r^k, k = 1..dim
StateVector power_state(int dim, double s);
StateVector geometric_state(int dim, double r);

}  // namespace hermexp
