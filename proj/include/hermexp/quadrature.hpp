#ifndef HERMEXP_QUADRATURE_HPP
#define HERMEXP_QUADRATURE_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "hermexp/state_vector.hpp"

namespace hermexp {

// Gauss rule for weight e^{-t^2} on the line.  weights may underflow at the
// extreme nodes of large rules; log_scaled_weights stores
// ln(weight * e^{node^2}) and stays finite for every rule size we allow.
struct QuadratureRule {
  Eigen::VectorXd nodes;  // ascending, antisymmetric
  Eigen::VectorXd weights;
  Eigen::VectorXd log_scaled_weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule gauss_hermite_rule(int size);

// integral of h_n(t) F(t) dt over the line by the rule; exact when
// e^{t^2/2} F(t) is a polynomial of degree <= 2*size - 1 - n.
// Requires rule.size() >= n + 32 so the kernel itself is resolved.
StateVector coeff_by_quadrature(const std::function<StateVector(double)>& f,
                                int n, const QuadratureRule& rule);

struct LpResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

// Lp distance of f and g over [-half_width, half_width] by adaptive composite
// Gauss-Legendre panels (p = infinity: sup over the panel nodes).  The caller
// picks half_width large enough that the Gaussian-envelope tails outside are
// negligible at the 1e-13 level.
LpResult lp_error_on_line_ex(
    const std::function<std::complex<double>(double)>& f,
    const std::function<std::complex<double>(double)>& g, double p,
    double half_width);

double lp_error_on_line(const std::function<std::complex<double>(double)>& f,
                        const std::function<std::complex<double>(double)>& g,
                        double p, double half_width = 14.0);

}  // namespace hermexp

#endif
