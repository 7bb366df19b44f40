#pragma once

#include <Eigen/Dense>
#include <complex>

#include "hermexp/signed_log.hpp"

namespace hermexp {

// uniform periodic grid over [-half_width, half_width); points == 0 marks a
// plain coordinate vector
struct GridSpec {
  double half_width = 0.0;
  int points = 0;

  double dx() const { return 2.0 * half_width / points; }
  double node(int j) const { return -half_width + j * dx(); }
  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.half_width == b.half_width && a.points == b.points;
  }
};

// finite complex coordinate vector or grid function; the expansion state
struct StateVector {
  Eigen::VectorXcd v;
  GridSpec grid{};

  bool on_grid() const { return grid.points > 0; }
  int size() const { return static_cast<int>(v.size()); }

  // lp norm of coordinates, or grid Lp norm (dx-weighted); p may be infinity
  double norm(double p = 2.0) const;

  static StateVector coords(Eigen::VectorXcd values) {
    return {std::move(values), GridSpec{}};
  }
  static StateVector on(const GridSpec& g, Eigen::VectorXcd values) {
    return {std::move(values), g};
  }
};

StateVector operator+(const StateVector& a, const StateVector& b);
StateVector operator-(const StateVector& a, const StateVector& b);
StateVector operator*(const std::complex<double>& c, const StateVector& a);
StateVector operator*(double c, const StateVector& a);

// componentwise log-polar storage: component j is exp(logmag[j]) e^{i phase[j]};
// keeps coefficient magnitudes meaningful far below double range
struct LogStateVector {
  Eigen::VectorXd logmag;
  Eigen::VectorXd phase;
  GridSpec grid{};

  int size() const { return static_cast<int>(logmag.size()); }

  static LogStateVector from_state(const StateVector& s);
  StateVector to_state() const;  // underflow flushes to exact zero

  std::complex<double> value(int j) const {
    return LogComplex{logmag[j], phase[j]}.to_complex();
  }

  // ln of the l2 (or grid L2) norm via log-sum-exp; -inf for the zero vector
  double log_norm2() const;
};

}  // namespace hermexp
