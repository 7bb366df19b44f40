#include "hermexp/state_vector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hermexp {

namespace {

void check_same_shape(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size() || !(a.grid == b.grid))
    throw std::invalid_argument("state shape mismatch");
}

}  // namespace

double StateVector::norm(double p) const {
  if (!(p >= 1.0))
    throw std::invalid_argument("norm order must satisfy p >= 1");
  if (v.size() == 0) return 0.0;
  if (std::isinf(p)) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
  }
  // compensated sum in a fixed ascending order keeps reruns bit-identical
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double term = std::pow(std::abs(v[i]), p);
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  if (on_grid()) sum *= grid.dx();
  return std::pow(sum, 1.0 / p);
}

StateVector operator+(const StateVector& a, const StateVector& b) {
  check_same_shape(a, b);
  return {a.v + b.v, a.grid};
}

StateVector operator-(const StateVector& a, const StateVector& b) {
  check_same_shape(a, b);
  return {a.v - b.v, a.grid};
}

StateVector operator*(const std::complex<double>& c, const StateVector& a) {
  return {c * a.v, a.grid};
}

StateVector operator*(double c, const StateVector& a) {
  return {c * a.v, a.grid};
}

LogStateVector LogStateVector::from_state(const StateVector& s) {
  LogStateVector out;
  out.grid = s.grid;
  out.logmag.resize(s.size());
  out.phase.resize(s.size());
  for (int j = 0; j < s.size(); ++j) {
    LogComplex lc = LogComplex::from_complex(s.v[j]);
    out.logmag[j] = lc.logmag;
    out.phase[j] = lc.phase;
  }
  return out;
}

StateVector LogStateVector::to_state() const {
  StateVector out;
  out.grid = grid;
  out.v.resize(size());
  for (int j = 0; j < size(); ++j) out.v[j] = value(j);
  return out;
}

double LogStateVector::log_norm2() const {
  if (size() == 0) return -std::numeric_limits<double>::infinity();
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < size(); ++j) m = std::max(m, logmag[j]);
  if (std::isinf(m) && m < 0) return m;
  double sum = 0.0;
  for (int j = 0; j < size(); ++j) sum += std::exp(2.0 * (logmag[j] - m));
  double ln = m + 0.5 * std::log(sum);
  if (grid.points > 0) ln += 0.5 * std::log(grid.dx());
  return ln;
}

}  // namespace hermexp
