#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace hermexp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// largest x with exp(x) finite in double
inline constexpr double kLogMax = 709.782712893383996;

// Real number as sign * exp(logmag). sign == 0 iff logmag == -inf, so products
// of astronomically large and small factors never overflow before they cancel.
struct SignedLogValue {
  int sign = 0;
  double logmag = kNegInf;

  static SignedLogValue zero() { return {0, kNegInf}; }

  static SignedLogValue from_real(double x) {
    if (x == 0.0) return zero();
    return {x > 0.0 ? 1 : -1, std::log(std::abs(x))};
  }

  static SignedLogValue from_log(int sign, double logmag) {
    if (sign == 0 || logmag == kNegInf) return zero();
    return {sign, logmag};
  }

  bool is_zero() const { return sign == 0; }

  // Throws instead of silently returning inf; underflow to 0 is fine.
  double to_real() const {
    if (sign == 0) return 0.0;
    if (logmag > kLogMax)
      throw std::overflow_error("SignedLogValue: magnitude exceeds double range");
    return sign * std::exp(logmag);
  }

  SignedLogValue operator-() const { return {-sign, logmag}; }

  friend SignedLogValue operator*(const SignedLogValue& a, const SignedLogValue& b) {
    if (a.sign == 0 || b.sign == 0) return zero();
    return {a.sign * b.sign, a.logmag + b.logmag};
  }

  friend SignedLogValue operator*(const SignedLogValue& a, double c) {
    return a * from_real(c);
  }

  friend SignedLogValue operator*(double c, const SignedLogValue& a) {
    return a * from_real(c);
  }

  // log-sum-exp with signs; exact cancellation of equal magnitudes gives zero()
  friend SignedLogValue operator+(const SignedLogValue& a, const SignedLogValue& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const SignedLogValue& hi = (a.logmag >= b.logmag) ? a : b;
    const SignedLogValue& lo = (a.logmag >= b.logmag) ? b : a;
    const double d = lo.logmag - hi.logmag;  // <= 0
    if (hi.sign == lo.sign) return {hi.sign, hi.logmag + std::log1p(std::exp(d))};
    if (d == 0.0) return zero();
    return {hi.sign, hi.logmag + std::log1p(-std::exp(d))};
  }

  friend SignedLogValue operator-(const SignedLogValue& a, const SignedLogValue& b) {
    return a + (-b);
  }
};

// Complex number as exp(logmag) * exp(i*phase); zero encoded by logmag == -inf.
struct LogComplex {
  double logmag = kNegInf;
  double phase = 0.0;

  static LogComplex zero() { return {kNegInf, 0.0}; }

  static LogComplex from_complex(const std::complex<double>& z) {
    const double m = std::abs(z);
    if (m == 0.0) return zero();
    return {std::log(m), std::arg(z)};
  }

  bool is_zero() const { return logmag == kNegInf; }

  std::complex<double> to_complex() const {
    if (is_zero()) return {0.0, 0.0};
    if (logmag > kLogMax)
      throw std::overflow_error("LogComplex: magnitude exceeds double range");
    const double m = std::exp(logmag);
    return {m * std::cos(phase), m * std::sin(phase)};
  }

  // multiply by exp(log_factor) * exp(i*phase_shift)
  LogComplex scaled(double log_factor, double phase_shift = 0.0) const {
    if (is_zero()) return zero();
    return {logmag + log_factor, phase + phase_shift};
  }
};

}  // namespace hermexp
