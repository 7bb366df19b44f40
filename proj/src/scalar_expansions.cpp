#include "hermexp/scalar_expansions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hermexp/hermite.hpp"
#include "hermexp/quadrature.hpp"

namespace hermexp {

namespace {

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double term) {
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

struct ComplexKahan {
  std::complex<double> sum{0.0, 0.0}, comp{0.0, 0.0};
  void add(const std::complex<double>& term) {
    std::complex<double> y = term - comp;
    std::complex<double> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

void check_count(int m, const char* who) {
  if (m < 0) throw std::invalid_argument(std::string(who) + ": negative count");
}

}  // namespace

std::complex<double> exp_partial(std::complex<double> lambda, double t, int m) {
  check_count(m, "exp_partial");
  const std::vector<SignedLogValue> lh = hermite_poly_all(t, m);
  const double lmag = std::abs(lambda) > 0.0 ? std::log(std::abs(lambda))
                                             : -std::numeric_limits<double>::infinity();
  const double larg = std::arg(lambda);
  const std::complex<double> quarter_sq = 0.25 * lambda * lambda;
  ComplexKahan acc;
  for (int n = 0; n <= m; ++n) {
    if (n > 0 && lambda == std::complex<double>(0.0, 0.0)) break;
    if (lh[n].sign == 0) continue;
    // lambda^n e^{lambda^2/4} H_n(t) / (2^n n!), assembled in log-polar form;
    // n = 0 contributes log 1 even when lmag = -inf (0 * -inf is NaN)
    const double logmag = (n == 0 ? 0.0 : n * lmag) + quarter_sq.real() -
                          n * M_LN2 - log_factorial(n) + lh[n].logmag;
    if (logmag > kLogMax)
      throw std::overflow_error("exp_partial: term exceeds double range");
    const double phase = n * larg + quarter_sq.imag();
    acc.add(static_cast<double>(lh[n].sign) * std::exp(logmag) *
            std::complex<double>(std::cos(phase), std::sin(phase)));
  }
  return acc.sum;
}

double cos_partial(double a, double t, int m) {
  check_count(m, "cos_partial");
  if (!(a > 0.0)) throw std::invalid_argument("cos_partial: a must be positive");
  const std::vector<SignedLogValue> lh = hermite_poly_all(t, 2 * m);
  const double la = std::log(a);
  Kahan acc;
  for (int n = 0; n <= m; ++n) {
    const SignedLogValue& h = lh[2 * n];
    if (h.sign == 0) continue;
    // (-a)^n e^{-a/4} H_{2n}(t) / (2^{2n} (2n)!)
    const double logmag =
        n * la - 0.25 * a - 2.0 * n * M_LN2 - log_factorial(2 * n) + h.logmag;
    if (logmag > kLogMax)
      throw std::overflow_error("cos_partial: term exceeds double range");
    const int sign = (n % 2 == 0) ? h.sign : -h.sign;
    acc.add(sign * std::exp(logmag));
  }
  return acc.sum;
}

namespace detail {

SignedLogValue dirichlet_coeff_log(double s, int n) {
  if (n < 1) throw std::invalid_argument("dirichlet coefficient index starts at 1");
  const int power = 2 * n - 2;
  if (s == 0.0 && power > 0) return SignedLogValue::zero();
  const double logpow = (power == 0) ? 0.0 : power * std::log(std::abs(s));
  const double logmag = logpow - 0.25 * s * s - (2 * n - 1) * M_LN2 -
                        log_factorial(2 * n - 1) - std::log(M_PI);
  return {(n % 2 == 1) ? 1 : -1, logmag};
}

SignedLogValue fejer_even_coeff_log(double s, int n) {
  if (n < 1) throw std::invalid_argument("fejer coefficient index starts at 1");
  const int power = 2 * n - 2;
  if (s == 0.0 && power > 0) return SignedLogValue::zero();
  const double logpow = (power == 0) ? 0.0 : power * std::log(std::abs(s));
  const double logmag = logpow - 0.25 * s * s - 2.0 * n * M_LN2 -
                        log_factorial(2 * n) - std::log(M_PI);
  return {(n % 2 == 1) ? 1 : -1, logmag};
}

}  // namespace detail

Eigen::VectorXd dirichlet_coeffs(double s, int count) {
  if (count < 1) throw std::invalid_argument("dirichlet_coeffs: count >= 1");
  if (!std::isfinite(s)) throw std::invalid_argument("dirichlet_coeffs: non-finite s");
  Eigen::VectorXd out(count);
  for (int n = 1; n <= count; ++n) out[n - 1] = detail::dirichlet_coeff_log(s, n).to_real();
  return out;
}

FejerCoeffs fejer_coeffs(double s, int count) {
  if (count < 1) throw std::invalid_argument("fejer_coeffs: count >= 1");
  if (!std::isfinite(s)) throw std::invalid_argument("fejer_coeffs: non-finite s");
  FejerCoeffs out;
  if (std::abs(s) < 1e-4) {
    // (1 - e^{-u})/(4 pi u) with u = s^2/4; Taylor avoids the cancellation
    const double u = 0.25 * s * s;
    out.c0 = (1.0 / (4.0 * M_PI)) *
             (1.0 + u * (-1.0 / 2 + u * (1.0 / 6 + u * (-1.0 / 24 + u * (1.0 / 120 - u / 720)))));
  } else {
    out.c0 = -std::expm1(-0.25 * s * s) / (M_PI * s * s);
  }
  out.evens.resize(count);
  for (int n = 1; n <= count; ++n) out.evens[n - 1] = detail::fejer_even_coeff_log(s, n).to_real();
  return out;
}

double fejer_coeff_l1_norm(int n) {
  if (n < 1) throw std::invalid_argument("fejer_coeff_l1_norm: n >= 1");
  return std::exp(-(std::log(2.0 * n - 1.0) + 2.0 * n * M_LN2 + log_factorial(n) +
                    0.5 * std::log(M_PI)));
}

double dirichlet_kernel(double s, double t) {
  const double u = t * s;
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    return (t / M_PI) * (1.0 - u2 / 6.0 + u2 * u2 / 120.0);
  }
  return std::sin(u) / (M_PI * s);
}

double fejer_kernel(double s, double t) {
  const double u = t * s;
  if (std::abs(u) < 1e-3) {
    const double u2 = u * u;
    return (t * t / (2.0 * M_PI)) * (1.0 - u2 / 12.0 + u2 * u2 / 360.0);
  }
  const double sn = std::sin(0.5 * u);
  return 2.0 * sn * sn / (M_PI * s * s);
}

double dirichlet_partial(double s, double t, int terms) {
  if (terms < 1) throw std::invalid_argument("dirichlet_partial: terms >= 1");
  const std::vector<SignedLogValue> lh = hermite_poly_all(t, 2 * terms - 1);
  Kahan acc;
  for (int n = 1; n <= terms; ++n) {
    const SignedLogValue c = detail::dirichlet_coeff_log(s, n);
    const SignedLogValue& h = lh[2 * n - 1];
    if (c.sign == 0 || h.sign == 0) continue;
    acc.add(c.sign * h.sign * std::exp(c.logmag + h.logmag));
  }
  return acc.sum;
}

double fejer_partial(double s, double t, int terms) {
  if (terms < 0) throw std::invalid_argument("fejer_partial: terms >= 0");
  const std::vector<SignedLogValue> lh = hermite_poly_all(t, 2 * terms);
  Kahan acc;
  acc.add(fejer_coeffs(s, 1).c0);  // H_0 = 1
  for (int n = 1; n <= terms; ++n) {
    const SignedLogValue c = detail::fejer_even_coeff_log(s, n);
    const SignedLogValue& h = lh[2 * n];
    if (c.sign == 0 || h.sign == 0) continue;
    acc.add(c.sign * h.sign * std::exp(c.logmag + h.logmag));
  }
  return acc.sum;
}

double eta_partial_error(std::complex<double> lambda, int m, double p) {
  check_count(m, "eta_partial_error");
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("eta_partial_error: p must lie in [1, infinity)");
  const double half_width = 14.0 + std::abs(lambda);
  const double lmag = std::abs(lambda) > 0.0 ? std::log(std::abs(lambda))
                                             : -std::numeric_limits<double>::infinity();
  const double larg = std::arg(lambda);
  const std::complex<double> quarter_sq = 0.25 * lambda * lambda;
  const double log_pre = 0.5 * std::log(M_PI) + quarter_sq.real();

  auto target = [&](double t) {
    return std::exp(-t * t) *
           std::exp(std::complex<double>(lambda.real() * t, lambda.imag() * t));
  };
  auto partial = [&](double t) {
    const ScaledOrthoSeq seq = ortho_hermite_scaled(t, m);
    ComplexKahan acc;
    for (int n = 0; n <= m; ++n) {
      if (n > 0 && lambda == std::complex<double>(0.0, 0.0)) break;
      const SignedLogValue v = seq.log_value(n);
      if (v.is_zero()) continue;
      // sqrt(pi) e^{lambda^2/4} lambda^n h_n(t); n = 0 term carries log 1
      const double logmag = log_pre + (n == 0 ? 0.0 : n * lmag) + v.logmag -
                            0.5 * t * t - log_norm_factor(n);
      const double phase = quarter_sq.imag() + n * larg;
      acc.add(static_cast<double>(v.sign) * std::exp(logmag) *
              std::complex<double>(std::cos(phase), std::sin(phase)));
    }
    return acc.sum;
  };
  return lp_error_on_line(target, partial, p, half_width);
}

double weighted_pairing_term(const std::function<double(double)>& phi, int n) {
  if (n < 0) throw std::invalid_argument("weighted_pairing_term: negative degree");
  const QuadratureRule rule = gauss_hermite_rule(std::max(2 * n + 64, 64));
  Kahan acc;
  for (int i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    const ScaledOrthoSeq seq = ortho_hermite_scaled(x, n);
    const SignedLogValue v = seq.log_value(n);
    if (v.is_zero()) continue;
    const double pv = phi(x);
    if (!std::isfinite(pv))
      throw std::runtime_error("weighted_pairing_term: non-finite weight value");
    if (pv == 0.0) continue;
    // node factor exp(lsw - x^2/2) Hcal_n(x); the 2^n n! sqrt(pi) scale of
    // H_n cancels against the normalizing prefactor
    const double logmag = rule.log_scaled_weights[i] - 0.5 * x * x + v.logmag +
                          std::log(std::abs(pv));
    acc.add(v.sign * (pv > 0 ? 1.0 : -1.0) * std::exp(logmag));
  }
  return std::pow(static_cast<double>(n), 0.25) * acc.sum;
}

}  // namespace hermexp
