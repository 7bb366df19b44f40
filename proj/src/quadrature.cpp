#include "hermexp/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hermexp/detail/gauss_legendre.hpp"
#include "hermexp/hermite.hpp"

namespace hermexp {

namespace {

struct ComplexKahan {
  std::complex<double> sum{0.0, 0.0};
  std::complex<double> comp{0.0, 0.0};
  void add(const std::complex<double>& term) {
    std::complex<double> y = term - comp;
    std::complex<double> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

QuadratureRule gauss_hermite_rule(int size) {
  if (size < 1) throw std::invalid_argument("rule size must be positive");
  QuadratureRule rule;
  rule.nodes = hermite_zeros(size);
  rule.weights.resize(size);
  rule.log_scaled_weights.resize(size);
  for (int i = 0; i < size; ++i) {
    double x = rule.nodes[i];
    // scaled weight 1 / sum_{k<size} Hcal_k(x)^2, assembled with log-sum-exp
    // so rules far beyond the plain-double Gaussian range stay finite
    ScaledOrthoSeq seq = ortho_hermite_scaled(x, size - 1);
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(size);
    for (int k = 0; k < size; ++k) {
      SignedLogValue lv = seq.log_value(k);
      logs[k] = 2.0 * lv.logmag;
      m = std::max(m, logs[k]);
    }
    double acc = 0.0;
    for (int k = 0; k < size; ++k) acc += std::exp(logs[k] - m);
    double lsw = -(m + std::log(acc));
    rule.log_scaled_weights[i] = lsw;
    rule.weights[i] = std::exp(lsw - x * x);  // may flush to zero; that is fine
  }
  return rule;
}

StateVector coeff_by_quadrature(const std::function<StateVector(double)>& f,
                                int n, const QuadratureRule& rule) {
  if (n < 0) throw std::invalid_argument("degree must be nonnegative");
  if (rule.size() < n + 32)
    throw std::invalid_argument("rule size must be at least degree + 32");
  const double lognorm = log_norm_factor(n);
  StateVector first = f(rule.nodes[0]);
  std::vector<ComplexKahan> acc(first.size());
  for (int i = 0; i < rule.size(); ++i) {
    double x = rule.nodes[i];
    StateVector fx = (i == 0) ? first : f(x);
    if (fx.size() != first.size() || !(fx.grid == first.grid))
      throw std::invalid_argument("integrand changed shape between nodes");
    // node factor  w_i e^{x^2} h_n(x) = exp(lsw - x^2/2 - lognorm) Hcal_n(x)
    const SignedLogValue hv = ortho_hermite_scaled(x, n).log_value(n);
    if (hv.sign == 0) continue;
    double lphi = rule.log_scaled_weights[i] - 0.5 * x * x + hv.logmag - lognorm;
    double phi = hv.sign * std::exp(lphi);
    for (int j = 0; j < first.size(); ++j) {
      std::complex<double> val = fx.v[j];
      if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
        throw std::runtime_error("integrand produced a non-finite value");
      acc[j].add(phi * val);
    }
  }
  StateVector out;
  out.grid = first.grid;
  out.v.resize(first.size());
  for (int j = 0; j < first.size(); ++j) out.v[j] = acc[j].sum;
  return out;
}

namespace {

// one adaptive level: split [-L, L] into `panels` panels, 16-point rule each
double lp_pass(const std::function<std::complex<double>(double)>& f,
               const std::function<std::complex<double>(double)>& g, double p,
               double half_width, int panels, bool sup_mode) {
  const detail::GaussLegendre& gl = detail::gauss_legendre_cached(16);
  const double w = 2.0 * half_width / panels;
  double sum = 0.0, comp = 0.0, sup = 0.0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    double a = -half_width + pnl * w;
    double mid = a + 0.5 * w, half = 0.5 * w;
    for (int i = 0; i < gl.nodes.size(); ++i) {
      double x = mid + half * gl.nodes[i];
      double d = std::abs(f(x) - g(x));
      if (sup_mode) {
        sup = std::max(sup, d);
      } else {
        double term = half * gl.weights[i] * std::pow(d, p);
        double y = term - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
    }
  }
  return sup_mode ? sup : sum;
}

}  // namespace

LpResult lp_error_on_line_ex(
    const std::function<std::complex<double>(double)>& f,
    const std::function<std::complex<double>(double)>& g, double p,
    double half_width) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must satisfy p >= 1");
  if (!(half_width > 0.0))
    throw std::invalid_argument("half_width must be positive");
  const bool sup_mode = std::isinf(p);
  int panels = std::max(32, static_cast<int>(std::ceil(half_width)));
  double prev = lp_pass(f, g, p, half_width, panels, sup_mode);
  LpResult res;
  for (int level = 0; level < 12; ++level) {
    panels *= 2;
    double cur = lp_pass(f, g, p, half_width, panels, sup_mode);
    double diff = std::abs(cur - prev);
    prev = cur;
    if (diff <= std::max(1e-12 * std::abs(cur), 1e-16)) {
      res.converged = true;
      res.error_estimate = diff;
      break;
    }
    res.error_estimate = diff;
  }
  res.value = sup_mode ? prev : std::pow(prev, 1.0 / p);
  if (!sup_mode && prev > 0.0)
    res.error_estimate = res.value * res.error_estimate / (p * prev);
  return res;
}

double lp_error_on_line(const std::function<std::complex<double>(double)>& f,
                        const std::function<std::complex<double>(double)>& g,
                        double p, double half_width) {
  return lp_error_on_line_ex(f, g, p, half_width).value;
}

}  // namespace hermexp
