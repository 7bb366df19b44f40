#include "hermexp/expansion_engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hermexp/hermite.hpp"

namespace hermexp {

namespace {

struct ComplexKahan {
  std::complex<double> sum{0.0, 0.0}, comp{0.0, 0.0};
  void add(const std::complex<double>& term) {
    std::complex<double> y = term - comp;
    std::complex<double> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

int hermite_degree(ExpansionKind kind, int n) {
  switch (kind) {
    case ExpansionKind::group:
      return n;
    case ExpansionKind::cosine:
      return 2 * n;
    default:
      return 2 * n + 1;
  }
}

std::complex<double> linearize(double logmag, double phase, const char* who) {
  if (logmag > kLogMax)
    throw std::overflow_error(std::string(who) + ": term exceeds double range");
  const double m = std::exp(logmag);
  return {m * std::cos(phase), m * std::sin(phase)};
}

}  // namespace

CoefficientTable build_coeff_table(const OperatorModel& model, ExpansionKind kind,
                                   int max_n, const StateVector& x) {
  if (max_n < 0) throw std::invalid_argument("build_coeff_table: negative degree");
  CoefficientTable table;
  table.kind = kind;
  if (const auto* s = std::get_if<ShiftGroup>(&model)) {
    if (kind != ExpansionKind::group)
      throw std::invalid_argument("build_coeff_table: shift model is expanded as a group");
    table.entries = shift_coeff_table(*s, x, max_n);
    return table;
  }
  table.entries.reserve(max_n + 1);
  for (int n = 0; n <= max_n; ++n)
    table.entries.push_back(coeff_analytic(model, kind, n, x));
  return table;
}

StateVector partial_from_table(const CoefficientTable& table, double t, int m) {
  if (m < 0) throw std::invalid_argument("partial_from_table: negative degree");
  if (m >= static_cast<int>(table.entries.size()))
    throw std::invalid_argument("partial_from_table: table too short");
  const LogStateVector& first = table.entries.front();
  const int dim = first.size();
  const std::vector<SignedLogValue> lh =
      hermite_poly_all(t, hermite_degree(table.kind, m));
  std::vector<ComplexKahan> acc(dim);
  for (int n = 0; n <= m; ++n) {
    const SignedLogValue& h = lh[hermite_degree(table.kind, n)];
    if (h.sign == 0) continue;
    const LogStateVector& e = table.entries[n];
    const double hphase = (h.sign < 0) ? M_PI : 0.0;
    for (int j = 0; j < dim; ++j) {
      if (std::isinf(e.logmag[j]) && e.logmag[j] < 0) continue;
      acc[j].add(linearize(e.logmag[j] + h.logmag, e.phase[j] + hphase,
                           "partial_from_table"));
    }
  }
  StateVector out;
  out.grid = first.grid;
  out.v.resize(dim);
  for (int j = 0; j < dim; ++j) out.v[j] = acc[j].sum;
  return out;
}

StateVector group_partial(const OperatorModel& model, const StateVector& x,
                          double t, int m) {
  return partial_from_table(build_coeff_table(model, ExpansionKind::group, m, x), t, m);
}

StateVector cosine_partial(const OperatorModel& model, const StateVector& x,
                           double t, int m) {
  return partial_from_table(build_coeff_table(model, ExpansionKind::cosine, m, x), t, m);
}

StateVector sine_partial(const OperatorModel& model, const StateVector& x,
                         double t, int m) {
  return partial_from_table(build_coeff_table(model, ExpansionKind::sine, m, x), t, m);
}

StateVector holo_series(const OperatorModel& model, const StateVector& x,
                        std::complex<double> z, int m, ExpansionKind kind) {
  if (m < 0) throw std::invalid_argument("holo_series: negative degree");
  if (kind == ExpansionKind::sine)
    throw std::invalid_argument("holo_series: group or cosine kind required");
  if (!(std::abs(z - std::complex<double>(0.25, 0.0)) < 0.25))
    throw std::invalid_argument("holo_series: z must lie in |z - 1/4| < 1/4");
  const bool group = (kind == ExpansionKind::group);
  const CoefficientTable table =
      build_coeff_table(model, kind, group ? 2 * m : m, x);
  const std::complex<double> w = 4.0 * z - 1.0;
  const double aw = std::abs(w);
  const double lw = aw > 0.0 ? std::log(aw) : -std::numeric_limits<double>::infinity();
  const double pw = std::arg(w);
  const int dim = table.entries.front().size();
  std::vector<ComplexKahan> acc(dim);
  for (int n = 0; n <= m; ++n) {
    if (n > 0 && aw == 0.0) break;  // z = 1/4: the zero-degree term is exact
    // (1/(2^{2n} n!)) A^{..} T(1/4) x = entry * (2n)!/n!, then times (4z-1)^n
    const LogStateVector& e = table.entries[group ? 2 * n : n];
    const double lpre = log_factorial(2 * n) - log_factorial(n) +
                        (n > 0 ? n * lw : 0.0);
    const double ppre = n * pw;
    for (int j = 0; j < dim; ++j) {
      if (std::isinf(e.logmag[j]) && e.logmag[j] < 0) continue;
      acc[j].add(linearize(e.logmag[j] + lpre, e.phase[j] + ppre, "holo_series"));
    }
  }
  StateVector out;
  out.grid = table.entries.front().grid;
  out.v.resize(dim);
  for (int j = 0; j < dim; ++j) out.v[j] = acc[j].sum;
  return out;
}

namespace {

// closed-form frequency response of the Fejer family:
//   constant term  g(mu) = e^{-mu^2}/sqrt(pi) - |mu| erfc(|mu|)
//   series term    K_n(mu) = 2 H_{2n-2}(mu) e^{-mu^2} / (2^{2n} (2n)! sqrt(pi))
// obtained from the Gaussian moment integrals of the coefficient kernels
double fejer_constant_term(double mu) {
  const double a = std::abs(mu);
  return std::exp(-mu * mu) / std::sqrt(M_PI) - a * std::erfc(a);
}

struct FejerDiagonal {
  Eigen::VectorXd mu;
  const MatrixGroup* basis = nullptr;  // transform back through u when set
};

FejerDiagonal fejer_frequencies(const OperatorModel& model, ExpansionKind kind) {
  if (kind == ExpansionKind::sine)
    throw std::invalid_argument("fejer_expansion: group or cosine kind required");
  if (const auto* g = std::get_if<DiagonalGroup>(&model)) {
    if (kind != ExpansionKind::group)
      throw std::invalid_argument("fejer_expansion: group model needs the group kind");
    return {g->q, nullptr};
  }
  if (const auto* c = std::get_if<DiagonalCosine>(&model)) {
    if (kind != ExpansionKind::cosine)
      throw std::invalid_argument("fejer_expansion: cosine model needs the cosine kind");
    return {c->omega, nullptr};
  }
  if (const auto* m = std::get_if<MatrixGroup>(&model)) {
    if (kind != ExpansionKind::group)
      throw std::invalid_argument("fejer_expansion: matrix model needs the group kind");
    return {m->theta, m};
  }
  throw std::invalid_argument("fejer_expansion: diagonal or matrix model required");
}

// per-frequency series values K_n(mu) H_{2n}(t), n = 1..terms
void fejer_series_terms(double mu, int terms,
                        const std::vector<SignedLogValue>& lht,
                        std::vector<double>& out) {
  const std::vector<SignedLogValue> lhmu =
      hermite_poly_all(mu, std::max(2 * terms - 2, 0));
  const double base = M_LN2 - mu * mu - 0.5 * std::log(M_PI);
  for (int n = 1; n <= terms; ++n) {
    const SignedLogValue& hm = lhmu[2 * n - 2];
    const SignedLogValue& ht = lht[2 * n];
    if (hm.sign == 0 || ht.sign == 0) {
      out[n - 1] = 0.0;
      continue;
    }
    const double logmag = base + hm.logmag - 2.0 * n * M_LN2 -
                          log_factorial(2 * n) + ht.logmag;
    out[n - 1] = hm.sign * ht.sign * std::exp(logmag);
  }
}

}  // namespace

StateVector fejer_expansion(const OperatorModel& model, const StateVector& x,
                            double t, int terms, ExpansionKind kind) {
  if (terms < 1) throw std::invalid_argument("fejer_expansion: at least one term");
  const FejerDiagonal d = fejer_frequencies(model, kind);
  const Eigen::VectorXcd y = d.basis ? (d.basis->u.adjoint() * x.v).eval() : x.v;
  const std::vector<SignedLogValue> lht = hermite_poly_all(t, 2 * terms);
  std::vector<double> series(terms);
  Eigen::VectorXcd out(y.size());
  for (int k = 0; k < y.size(); ++k) {
    fejer_series_terms(d.mu[k], terms, lht, series);
    double sum = fejer_constant_term(d.mu[k]), comp = 0.0;
    for (int n = 0; n < terms; ++n) {
      const double yv = series[n] - comp;
      const double s = sum + yv;
      comp = (s - sum) - yv;
      sum = s;
    }
    out[k] = sum * y[k];
  }
  if (d.basis) out = d.basis->u * out;
  return StateVector::coords(std::move(out));
}

Eigen::VectorXd fejer_expansion_term_norms(const OperatorModel& model,
                                           const StateVector& x, double t,
                                           int terms, ExpansionKind kind) {
  if (terms < 1) throw std::invalid_argument("fejer_expansion_term_norms: at least one term");
  const FejerDiagonal d = fejer_frequencies(model, kind);
  const Eigen::VectorXcd y = d.basis ? (d.basis->u.adjoint() * x.v).eval() : x.v;
  const std::vector<SignedLogValue> lht = hermite_poly_all(t, 2 * terms);
  std::vector<double> series(terms);
  Eigen::VectorXd norms = Eigen::VectorXd::Zero(terms);
  for (int k = 0; k < y.size(); ++k) {
    fejer_series_terms(d.mu[k], terms, lht, series);
    for (int n = 0; n < terms; ++n)
      norms[n] += series[n] * series[n] * std::norm(y[k]);
  }
  // the basis transform is unitary, so eigencoordinate norms are the norms
  return norms.cwiseSqrt();
}

StateVector laguerre_partial(const OperatorModel& model, const StateVector& x,
                             double t, int m, double alpha) {
  if (!(t > 0.0)) throw std::invalid_argument("laguerre_partial: t must be positive");
  if (!(alpha > -1.0)) throw std::invalid_argument("laguerre_partial: alpha must exceed -1");
  if (m < 0) throw std::invalid_argument("laguerre_partial: negative degree");
  std::vector<ComplexKahan> acc(x.size());
  double lnm1 = 0.0, ln = 0.0;
  for (int n = 0; n <= m; ++n) {
    double lag;  // L_n^(alpha)(t) by the standard three-term recurrence
    if (n == 0) {
      lag = 1.0;
    } else if (n == 1) {
      lag = 1.0 + alpha - t;
    } else {
      lag = ((2.0 * (n - 1) + 1.0 + alpha - t) * ln - (n - 1 + alpha) * lnm1) / n;
    }
    lnm1 = ln;
    ln = lag;
    const StateVector rp = resolvent_power(model, n, alpha, x);
    for (int j = 0; j < x.size(); ++j) acc[j].add(lag * rp.v[j]);
  }
  StateVector out;
  out.grid = x.grid;
  out.v.resize(x.size());
  for (int j = 0; j < x.size(); ++j) out.v[j] = acc[j].sum;
  return out;
}

ErrorCurve error_curve(const OperatorModel& model, const StateVector& x, double t,
                       const std::vector<int>& degrees, ExpansionKind kind,
                       double norm_p) {
  if (degrees.empty()) throw std::invalid_argument("error_curve: empty degree list");
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 0 || (i > 0 && degrees[i] <= degrees[i - 1]))
      throw std::invalid_argument("error_curve: degrees must increase");
  }
  StateVector exact = [&] {
    switch (kind) {
      case ExpansionKind::group:
        return evolve_group(model, t, x);
      case ExpansionKind::cosine:
        return evolve_cosine(model, t, x);
      default:
        return evolve_sine(model, t, x);
    }
  }();

  const int max_n = degrees.back();
  const CoefficientTable table = build_coeff_table(model, kind, max_n, x);
  const std::vector<SignedLogValue> lh =
      hermite_poly_all(t, hermite_degree(kind, max_n));
  const int dim = x.size();
  std::vector<ComplexKahan> acc(dim);

  ErrorCurve curve;
  curve.degrees = degrees;
  curve.errors.resize(degrees.size());
  curve.t = t;
  curve.norm_p = norm_p;
  curve.kind = kind;

  std::size_t next = 0;
  for (int n = 0; n <= max_n && next < degrees.size(); ++n) {
    const SignedLogValue& h = lh[hermite_degree(kind, n)];
    if (h.sign != 0) {
      const LogStateVector& e = table.entries[n];
      const double hphase = (h.sign < 0) ? M_PI : 0.0;
      for (int j = 0; j < dim; ++j) {
        if (std::isinf(e.logmag[j]) && e.logmag[j] < 0) continue;
        acc[j].add(linearize(e.logmag[j] + h.logmag, e.phase[j] + hphase,
                             "error_curve"));
      }
    }
    if (n == degrees[next]) {
      StateVector partial;
      partial.grid = x.grid;
      partial.v.resize(dim);
      for (int j = 0; j < dim; ++j) partial.v[j] = acc[j].sum;
      curve.errors[next] = state_norm(model, exact - partial, norm_p);
      ++next;
    }
  }
  return curve;
}

RateFit rate_fit(const ErrorCurve& curve, int drop) {
  if (drop < 0) throw std::invalid_argument("rate_fit: negative drop");
  if (static_cast<int>(curve.degrees.size()) < drop + 4)
    throw std::invalid_argument("rate_fit: need at least drop + 4 points");
  std::vector<double> lx, ly;
  std::vector<int> used;
  for (std::size_t i = drop; i < curve.degrees.size(); ++i) {
    if (!(curve.errors[i] > 0.0)) break;  // zero error terminates the window
    lx.push_back(std::log(static_cast<double>(curve.degrees[i])));
    ly.push_back(std::log(curve.errors[i]));
    used.push_back(curve.degrees[i]);
  }
  if (used.size() < 2)
    throw std::runtime_error("rate_fit: fewer than two positive errors in the window");
  const std::size_t n = lx.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  RateFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += d * d;
  }
  fit.residual = std::sqrt(ss / n);
  fit.window = {used.front(), used.back()};
  return fit;
}

BoundCheck coeff_bound_check(const OperatorModel& model, const StateVector& x,
                             ExpansionKind kind, int p, int n_lo, int n_fit_hi,
                             int n_hi) {
  if (p < 0) throw std::invalid_argument("coeff_bound_check: negative regularity");
  if (n_lo < p || n_lo > n_fit_hi || n_fit_hi >= n_hi)
    throw std::invalid_argument("coeff_bound_check: need p <= n_lo <= n_fit_hi < n_hi");
  const double apnorm =
      generator_power_norm(model, x, kind == ExpansionKind::sine ? p + 1 : p);
  if (!(apnorm > 0.0))
    throw std::invalid_argument("coeff_bound_check: ||A^p x|| vanishes");
  const double log_ap = std::log(apnorm);

  auto shape_log = [&](int n) {
    switch (kind) {
      case ExpansionKind::group:
        return 0.5 * log_factorial(n - p) - 0.5 * (n + p) * M_LN2 - log_factorial(n);
      case ExpansionKind::cosine:
        return 0.5 * log_factorial(2 * (n - p)) - (n + p) * M_LN2 -
               log_factorial(2 * n);
      default:
        return 0.5 * log_factorial(2 * (n - p)) - (n + p + 1) * M_LN2 -
               log_factorial(2 * n + 1);
    }
  };

  double log_c = -std::numeric_limits<double>::infinity();
  for (int n = n_lo; n <= n_fit_hi; ++n) {
    const double lr = coeff_analytic(model, kind, n, x).log_norm2() -
                      shape_log(n) - log_ap;
    log_c = std::max(log_c, lr);
  }
  BoundCheck result;
  if (std::isinf(log_c) && log_c < 0)
    throw std::runtime_error("coeff_bound_check: all fitted coefficients vanish");
  result.c = std::exp(log_c);
  const double limit = log_c + std::log1p(1e-9);
  result.holds = true;
  for (int n = n_fit_hi + 1; n <= n_hi; ++n) {
    const double lr = coeff_analytic(model, kind, n, x).log_norm2() -
                      shape_log(n) - log_ap;
    if (lr > limit) {
      result.holds = false;
      break;
    }
  }
  return result;
}

StateVector power_state(int dim, double s) {
  if (dim < 1) throw std::invalid_argument("power_state: positive dimension required");
  Eigen::VectorXcd v(dim);
  for (int k = 1; k <= dim; ++k) v[k - 1] = std::pow(static_cast<double>(k), -s);
  return StateVector::coords(std::move(v));
}

StateVector geometric_state(int dim, double r) {
  if (dim < 1) throw std::invalid_argument("geometric_state: positive dimension required");
  Eigen::VectorXcd v(dim);
  double cur = 1.0;
  for (int k = 1; k <= dim; ++k) {
    cur *= r;
    v[k - 1] = cur;
  }
  return StateVector::coords(std::move(v));
}

}  // namespace hermexp
