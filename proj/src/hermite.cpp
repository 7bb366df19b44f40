#include "hermexp/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>

#include "hermexp/detail/gauss_legendre.hpp"

namespace hermexp {

namespace {

const double kQuarterLogPi = 0.25 * std::log(M_PI);
const double kSeedMantissa = std::exp(-kQuarterLogPi);  // pi^{-1/4}
// plain evaluation is safe while the Gaussian seed stays representable
constexpr double kPlainT2Limit = 1420.0;
constexpr double kRescaleLimit = 1e250;

void check_degree(int n, const char* who) {
  if (n < 0) throw std::invalid_argument(std::string(who) + ": negative degree");
  if (n > kDegreeCap) throw std::invalid_argument(std::string(who) + ": degree above cap 4096");
}

}  // namespace

double log_factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(2 * kDegreeCap + 2);
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = static_cast<double>(std::lgamma(static_cast<long double>(i) + 1.0L));
    return t;
  }();
  if (n < 0 || n >= static_cast<int>(table.size()))
    throw std::invalid_argument("log_factorial: argument out of table range");
  return table[n];
}

double log_norm_factor(int n) {
  return 0.5 * (n * M_LN2 + log_factorial(n)) + kQuarterLogPi;
}

ScaledOrthoSeq ortho_hermite_scaled(double t, int nmax) {
  if (!std::isfinite(t)) throw std::invalid_argument("ortho_hermite_scaled: non-finite t");
  check_degree(nmax, "ortho_hermite_scaled");
  ScaledOrthoSeq s;
  s.t = t;
  s.mantissa.resize(nmax + 1);
  s.logscale.resize(nmax + 1);
  const double t2 = t * t;
  double offset;
  if (t2 <= kPlainT2Limit) {
    s.mantissa[0] = kSeedMantissa * std::exp(-0.5 * t2);
    offset = 0.0;
  } else {
    s.mantissa[0] = kSeedMantissa;
    offset = -0.5 * t2;
  }
  s.logscale[0] = offset;
  if (nmax == 0) return s;

  double vnm1 = 0.0, vn = s.mantissa[0];
  for (int n = 0; n < nmax; ++n) {
    double vnp1 = ortho_step(t, n, vn, vnm1);
    if (std::abs(vnp1) > kRescaleLimit) {
      // only reachable on the log-carried branch; |Hcal_n| itself is <= 0.82
      vnp1 /= kRescaleLimit;
      vn /= kRescaleLimit;
      offset += std::log(kRescaleLimit);
    }
    vnm1 = vn;
    vn = vnp1;
    s.mantissa[n + 1] = vnp1;
    s.logscale[n + 1] = offset;
  }
  return s;
}

OrthoHermiteSequence ortho_hermite_seq(double t, int nmax) {
  ScaledOrthoSeq s = ortho_hermite_scaled(t, nmax);
  OrthoHermiteSequence out;
  out.t = t;
  out.values.resize(nmax + 1);
  for (int n = 0; n <= nmax; ++n)
    out.values[n] = (s.logscale[n] == 0.0) ? s.mantissa[n]
                                           : s.mantissa[n] * std::exp(s.logscale[n]);
  return out;
}

SignedLogValue hermite_poly(int n, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("hermite_poly: non-finite t");
  check_degree(n, "hermite_poly");
  const ScaledOrthoSeq s = ortho_hermite_scaled(t, n);
  const SignedLogValue v = s.log_value(n);
  if (v.is_zero()) return v;
  return {v.sign, v.logmag + 0.5 * t * t + log_norm_factor(n)};
}

std::vector<SignedLogValue> hermite_poly_all(double t, int nmax) {
  if (!std::isfinite(t)) throw std::invalid_argument("hermite_poly_all: non-finite t");
  check_degree(nmax, "hermite_poly_all");
  const ScaledOrthoSeq s = ortho_hermite_scaled(t, nmax);
  const double half_t2 = 0.5 * t * t;
  std::vector<SignedLogValue> out(nmax + 1);
  for (int n = 0; n <= nmax; ++n) {
    const SignedLogValue v = s.log_value(n);
    out[n] = v.is_zero() ? v
                         : SignedLogValue{v.sign, v.logmag + half_t2 + log_norm_factor(n)};
  }
  return out;
}

double h_fn(int n, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("h_fn: non-finite t");
  check_degree(n, "h_fn");
  const ScaledOrthoSeq s = ortho_hermite_scaled(t, n);
  const SignedLogValue v = s.log_value(n);
  if (v.is_zero()) return 0.0;
  return v.sign * std::exp(v.logmag - 0.5 * t * t - log_norm_factor(n));
}

double h_fn_deriv(int n, int k, double t) {
  if (k < 0) throw std::invalid_argument("h_fn_deriv: negative order");
  check_degree(n + k, "h_fn_deriv");
  const ScaledOrthoSeq s = ortho_hermite_scaled(t, n + k);
  const SignedLogValue v = s.log_value(n + k);
  if (v.is_zero()) return 0.0;
  // (-1)^k 2^k (n+1)...(n+k) h_{n+k}(t), prefactor in log domain
  const double log_pre = k * M_LN2 + log_factorial(n + k) - log_factorial(n);
  const int sign = (k % 2 == 0) ? v.sign : -v.sign;
  const double logmag = v.logmag - 0.5 * t * t - log_norm_factor(n + k) + log_pre;
  return SignedLogValue::from_log(sign, logmag).to_real();
}

Eigen::VectorXd hermite_zeros(int n) {
  if (n < 1) throw std::invalid_argument("hermite_zeros: degree >= 1 required");
  check_degree(n, "hermite_zeros");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermite_zeros: eigenvalue iteration failed");
  Eigen::VectorXd r = es.eigenvalues();  // ascending

  // one Newton step: h_n' = -2(n+1) h_{n+1}, so
  // r <- r + Hcal_n(r) / (sqrt(2(n+1)) Hcal_{n+1}(r))
  const double root_scale = std::sqrt(2.0 * (n + 1));
  for (int i = 0; i < n; ++i) {
    const ScaledOrthoSeq s = ortho_hermite_scaled(r[i], n + 1);
    const SignedLogValue num = s.log_value(n);
    const SignedLogValue den = s.log_value(n + 1);
    if (num.is_zero() || den.is_zero()) continue;
    const double step = num.sign * den.sign * std::exp(num.logmag - den.logmag) / root_scale;
    r[i] += step;
  }

  // enforce exact antisymmetry (roots of H_n are symmetric about 0)
  for (int i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (r[i] - r[n - 1 - i]);
    r[i] = v;
    r[n - 1 - i] = -v;
  }
  if (n % 2 == 1) r[n / 2] = 0.0;
  return r;
}

namespace {

// integral of |h_n|^p over [a,b] with a fixed Gauss-Legendre rule
double panel_integral(int n, double p, double a, double b,
                      const detail::GaussLegendre& gl) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i < gl.nodes.size(); ++i) {
    const double x = mid + half * gl.nodes[i];
    const double f = std::pow(std::abs(h_fn(n, x)), p) * gl.weights[i] * half;
    const double y = f - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

NormResult h_norm_ex(int n, double p) {
  check_degree(n, "h_norm");
  if (std::isinf(p)) {
    // extrema of h_n sit at 0 and at the zeros of H_{n+1}
    double best = std::abs(h_fn(n, 0.0));
    const Eigen::VectorXd r = hermite_zeros(n + 1);
    for (int i = 0; i < r.size(); ++i) best = std::max(best, std::abs(h_fn(n, r[i])));
    return {best, 0.0, true};
  }
  if (!(p >= 1.0)) throw std::invalid_argument("h_norm: p must be >= 1 or infinity");

  std::vector<double> brk;
  double zmax = 0.0;
  if (n >= 1) {
    const Eigen::VectorXd z = hermite_zeros(n);
    zmax = z[n - 1];
    brk.assign(z.data(), z.data() + z.size());
  }
  brk.insert(brk.begin(), -(zmax + 12.0));
  brk.push_back(zmax + 12.0);

  const detail::GaussLegendre& gl = detail::gauss_legendre_cached(32);
  const double rel_target = 1e-9;
  double prev = -1.0, cur = 0.0, delta = 0.0;
  int splits = 1;
  for (int level = 0; level <= 6; ++level, splits *= 2) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t j = 0; j + 1 < brk.size(); ++j) {
      const double a = brk[j], b = brk[j + 1], w = (b - a) / splits;
      for (int s = 0; s < splits; ++s) {
        const double f = panel_integral(n, p, a + s * w, a + (s + 1) * w, gl);
        const double y = f - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
    }
    cur = sum;
    if (prev >= 0.0) {
      delta = std::abs(cur - prev);
      if (delta <= rel_target * std::abs(cur) || cur == 0.0)
        return {std::pow(cur, 1.0 / p), (cur > 0.0) ? delta / cur : 0.0, true};
    }
    prev = cur;
  }
  return {std::pow(cur, 1.0 / p), (cur > 0.0) ? delta / cur : 0.0, false};
}

double h_norm(int n, double p) { return h_norm_ex(n, p).value; }

namespace {

struct BranchRatios {
  double osc = 0.0;        // |Hcal_n| (N^{1/3} + |N-t^2|)^{1/4}
  double tail_log = kNegInf;  // log|Hcal_n| + gamma t^2
  double consequent = 0.0;    // |Hcal_n| n^{1/12}
};

BranchRatios scan_ratios(int n, double gamma) {
  BranchRatios r;
  const double nn = 2.0 * n + 1.0;
  const double edge = std::sqrt(2.0 * nn);
  const int osc_pts = 1200, tail_pts = 800;
  for (int i = 0; i <= osc_pts; ++i) {
    const double t = edge * i / osc_pts;
    const ScaledOrthoSeq s = ortho_hermite_scaled(t, n);
    const double a = std::abs(s.mantissa[n]) *
                     ((s.logscale[n] == 0.0) ? 1.0 : std::exp(s.logscale[n]));
    r.osc = std::max(r.osc, a * std::pow(std::cbrt(nn) + std::abs(nn - t * t), 0.25));
    r.consequent = std::max(r.consequent, a * std::pow(n, 1.0 / 12.0));
  }
  for (int i = 1; i <= tail_pts; ++i) {
    const double t = edge + 12.0 * i / tail_pts;
    const ScaledOrthoSeq s = ortho_hermite_scaled(t, n);
    const SignedLogValue v = s.log_value(n);
    if (!v.is_zero()) r.tail_log = std::max(r.tail_log, v.logmag + gamma * t * t);
  }
  return r;
}

}  // namespace

MuckenhouptFit muckenhoupt_calibrate(int n_lo, int n_hi) {
  if (n_lo < 1 || n_lo >= n_hi) throw std::invalid_argument("muckenhoupt_calibrate: need 1 <= n_lo < n_hi");
  if (4 * n_hi > kDegreeCap) throw std::invalid_argument("muckenhoupt_calibrate: verification range above degree cap");
  MuckenhouptFit fit;
  fit.gamma = 0.125;
  double c = 0.0;
  for (int n = n_lo; n <= n_hi; ++n) {
    const BranchRatios r = scan_ratios(n, fit.gamma);
    // the consequent |H_n| bound with constant C pi^{1/4} reduces to
    // |Hcal_n| n^{1/12} <= C once the H_n normalization is divided out
    c = std::max({c, r.osc, std::exp(r.tail_log), r.consequent});
  }
  if (!std::isfinite(c) || c <= 0.0)
    throw std::runtime_error("muckenhoupt_calibrate: no finite bounding constant");
  fit.c = c;

  const double limit = c * (1.0 + 1e-9);
  bool ok = true;
  for (int n = n_hi + 1; n <= 4 * n_hi && ok; ++n) {
    const BranchRatios r = scan_ratios(n, fit.gamma);
    if (r.osc > limit || std::exp(r.tail_log) > limit || r.consequent > limit) ok = false;
  }
  fit.holds = ok;
  return fit;
}

}  // namespace hermexp
