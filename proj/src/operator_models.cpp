#include "hermexp/operator_models.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hermexp/detail/gauss_legendre.hpp"
#include "hermexp/hermite.hpp"

namespace hermexp {

namespace {

// coefficient factors e^{-omega^2/4} below this are flushed to exact zero in
// the signed-log tables (documented underflow floor); evolution still uses
// every component
constexpr double kCosineFlushLimit = 700.0;

struct ComplexKahan {
  std::complex<double> sum{0.0, 0.0}, comp{0.0, 0.0};
  void add(const std::complex<double>& term) {
    std::complex<double> y = term - comp;
    std::complex<double> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

void check_state(const OperatorModel& model, const StateVector& x) {
  if (x.size() != state_dim(model))
    throw std::invalid_argument("state dimension does not match the model");
  if (const auto* s = std::get_if<ShiftGroup>(&model)) {
    if (!(x.grid == s->grid))
      throw std::invalid_argument("state grid does not match the shift model");
  } else if (x.on_grid()) {
    throw std::invalid_argument("grid state passed to a coordinate model");
  }
}

Eigen::VectorXd shift_wavenumbers(const GridSpec& g) {
  Eigen::VectorXd xi(g.points);
  const double base = M_PI / g.half_width;
  for (int j = 0; j < g.points; ++j) {
    const int jj = (j < g.points / 2) ? j : j - g.points;
    xi[j] = base * jj;
  }
  return xi;
}

StateVector shift_apply_multiplier(const ShiftGroup& model, const StateVector& x,
                                   const Eigen::VectorXcd& mult) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd freq;
  fft.fwd(freq, x.v);
  freq = freq.cwiseProduct(mult);
  Eigen::VectorXcd out;
  fft.inv(out, freq);
  return StateVector::on(model.grid, std::move(out));
}

// signed-log value of r^{power} e^{-r^2/4} x / denom with the whole factor in
// log domain; power == 0 uses r^0 = 1 so r = 0 stays well defined
LogComplex diag_coeff_value(double r, int power, double log_denom,
                            std::complex<double> xk) {
  if (xk == std::complex<double>(0.0, 0.0) || (r == 0.0 && power > 0))
    return LogComplex::zero();
  const double logpow = (power == 0) ? 0.0 : power * std::log(std::abs(r));
  LogComplex lx = LogComplex::from_complex(xk);
  return {logpow - 0.25 * r * r - log_denom + lx.logmag, lx.phase};
}

LogComplex cosine_entry(double omega, int n, std::complex<double> xk) {
  if (0.25 * omega * omega > kCosineFlushLimit) return LogComplex::zero();
  LogComplex v = diag_coeff_value(omega, 2 * n,
                                  2.0 * n * M_LN2 + log_factorial(2 * n), xk);
  if (n % 2 == 1 && !v.is_zero()) v.phase += M_PI;  // (-1)^n
  return v;
}

LogComplex sine_entry(double omega, int n, std::complex<double> xk) {
  if (0.25 * omega * omega > kCosineFlushLimit) return LogComplex::zero();
  LogComplex v = diag_coeff_value(
      omega, 2 * n, (2.0 * n + 1.0) * M_LN2 + log_factorial(2 * n + 1), xk);
  if (n % 2 == 1 && !v.is_zero()) v.phase += M_PI;
  return v;
}

LogComplex group_entry(double q, int n, std::complex<double> xk) {
  LogComplex v = diag_coeff_value(q, n, n * M_LN2 + log_factorial(n), xk);
  if (v.is_zero()) return v;
  v.phase += n * ((q >= 0.0) ? M_PI_2 : -M_PI_2);  // (i q)^n carries i^n
  return v;
}

LogStateVector log_zero_like(const StateVector& x) {
  LogStateVector out;
  out.grid = x.grid;
  out.logmag = Eigen::VectorXd::Constant(x.size(), kNegInf);
  out.phase = Eigen::VectorXd::Zero(x.size());
  return out;
}

void set_entry(LogStateVector& v, int j, const LogComplex& lc) {
  v.logmag[j] = lc.logmag;
  v.phase[j] = lc.phase;
}

}  // namespace

MatrixGroup make_matrix_group(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("make_matrix_group: square nonempty matrix required");
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a + a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("make_matrix_group: matrix is not skew-Hermitian");
  // A = i H with H Hermitian; diagonalize H
  Eigen::MatrixXcd h = std::complex<double>(0.0, -1.0) * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("make_matrix_group: eigendecomposition failed");
  MatrixGroup m;
  m.a = a;
  m.theta = es.eigenvalues();
  m.u = es.eigenvectors();
  return m;
}

DiagonalCosine make_diagonal_cosine(Eigen::VectorXd omega) {
  for (Eigen::Index k = 0; k < omega.size(); ++k)
    if (!(omega[k] > 0.0))
      throw std::invalid_argument("make_diagonal_cosine: frequencies must be positive");
  return DiagonalCosine{std::move(omega)};
}

ShiftGroup make_shift_group(double half_width, int points) {
  if (!(half_width > 0.0))
    throw std::invalid_argument("make_shift_group: half_width must be positive");
  if (points < 2 || (points & (points - 1)) != 0)
    throw std::invalid_argument("make_shift_group: points must be a power of two");
  return ShiftGroup{GridSpec{half_width, points}};
}

int state_dim(const OperatorModel& model) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiagonalGroup>)
          return static_cast<int>(m.q.size());
        else if constexpr (std::is_same_v<T, DiagonalCosine>)
          return static_cast<int>(m.omega.size());
        else if constexpr (std::is_same_v<T, ShiftGroup>)
          return m.grid.points;
        else if constexpr (std::is_same_v<T, MatrixGroup>)
          return static_cast<int>(m.a.rows());
        else
          return 2 * static_cast<int>(m.inner.omega.size());
      },
      model);
}

StateVector evolve_group(const OperatorModel& model, double t, const StateVector& x) {
  check_state(model, x);
  if (const auto* g = std::get_if<DiagonalGroup>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k)
      out[k] = std::polar(1.0, g->q[k] * t) * x.v[k];
    return StateVector::coords(std::move(out));
  }
  if (const auto* s = std::get_if<ShiftGroup>(&model)) {
    const Eigen::VectorXd xi = shift_wavenumbers(s->grid);
    Eigen::VectorXcd mult(xi.size());
    for (int j = 0; j < xi.size(); ++j) mult[j] = std::polar(1.0, -xi[j] * t);
    return shift_apply_multiplier(*s, x, mult);
  }
  if (const auto* m = std::get_if<MatrixGroup>(&model)) {
    Eigen::VectorXcd y = m->u.adjoint() * x.v;
    for (int k = 0; k < y.size(); ++k) y[k] *= std::polar(1.0, m->theta[k] * t);
    return StateVector::coords(m->u * y);
  }
  if (const auto* b = std::get_if<BlockCosineLift>(&model)) {
    const Eigen::VectorXd& w = b->inner.omega;
    const int k = static_cast<int>(w.size());
    Eigen::VectorXcd out(2 * k);
    for (int j = 0; j < k; ++j) {
      const double c = std::cos(w[j] * t);
      const double snc = std::sin(w[j] * t) / w[j];  // S(t) diagonal
      out[j] = c * x.v[j] + snc * x.v[k + j];
      out[k + j] = -w[j] * std::sin(w[j] * t) * x.v[j] + c * x.v[k + j];
    }
    return StateVector::coords(std::move(out));
  }
  throw std::invalid_argument("evolve_group: model has no group evolution");
}

StateVector evolve_cosine(const OperatorModel& model, double t, const StateVector& x) {
  check_state(model, x);
  if (const auto* c = std::get_if<DiagonalCosine>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k) out[k] = std::cos(c->omega[k] * t) * x.v[k];
    return StateVector::coords(std::move(out));
  }
  // derived cosine of a group model: C(t) = (T(t) + T(-t)) / 2
  StateVector fwd = evolve_group(model, t, x);
  StateVector bwd = evolve_group(model, -t, x);
  return 0.5 * (fwd + bwd);
}

StateVector evolve_sine(const OperatorModel& model, double t, const StateVector& x) {
  check_state(model, x);
  if (const auto* c = std::get_if<DiagonalCosine>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k)
      out[k] = (std::sin(c->omega[k] * t) / c->omega[k]) * x.v[k];
    return StateVector::coords(std::move(out));
  }
  if (const auto* g = std::get_if<DiagonalGroup>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k) {
      const double q = g->q[k];
      out[k] = (q == 0.0 ? t : std::sin(q * t) / q) * x.v[k];
    }
    return StateVector::coords(std::move(out));
  }
  if (const auto* m = std::get_if<MatrixGroup>(&model)) {
    Eigen::VectorXcd y = m->u.adjoint() * x.v;
    for (int k = 0; k < y.size(); ++k) {
      const double th = m->theta[k];
      y[k] *= (th == 0.0 ? t : std::sin(th * t) / th);
    }
    return StateVector::coords(m->u * y);
  }
  throw std::invalid_argument("evolve_sine: model has no sine family");
}

namespace {

LogStateVector coeff_analytic_shift(const ShiftGroup& model, ExpansionKind kind,
                                    int n, const StateVector& x);

}  // namespace

LogStateVector coeff_analytic(const OperatorModel& model, ExpansionKind kind,
                              int n, const StateVector& x) {
  check_state(model, x);
  if (n < 0) throw std::invalid_argument("coeff_analytic: negative degree");

  if (const auto* g = std::get_if<DiagonalGroup>(&model)) {
    LogStateVector out = log_zero_like(x);
    for (int k = 0; k < x.size(); ++k) {
      const double q = g->q[k];
      switch (kind) {
        case ExpansionKind::group:
          set_entry(out, k, group_entry(q, n, x.v[k]));
          break;
        case ExpansionKind::cosine:
          // the cosine induced by the group: even group entry at degree 2n
          set_entry(out, k, group_entry(q, 2 * n, x.v[k]));
          break;
        case ExpansionKind::sine: {
          // sine of the induced cosine, frequency |q|
          LogComplex v = diag_coeff_value(
              q, 2 * n, (2.0 * n + 1.0) * M_LN2 + log_factorial(2 * n + 1), x.v[k]);
          if (n % 2 == 1 && !v.is_zero()) v.phase += M_PI;
          set_entry(out, k, v);
          break;
        }
      }
    }
    return out;
  }

  if (const auto* c = std::get_if<DiagonalCosine>(&model)) {
    if (kind == ExpansionKind::group)
      throw std::invalid_argument("coeff_analytic: cosine model has no group table");
    LogStateVector out = log_zero_like(x);
    for (int k = 0; k < x.size(); ++k)
      set_entry(out, k,
                kind == ExpansionKind::cosine ? cosine_entry(c->omega[k], n, x.v[k])
                                              : sine_entry(c->omega[k], n, x.v[k]));
    return out;
  }

  if (const auto* m = std::get_if<MatrixGroup>(&model)) {
    const int deg = (kind == ExpansionKind::group) ? n : 2 * n;
    Eigen::VectorXcd y = m->u.adjoint() * x.v;
    Eigen::VectorXcd w(y.size());
    for (int k = 0; k < y.size(); ++k) {
      LogComplex v;
      if (kind == ExpansionKind::sine) {
        v = diag_coeff_value(m->theta[k], 2 * n,
                             (2.0 * n + 1.0) * M_LN2 + log_factorial(2 * n + 1),
                             y[k]);
        if (n % 2 == 1 && !v.is_zero()) v.phase += M_PI;
      } else {
        v = group_entry(m->theta[k], deg, y[k]);
      }
      // eigencoordinate magnitudes are bounded by |y_k|, safe to linearize
      w[k] = v.to_complex();
    }
    return LogStateVector::from_state(StateVector::coords(m->u * w));
  }

  if (const auto* s = std::get_if<ShiftGroup>(&model))
    return coeff_analytic_shift(*s, kind, n, x);

  const auto& b = std::get<BlockCosineLift>(model);
  if (kind != ExpansionKind::group)
    throw std::invalid_argument("coeff_analytic: the lift is expanded as a group");
  const Eigen::VectorXd& w = b.inner.omega;
  const int k = static_cast<int>(w.size());
  LogStateVector out = log_zero_like(x);
  if (n % 2 == 0) {
    // B^{2m} = diag(A^m, A^m): equal diagonal blocks of cosine entries
    const int m2 = n / 2;
    for (int j = 0; j < k; ++j) {
      set_entry(out, j, cosine_entry(w[j], m2, x.v[j]));
      // reuse the slot helper for the lower half
      LogComplex lo = cosine_entry(w[j], m2, x.v[k + j]);
      out.logmag[k + j] = lo.logmag;
      out.phase[k + j] = lo.phase;
    }
  } else {
    // B^{2m+1} swaps the halves: (A^m T_c(1/4) y, A^{m+1} T_c(1/4) x)
    const int m2 = (n - 1) / 2;
    for (int j = 0; j < k; ++j) {
      set_entry(out, j, sine_entry(w[j], m2, x.v[k + j]));
      LogComplex lo = sine_entry(w[j], m2, x.v[j]);
      if (!lo.is_zero()) {
        lo.logmag += 2.0 * std::log(w[j]);  // extra factor -omega^2
        lo.phase += M_PI;
      }
      out.logmag[k + j] = lo.logmag;
      out.phase[k + j] = lo.phase;
    }
  }
  return out;
}

namespace {

LogStateVector coeff_analytic_shift(const ShiftGroup& model, ExpansionKind kind,
                                    int n, const StateVector& x) {
  if (kind != ExpansionKind::group)
    throw std::invalid_argument("coeff_analytic: shift model is expanded as a group");
  std::vector<LogStateVector> table = shift_coeff_table(model, x, n);
  return std::move(table.back());
}

}  // namespace

std::vector<LogStateVector> shift_coeff_table(const ShiftGroup& model,
                                              const StateVector& x, int max_n) {
  if (!(x.grid == model.grid))
    throw std::invalid_argument("shift_coeff_table: state grid mismatch");
  if (max_n < 0) throw std::invalid_argument("shift_coeff_table: negative degree");
  const GridSpec& g = model.grid;
  const int np = g.points;
  const double dx = g.dx();

  Eigen::FFT<double> fft;
  Eigen::VectorXcd xf;
  fft.fwd(xf, x.v);

  // advance the scaled-kernel recurrence on every node at once; the kernel
  // sample on the displacement-ordered grid is Hcal_n e^{-s^2/2}, and the
  // 1/sqrt(2^n n! sqrt(pi)) normalization rides along as a log offset
  Eigen::VectorXd nodes(np), gauss(np);
  for (int i = 0; i < np; ++i) {
    const double s = (i < np / 2) ? i * dx : (i - np) * dx;
    nodes[i] = s;
    gauss[i] = std::exp(-0.5 * s * s);
  }
  Eigen::VectorXd vn(np), vnm1 = Eigen::VectorXd::Zero(np);
  const double seed = std::exp(-0.25 * std::log(M_PI));
  for (int i = 0; i < np; ++i) vn[i] = seed * gauss[i];

  std::vector<LogStateVector> out;
  out.reserve(max_n + 1);
  Eigen::VectorXcd kf, conv;
  for (int n = 0;; ++n) {
    Eigen::VectorXcd kern = (vn.cwiseProduct(gauss)).cast<std::complex<double>>();
    fft.fwd(kf, kern);
    kf = kf.cwiseProduct(xf);
    fft.inv(conv, kf);
    LogStateVector entry;
    entry.grid = g;
    entry.logmag.resize(np);
    entry.phase.resize(np);
    const double offset = std::log(dx) - log_norm_factor(n);
    for (int j = 0; j < np; ++j) {
      LogComplex lc = LogComplex::from_complex(conv[j]);
      entry.logmag[j] = lc.is_zero() ? kNegInf : lc.logmag + offset;
      entry.phase[j] = lc.phase;
    }
    out.push_back(std::move(entry));
    if (n == max_n) break;
    for (int i = 0; i < np; ++i) {
      const double vnp1 = ortho_step(nodes[i], n, vn[i], vnm1[i]);
      vnm1[i] = vn[i];
      vn[i] = vnp1;
    }
  }
  return out;
}

StateVector subordinated_exact(const OperatorModel& model, std::complex<double> z,
                               const StateVector& x) {
  check_state(model, x);
  if (!(z.real() > 0.0))
    throw std::invalid_argument("subordinated_exact: Re z must be positive");
  if (const auto* g = std::get_if<DiagonalGroup>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k)
      out[k] = std::exp(-z * g->q[k] * g->q[k]) * x.v[k];
    return StateVector::coords(std::move(out));
  }
  if (const auto* c = std::get_if<DiagonalCosine>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k)
      out[k] = std::exp(-z * c->omega[k] * c->omega[k]) * x.v[k];
    return StateVector::coords(std::move(out));
  }
  if (const auto* m = std::get_if<MatrixGroup>(&model)) {
    Eigen::VectorXcd y = m->u.adjoint() * x.v;
    for (int k = 0; k < y.size(); ++k)
      y[k] *= std::exp(-z * m->theta[k] * m->theta[k]);
    return StateVector::coords(m->u * y);
  }
  if (const auto* s = std::get_if<ShiftGroup>(&model)) {
    const Eigen::VectorXd xi = shift_wavenumbers(s->grid);
    Eigen::VectorXcd mult(xi.size());
    for (int j = 0; j < xi.size(); ++j) mult[j] = std::exp(-z * xi[j] * xi[j]);
    return shift_apply_multiplier(*s, x, mult);
  }
  const auto& b = std::get<BlockCosineLift>(model);
  const Eigen::VectorXd& w = b.inner.omega;
  const int k = static_cast<int>(w.size());
  Eigen::VectorXcd out(2 * k);
  for (int j = 0; j < k; ++j) {
    const std::complex<double> f = std::exp(-z * w[j] * w[j]);
    out[j] = f * x.v[j];
    out[k + j] = f * x.v[k + j];
  }
  return StateVector::coords(std::move(out));
}

namespace {

std::complex<double> resolvent_scalar(double q, int n, double alpha,
                                      std::complex<double> xk) {
  if (xk == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
  if (q == 0.0) return (n == 0) ? xk : std::complex<double>(0.0, 0.0);
  // (-i q)^n (1 - i q)^{-n-alpha-1} in log-polar form
  const double beta = n + alpha + 1.0;
  LogComplex lx = LogComplex::from_complex(xk);
  const double logmag =
      n * std::log(std::abs(q)) - beta * 0.5 * std::log1p(q * q) + lx.logmag;
  const double phase =
      n * ((q > 0.0) ? -M_PI_2 : M_PI_2) + beta * std::atan(q) + lx.phase;
  return LogComplex{logmag, phase}.to_complex();
}

}  // namespace

StateVector resolvent_power(const OperatorModel& model, int n, double alpha,
                            const StateVector& x) {
  check_state(model, x);
  if (n < 0) throw std::invalid_argument("resolvent_power: negative power");
  if (!(alpha > -1.0)) throw std::invalid_argument("resolvent_power: alpha must exceed -1");
  if (const auto* g = std::get_if<DiagonalGroup>(&model)) {
    Eigen::VectorXcd out(x.size());
    for (int k = 0; k < x.size(); ++k)
      out[k] = resolvent_scalar(g->q[k], n, alpha, x.v[k]);
    return StateVector::coords(std::move(out));
  }
  if (const auto* m = std::get_if<MatrixGroup>(&model)) {
    Eigen::VectorXcd y = m->u.adjoint() * x.v;
    for (int k = 0; k < y.size(); ++k)
      y[k] = resolvent_scalar(m->theta[k], n, alpha, y[k]);
    return StateVector::coords(m->u * y);
  }
  throw std::invalid_argument("resolvent_power: diagonal-group or matrix model required");
}

namespace {

// integrand frequency scale used to size the quadrature panels
double top_frequency(const OperatorModel& model) {
  if (const auto* g = std::get_if<DiagonalGroup>(&model))
    return g->q.size() ? g->q.cwiseAbs().maxCoeff() : 0.0;
  if (const auto* c = std::get_if<DiagonalCosine>(&model))
    return c->omega.size() ? c->omega.maxCoeff() : 0.0;
  if (const auto* m = std::get_if<MatrixGroup>(&model))
    return m->theta.size() ? m->theta.cwiseAbs().maxCoeff() : 0.0;
  const auto& b = std::get<BlockCosineLift>(model);
  return b.inner.omega.size() ? b.inner.omega.maxCoeff() : 0.0;
}

double fejer_weight(double s, double t) {
  const double u = t * s;
  if (std::abs(u) < 1e-3) {
    const double u2 = u * u;
    return (t * t / (2.0 * M_PI)) * (1.0 - u2 / 12.0 + u2 * u2 / 360.0);
  }
  const double sn = std::sin(0.5 * u);
  return 2.0 * sn * sn / (M_PI * s * s);
}

StateVector fejer_pass(const OperatorModel& model, double t, const StateVector& x,
                       double radius, int panels) {
  const detail::GaussLegendre& gl = detail::gauss_legendre_cached(16);
  std::vector<ComplexKahan> acc(x.size());
  const double w = 2.0 * radius / panels;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double a = -radius + pnl * w;
    const double mid = a + 0.5 * w, half = 0.5 * w;
    for (int i = 0; i < gl.nodes.size(); ++i) {
      const double s = mid + half * gl.nodes[i];
      const double c = fejer_weight(s, t) * gl.weights[i] * half;
      if (c == 0.0) continue;
      const StateVector ev = std::holds_alternative<DiagonalCosine>(model)
                                 ? evolve_cosine(model, s, x)
                                 : evolve_group(model, s, x);
      for (int j = 0; j < x.size(); ++j) acc[j].add(c * ev.v[j]);
    }
  }
  StateVector out;
  out.grid = x.grid;
  out.v.resize(x.size());
  for (int j = 0; j < x.size(); ++j) out.v[j] = acc[j].sum;
  return out;
}

}  // namespace

FejerDirectResult fejer_family_direct_ex(const OperatorModel& model, double t,
                                         const StateVector& x, double tol) {
  check_state(model, x);
  if (!(tol > 0.0)) throw std::invalid_argument("fejer_family_direct: tol must be positive");
  if (std::holds_alternative<ShiftGroup>(model))
    throw std::invalid_argument(
        "fejer_family_direct: shift model unsupported (kernel tail needs a "
        "truncation radius far beyond affordable grid evolutions)");
  FejerDirectResult res;
  if (t == 0.0) {  // f_0 vanishes identically
    res.value = StateVector{Eigen::VectorXcd::Zero(x.size()), x.grid};
    res.converged = true;
    return res;
  }
  const double norm = state_norm(model, x, 2.0);
  const double radius = std::max(1.05 * 2.0 * norm / (M_PI * tol), 8.0 + std::abs(t));
  const double panel_width = 4.0 * M_PI / (top_frequency(model) + std::abs(t) + 1.0);
  int panels = static_cast<int>(std::ceil(2.0 * radius / panel_width));

  StateVector prev = fejer_pass(model, t, x, radius, panels);
  for (int round = 0; round < 3; ++round) {
    panels *= 2;
    StateVector cur = fejer_pass(model, t, x, radius, panels);
    res.achieved = state_norm(model, cur - prev, 2.0);
    prev = std::move(cur);
    if (res.achieved < tol) {
      res.converged = true;
      break;
    }
  }
  res.value = std::move(prev);
  return res;
}

StateVector fejer_family_direct(const OperatorModel& model, double t,
                                const StateVector& x, double tol) {
  return fejer_family_direct_ex(model, t, x, tol).value;
}

double state_norm(const OperatorModel& model, const StateVector& x, double p) {
  if (const auto* b = std::get_if<BlockCosineLift>(&model)) {
    const int k = static_cast<int>(b->inner.omega.size());
    if (x.size() != 2 * k)
      throw std::invalid_argument("state_norm: lift state has wrong dimension");
    StateVector hi = StateVector::coords(x.v.head(k));
    StateVector lo = StateVector::coords(x.v.tail(k));
    return hi.norm(p) + lo.norm(p);
  }
  return x.norm(p);
}

double generator_power_norm(const OperatorModel& model, const StateVector& x, int p) {
  check_state(model, x);
  if (p < 0) throw std::invalid_argument("generator_power_norm: negative power");
  auto weighted = [&](const Eigen::VectorXd& lam, const Eigen::VectorXcd& v) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double term = std::pow(std::abs(lam[k]), 2.0 * p) * std::norm(v[k]);
      const double y = term - comp;
      const double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    return std::sqrt(sum);
  };
  if (const auto* g = std::get_if<DiagonalGroup>(&model)) return weighted(g->q, x.v);
  if (const auto* c = std::get_if<DiagonalCosine>(&model)) {
    // A = -omega^2, so |A^p x_k| = omega^{2p} |x_k|
    Eigen::VectorXd sq = c->omega.cwiseProduct(c->omega);
    return weighted(sq, x.v);
  }
  if (const auto* m = std::get_if<MatrixGroup>(&model))
    return weighted(m->theta, m->u.adjoint() * x.v);
  throw std::invalid_argument("generator_power_norm: spectral model required");
}

}  // namespace hermexp
