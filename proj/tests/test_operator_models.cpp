#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "hermexp/hermite.hpp"
#include "hermexp/operator_models.hpp"
#include "hermexp/quadrature.hpp"
#include "oracles.hpp"

using namespace hermexp;
using cplx = std::complex<double>;

namespace {

StateVector coords(std::initializer_list<cplx> xs) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (cplx c : xs) v[i++] = c;
  return StateVector::coords(std::move(v));
}

double rel_diff(const StateVector& a, const StateVector& b) {
  const double den = std::max(a.norm(2.0), b.norm(2.0));
  const double d = (a - b).norm(2.0);
  if (den < 1e-280) return d == 0.0 ? 0.0 : 1e300;
  return d / den;
}

// 3x3 skew-Hermitian test generator with eigenvalues near -5.1, 2.5, 9.0;
// the spread matters: quadrature extraction of a degree-d coefficient needs a
// spectral component near sqrt(2d) to stay above the double-precision floor
Eigen::MatrixXcd skew3() {
  Eigen::MatrixXcd h(3, 3);
  h << cplx(0.2, 0), cplx(0.3, -0.1), cplx(0, 0), cplx(0.3, 0.1), cplx(-0.5, 0),
      cplx(0, 0.2), cplx(0, 0), cplx(0, -0.2), cplx(1.1, 0);
  return cplx(0, 8) * h;
}

// two narrow bumps on the periodic grid; width 0.45 keeps Fourier mass out to
// xi ~ 9 so every coefficient degree up to 40 is well conditioned
StateVector bump_profile(const GridSpec& grid) {
  Eigen::VectorXcd v(grid.points);
  for (int j = 0; j < grid.points; ++j) {
    const double s = grid.node(j);
    v[j] = cplx(1.0, 0.3) * std::exp(-(s - 0.5) * (s - 0.5) / (2.0 * 0.45 * 0.45)) +
           cplx(0.4, -0.2) * std::exp(-(s + 2.0) * (s + 2.0) / (2.0 * 0.45 * 0.45));
  }
  return StateVector::on(grid, v);
}

StateVector rand_state(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd v(k);
  for (int i = 0; i < k; ++i) v[i] = cplx(u(rng), u(rng));
  return StateVector::coords(std::move(v));
}

}  // namespace

TEST_CASE("model constructors validate their inputs") {
  Eigen::MatrixXcd herm(2, 2);
  herm << cplx(1, 0), cplx(0, 1), cplx(0, -1), cplx(2, 0);
  CHECK_THROWS_AS(make_matrix_group(herm), std::invalid_argument);

  CHECK_THROWS_AS(make_shift_group(-1.0, 256), std::invalid_argument);
  CHECK_THROWS_AS(make_shift_group(16.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(make_shift_group(16.0, 1), std::invalid_argument);

  Eigen::VectorXd bad(2);
  bad << 1.0, -0.5;
  CHECK_THROWS_AS(make_diagonal_cosine(bad), std::invalid_argument);
  Eigen::VectorXd zero(1);
  zero << 0.0;
  CHECK_THROWS_AS(make_diagonal_cosine(zero), std::invalid_argument);

  // the eigendecomposition reproduces A = U diag(i theta) U^*
  MatrixGroup mg = make_matrix_group(skew3());
  Eigen::MatrixXcd rebuilt =
      mg.u * (cplx(0, 1) * mg.theta.cast<cplx>()).asDiagonal() * mg.u.adjoint();
  CHECK((rebuilt - mg.a).cwiseAbs().maxCoeff() < 1e-12 * mg.theta.cwiseAbs().maxCoeff());
}

TEST_CASE("state dimensions, norms, and dimension checks") {
  Eigen::VectorXd q(4);
  q << 1.0, -2.2, 4.0, 6.0;
  OperatorModel diag = DiagonalGroup{q};
  Eigen::VectorXd om(2);
  om << 1.0, 2.5;
  OperatorModel dcos = make_diagonal_cosine(om);
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om)};
  OperatorModel mat = make_matrix_group(skew3());
  OperatorModel shift = make_shift_group(16.0, 256);

  CHECK(state_dim(diag) == 4);
  CHECK(state_dim(dcos) == 2);
  CHECK(state_dim(lift) == 4);
  CHECK(state_dim(mat) == 3);
  CHECK(state_dim(shift) == 256);

  // lift uses the product-space sum norm, everything else the plain p-norm
  StateVector xl = coords({cplx(3, 4), cplx(0, 0), cplx(0, 0), cplx(5, 12)});
  CHECK(state_norm(lift, xl, 2.0) == doctest::Approx(18.0).epsilon(1e-14));
  CHECK(state_norm(diag, xl, 2.0) == doctest::Approx(xl.norm(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(state_norm(lift, coords({cplx(1, 0)}), 2.0), std::invalid_argument);

  // wrong dimension or wrong state flavour is rejected
  StateVector x2 = coords({cplx(1, 0), cplx(0, 1)});
  CHECK_THROWS_AS(evolve_group(diag, 1.0, x2), std::invalid_argument);
  GridSpec grid = std::get<ShiftGroup>(shift).grid;
  CHECK_THROWS_AS(evolve_group(shift, 1.0, x2), std::invalid_argument);
  CHECK_THROWS_AS(evolve_group(diag, 1.0, bump_profile(grid)), std::invalid_argument);
}

TEST_CASE("exact evolution matches closed forms") {
  Eigen::VectorXd q1(1);
  q1 << 1.0;
  OperatorModel diag1 = DiagonalGroup{q1};
  StateVector one = coords({cplx(1, 0)});

  // t = 0 is the identity for every family
  Eigen::VectorXd om(3);
  om << 1.0, 2.0, 3.0;
  OperatorModel dcos = make_diagonal_cosine(om);
  StateVector x3 = coords({cplx(0.5, 0.1), cplx(-0.3, 0.8), cplx(1.0, 0.0)});
  CHECK((evolve_group(diag1, 0.0, one) - one).norm(2.0) < 1e-15);
  CHECK((evolve_cosine(dcos, 0.0, x3) - x3).norm(2.0) < 1e-15);
  CHECK(evolve_sine(dcos, 0.0, x3).norm(2.0) < 1e-15);

  // e^{i pi} = -1
  StateVector gp = evolve_group(diag1, M_PI, one);
  CHECK(std::abs(gp.v[0] - cplx(-1.0, 0.0)) < 1e-14);

  // cos(omega pi/2) over omega = 1, 2, 3
  StateVector cp = evolve_cosine(dcos, M_PI / 2.0, x3);
  CHECK(std::abs(cp.v[0]) < 1e-14);
  CHECK(std::abs(cp.v[1] + x3.v[1]) < 1e-13);
  CHECK(std::abs(cp.v[2]) < 1e-13);

  // sine family: S(t) = sin(omega t)/omega, and sin(q t)/q for a group
  Eigen::VectorXd om2(1);
  om2 << 2.0;
  StateVector sp = evolve_sine(make_diagonal_cosine(om2), M_PI / 4.0, one);
  CHECK(std::abs(sp.v[0] - cplx(0.5, 0.0)) < 1e-14);
  Eigen::VectorXd q3(1);
  q3 << 3.0;
  StateVector sg = evolve_sine(DiagonalGroup{q3}, 0.7, one);
  CHECK(std::abs(sg.v[0] - cplx(std::sin(2.1) / 3.0, 0.0)) < 1e-14);

  // translation group: the profile moves rigidly and wraps with period 2L
  OperatorModel shift = make_shift_group(16.0, 256);
  GridSpec grid = std::get<ShiftGroup>(shift).grid;
  Eigen::VectorXcd gauss(grid.points), moved(grid.points);
  for (int j = 0; j < grid.points; ++j) {
    const double s = grid.node(j);
    gauss[j] = cplx(1.0, 0.3) * std::exp(-(s - 0.5) * (s - 0.5) / (2.0 * 1.1 * 1.1));
    moved[j] = cplx(1.0, 0.3) * std::exp(-(s - 1.5) * (s - 1.5) / (2.0 * 1.1 * 1.1));
  }
  StateVector gx = StateVector::on(grid, gauss);
  StateVector shifted = evolve_group(shift, 1.0, gx);
  CHECK((shifted.v - moved).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rel_diff(evolve_group(shift, 32.0, gx), gx) < 1e-13);

  // matrix group: central difference at t = 0 recovers the generator
  Eigen::MatrixXcd a = skew3();
  OperatorModel mat = make_matrix_group(a);
  const double h = 1e-5;
  StateVector fd =
      (1.0 / (2.0 * h)) * (evolve_group(mat, h, x3) - evolve_group(mat, -h, x3));
  Eigen::VectorXcd ax = a * x3.v;
  CHECK((fd.v - ax).norm() / ax.norm() < 1e-7);
  // and stays unitary
  CHECK(evolve_group(mat, 1.7, x3).norm(2.0) ==
        doctest::Approx(x3.norm(2.0)).epsilon(1e-13));

  // sine of unsupported models is rejected
  CHECK_THROWS_AS(evolve_sine(shift, 1.0, gx), std::invalid_argument);
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om)};
  std::mt19937_64 rng(7);
  StateVector x6 = rand_state(rng, 6);
  CHECK_THROWS_AS(evolve_sine(lift, 1.0, x6), std::invalid_argument);
}

TEST_CASE("the group law and the cosine functional equation hold") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);

  Eigen::VectorXd q(4);
  q << 0.3, -1.2, 2.0, 4.5;
  OperatorModel diag = DiagonalGroup{q};
  OperatorModel mat = make_matrix_group(skew3());
  Eigen::VectorXd om(3);
  om << 0.5, 1.0, 2.5;
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om)};
  OperatorModel shift = make_shift_group(16.0, 256);
  GridSpec grid = std::get<ShiftGroup>(shift).grid;

  StateVector xd = rand_state(rng, 4);
  StateVector xm = rand_state(rng, 3);
  StateVector xl = rand_state(rng, 6);
  StateVector xs = bump_profile(grid);

  struct Case {
    const OperatorModel* model;
    const StateVector* x;
  } cases[] = {{&diag, &xd}, {&mat, &xm}, {&lift, &xl}, {&shift, &xs}};
  for (const Case& c : cases) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double s = u(rng), t = u(rng);
      StateVector lhs = evolve_group(*c.model, s + t, *c.x);
      StateVector rhs = evolve_group(*c.model, s, evolve_group(*c.model, t, *c.x));
      worst = std::max(worst, (lhs - rhs).norm(2.0) / c.x->norm(2.0));
    }
    CHECK(worst < 1e-12);
    // inverse element
    StateVector back = evolve_group(*c.model, -1.3, evolve_group(*c.model, 1.3, *c.x));
    CHECK(rel_diff(back, *c.x) < 1e-13);
  }

  // C(t+s) + C(t-s) = 2 C(t) C(s) for every cosine-capable model
  OperatorModel dcos = make_diagonal_cosine(om);
  struct CCase {
    const OperatorModel* model;
    const StateVector* x;
  } ccases[] = {{&dcos, &xm}, {&lift, &xl}, {&shift, &xs}, {&mat, &xm}};
  for (const CCase& c : ccases) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double s = u(rng), t = u(rng);
      StateVector lhs =
          evolve_cosine(*c.model, t + s, *c.x) + evolve_cosine(*c.model, t - s, *c.x);
      StateVector rhs =
          2.0 * evolve_cosine(*c.model, t, evolve_cosine(*c.model, s, *c.x));
      worst = std::max(worst, (lhs - rhs).norm(2.0) / c.x->norm(2.0));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("expansion coefficients in closed form") {
  StateVector one = coords({cplx(1, 0)});

  // degree 0 equals the subordinated value at z = 1/4 (sine kind: half of it)
  Eigen::VectorXd q4(4);
  q4 << 0.3, -1.2, 2.0, 4.5;
  OperatorModel diag = DiagonalGroup{q4};
  StateVector x4 = coords({cplx(0.5, 0.1), cplx(-0.3, 0.8), cplx(1.0, 0.0), cplx(0.2, -0.6)});
  StateVector c0 = coeff_analytic(diag, ExpansionKind::group, 0, x4).to_state();
  CHECK((c0 - subordinated_exact(diag, {0.25, 0.0}, x4)).norm(2.0) < 1e-15);
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(c0.v[k] - std::exp(-q4[k] * q4[k] / 4.0) * x4.v[k]) < 1e-15);

  Eigen::VectorXd omh(2);
  omh << 1.0, 2.5;
  OperatorModel dch = make_diagonal_cosine(omh);
  StateVector x2 = coords({cplx(0.7, -0.2), cplx(-0.4, 0.5)});
  StateVector s0 = coeff_analytic(dch, ExpansionKind::sine, 0, x2).to_state();
  CHECK((s0 - 0.5 * subordinated_exact(dch, {0.25, 0.0}, x2)).norm(2.0) < 1e-16);

  // spot values: (iq)^n e^{-q^2/4} / (2^n n!) and (-w^2)^n e^{-w^2/4} scalings
  Eigen::VectorXd q2(1);
  q2 << 2.0;
  cplx g2 = coeff_analytic(DiagonalGroup{q2}, ExpansionKind::group, 2, one).to_state().v[0];
  CHECK(std::abs(g2 - cplx(-std::exp(-1.0) / 2.0, 0.0)) < 1e-15);

  Eigen::VectorXd om2(1);
  om2 << 2.0;
  OperatorModel dc2 = make_diagonal_cosine(om2);
  cplx c3 = coeff_analytic(dc2, ExpansionKind::cosine, 3, one).to_state().v[0];
  CHECK(std::abs(c3 - cplx(-std::exp(-1.0) / 720.0, 0.0)) < 1e-17);
  cplx s1 = coeff_analytic(dc2, ExpansionKind::sine, 1, one).to_state().v[0];
  CHECK(std::abs(s1 - cplx(-std::exp(-1.0) / 12.0, 0.0)) < 1e-16);

  // far beyond double range the log representation carries the value:
  // degree-90 cosine coefficient of omega = 3 is 9^45 e^{-9/4} / (2^90 90!)
  Eigen::VectorXd om3(1);
  om3 << 3.0;
  LogStateVector l45 = coeff_analytic(make_diagonal_cosine(om3), ExpansionKind::cosine, 45, one);
  oracles::big_float expected =
      45 * log(oracles::big_float(9)) - oracles::big_float(9) / 4 -
      log(oracles::pow2_big(90) * oracles::factorial_big(90));
  CHECK(std::abs(l45.logmag[0] - static_cast<double>(expected)) <
        1e-12 * std::abs(l45.logmag[0]));
  CHECK(std::abs(std::remainder(l45.phase[0] - M_PI, 2.0 * M_PI)) < 1e-12);

  // a generator with e^{-w^2/4} below the representable range flushes to zero
  Eigen::VectorXd om53(1);
  om53 << 53.0;
  LogStateVector fl = coeff_analytic(make_diagonal_cosine(om53), ExpansionKind::cosine, 0, one);
  CHECK(std::isinf(fl.logmag[0]));
  CHECK(fl.to_state().norm(2.0) == 0.0);

  // kind/model combinations without a closed form are rejected
  CHECK_THROWS_AS(coeff_analytic(dc2, ExpansionKind::group, 0, one), std::invalid_argument);
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om2)};
  StateVector xl = coords({cplx(1, 0), cplx(0, 1)});
  CHECK_THROWS_AS(coeff_analytic(lift, ExpansionKind::cosine, 0, xl), std::invalid_argument);
  OperatorModel shift = make_shift_group(16.0, 64);
  StateVector xs = bump_profile(std::get<ShiftGroup>(shift).grid);
  CHECK_THROWS_AS(coeff_analytic(shift, ExpansionKind::cosine, 0, xs), std::invalid_argument);
  CHECK_THROWS_AS(coeff_analytic(diag, ExpansionKind::group, -1, x4), std::invalid_argument);
}

TEST_CASE("analytic coefficients agree with quadrature extraction") {
  // every model carries a spectral component near sqrt(2 * max degree): the
  // degree-d coefficient of a component omega scales as the kernel peak times
  // exp(d ln omega - omega^2/4 - ln sqrt(2^d d!)), which is maximal (and O(1))
  // at omega = sqrt(2d); colder spectra sink below the extraction floor
  std::mt19937_64 rng(99);
  const QuadratureRule rule = gauss_hermite_rule(240);

  Eigen::VectorXd qg(5);
  qg << 1.0, -2.2, 4.0, 6.0, 8.0;
  OperatorModel diag = DiagonalGroup{qg};
  Eigen::VectorXd qc(4);
  qc << 0.3, 3.0, 7.0, 13.0;
  OperatorModel diag_hot = DiagonalGroup{qc};
  Eigen::VectorXd om(4);
  om << 2.0, 5.0, 9.0, 13.0;
  OperatorModel dcos = make_diagonal_cosine(om);
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om)};
  OperatorModel mat = make_matrix_group(skew3());
  OperatorModel shift = make_shift_group(16.0, 256);

  StateVector xg = rand_state(rng, 5);
  StateVector xc = rand_state(rng, 4);
  StateVector xm = rand_state(rng, 3);
  StateVector xl = rand_state(rng, 8);
  StateVector xs = bump_profile(std::get<ShiftGroup>(shift).grid);

  struct Case {
    const char* name;
    const OperatorModel* model;
    ExpansionKind kind;
    const StateVector* x;
  } cases[] = {
      {"diag group", &diag, ExpansionKind::group, &xg},
      {"diag cosine", &diag_hot, ExpansionKind::cosine, &xc},
      {"diag sine", &diag_hot, ExpansionKind::sine, &xc},
      {"dcos cosine", &dcos, ExpansionKind::cosine, &xc},
      {"dcos sine", &dcos, ExpansionKind::sine, &xc},
      {"matrix group", &mat, ExpansionKind::group, &xm},
      {"lift group", &lift, ExpansionKind::group, &xl},
      {"shift group", &shift, ExpansionKind::group, &xs},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    double worst = 0.0;
    for (int n : {0, 1, 2, 5, 10, 20, 30, 40}) {
      const int deg = c.kind == ExpansionKind::group ? n
                      : c.kind == ExpansionKind::cosine ? 2 * n
                                                        : 2 * n + 1;
      auto f = [&](double t) {
        switch (c.kind) {
          case ExpansionKind::group: return evolve_group(*c.model, t, *c.x);
          case ExpansionKind::cosine: return evolve_cosine(*c.model, t, *c.x);
          default: return evolve_sine(*c.model, t, *c.x);
        }
      };
      StateVector qv = coeff_by_quadrature(f, deg, rule);
      StateVector av = coeff_analytic(*c.model, c.kind, n, *c.x).to_state();
      worst = std::max(worst, rel_diff(av, qv));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("cosine coefficients are even and sine coefficients are odd") {
  Eigen::VectorXd om(4);
  om << 2.0, 5.0, 9.0, 13.0;
  OperatorModel dcos = make_diagonal_cosine(om);
  StateVector x = coords({cplx(0.5, 0.1), cplx(-0.3, 0.8), cplx(1.0, 0.0), cplx(0.2, -0.6)});
  const QuadratureRule rule = gauss_hermite_rule(240);

  double worst = 0.0;
  for (int deg : {1, 3, 7, 15}) {
    auto f = [&](double t) { return evolve_cosine(dcos, t, x); };
    worst = std::max(worst, coeff_by_quadrature(f, deg, rule).norm(2.0));
  }
  for (int deg : {0, 2, 6, 14}) {
    auto f = [&](double t) { return evolve_sine(dcos, t, x); };
    worst = std::max(worst, coeff_by_quadrature(f, deg, rule).norm(2.0));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("coefficient norms respect the factorial growth bound") {
  // ||c_n(x)|| sqrt(2^n n!) stays below ||x|| for a bounded unitary group
  Eigen::VectorXd q8(8);
  q8 << 0.0, 0.7, -1.3, 2.2, -3.5, 4.1, 5.0, -6.0;
  OperatorModel diag = DiagonalGroup{q8};
  std::mt19937_64 rng(5);
  StateVector x = rand_state(rng, 8);
  const double logx = std::log(x.norm(2.0));

  double worst = -1e300;
  for (int n = 0; n <= 200; ++n) {
    LogStateVector c = coeff_analytic(diag, ExpansionKind::group, n, x);
    const double lhs = c.log_norm2() + 0.5 * (n * M_LN2 + log_factorial(n));
    worst = std::max(worst, lhs - logx);
  }
  CHECK(std::exp(worst) <= 1.0 + 1e-9);
}

TEST_CASE("the peak cosine coefficient tracks its scaling envelope") {
  // with omega_k = k the largest degree-2n coefficient component behaves like
  // c (4n/e)^n / (2^{2n} (2n)!) with c constant within a 1.25 factor band
  Eigen::VectorXd om(64);
  for (int k = 1; k <= 64; ++k) om[k - 1] = k;
  OperatorModel dcos = make_diagonal_cosine(om);
  Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(64);
  StateVector x = StateVector::coords(ones);

  Eigen::VectorXd dev(36);
  double mean = 0.0;
  for (int n = 5; n <= 40; ++n) {
    LogStateVector c = coeff_analytic(dcos, ExpansionKind::cosine, n, x);
    const double peak = c.logmag.maxCoeff() + 2.0 * n * M_LN2 + log_factorial(2 * n);
    dev[n - 5] = peak - n * (std::log(4.0 * n) - 1.0);
    mean += dev[n - 5];
  }
  mean /= 36.0;
  double spread = 0.0;
  for (int i = 0; i < 36; ++i) spread = std::max(spread, std::abs(dev[i] - mean));
  CHECK(std::exp(spread) < 1.25);
}

TEST_CASE("lift coefficients carry the block structure") {
  Eigen::VectorXd om(3);
  om << 0.5, 1.0, 2.5;
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om)};
  StateVector up = coords({cplx(0.5, 0.1), cplx(-0.3, 0.8), cplx(1.0, 0.0), cplx(0, 0),
                           cplx(0, 0), cplx(0, 0)});
  StateVector dn = coords({cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(0.5, 0.1),
                           cplx(-0.3, 0.8), cplx(1.0, 0.0)});

  // even degrees: block diagonal with equal blocks
  for (int n : {0, 2, 4, 8}) {
    StateVector a = coeff_analytic(lift, ExpansionKind::group, n, up).to_state();
    StateVector b = coeff_analytic(lift, ExpansionKind::group, n, dn).to_state();
    CHECK(a.v.tail(3).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(b.v.head(3).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((a.v.head(3) - b.v.tail(3)).cwiseAbs().maxCoeff() < 1e-13);
  }
  // odd degrees: purely off-diagonal
  for (int n : {1, 3, 9}) {
    StateVector a = coeff_analytic(lift, ExpansionKind::group, n, up).to_state();
    StateVector b = coeff_analytic(lift, ExpansionKind::group, n, dn).to_state();
    CHECK(a.v.head(3).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(b.v.tail(3).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("even group coefficients match the induced cosine family") {
  // a group with spectrum i q and the cosine model with frequencies |q| share
  // expansion data: the degree-2n group coefficient equals the degree-n cosine
  // coefficient, compared here entry by entry in the log representation
  Eigen::VectorXd q(4);
  q << 0.3, -1.2, 2.0, 4.5;
  OperatorModel diag = DiagonalGroup{q};
  OperatorModel dcos = make_diagonal_cosine(q.cwiseAbs());
  StateVector x = coords({cplx(0.5, 0.1), cplx(-0.3, 0.8), cplx(1.0, 0.0), cplx(0.2, -0.6)});

  double worst = 0.0;
  for (int n : {0, 1, 2, 7, 20, 41}) {
    LogStateVector g2 = coeff_analytic(diag, ExpansionKind::group, 2 * n, x);
    LogStateVector cn = coeff_analytic(dcos, ExpansionKind::cosine, n, x);
    for (int k = 0; k < 4; ++k) {
      if (std::isinf(g2.logmag[k]) && std::isinf(cn.logmag[k])) continue;
      worst = std::max(worst, std::abs(g2.logmag[k] - cn.logmag[k]));
      worst = std::max(worst, std::abs(std::remainder(g2.phase[k] - cn.phase[k], 2.0 * M_PI)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("subordinated evolution matches closed forms") {
  Eigen::VectorXd q(4);
  q << 0.3, -1.2, 2.0, 4.5;
  OperatorModel diag = DiagonalGroup{q};
  StateVector x4 = coords({cplx(0.5, 0.1), cplx(-0.3, 0.8), cplx(1.0, 0.0), cplx(0.2, -0.6)});

  // diagonal group: e^{z A^2} multiplies by e^{-z q^2}
  const cplx z(0.3, 0.2);
  StateVector sd = subordinated_exact(diag, z, x4);
  double worst = 0.0;
  for (int k = 0; k < 4; ++k)
    worst = std::max(worst, std::abs(sd.v[k] - std::exp(-z * q[k] * q[k]) * x4.v[k]));
  CHECK(worst < 1e-15);

  // z -> 0+ approaches the identity
  CHECK((subordinated_exact(diag, {1e-6, 0.0}, x4) - x4).norm(2.0) < 1e-4);

  // matrix rotation: A^2 = -I, so e^{zA^2} = e^{-z} I
  Eigen::MatrixXcd rot(2, 2);
  rot << cplx(0, 0), cplx(1, 0), cplx(-1, 0), cplx(0, 0);
  OperatorModel rotm = make_matrix_group(rot);
  StateVector x2 = coords({cplx(1, 0), cplx(0, 2)});
  CHECK(rel_diff(subordinated_exact(rotm, z, x2), std::exp(-z) * x2) < 1e-14);

  // cosine models and their lift: e^{zA} multiplies by e^{-z omega^2}
  Eigen::VectorXd om(2);
  om << 1.0, 2.5;
  OperatorModel dch = make_diagonal_cosine(om);
  StateVector xc = coords({cplx(0.7, -0.2), cplx(-0.4, 0.5)});
  StateVector sc = subordinated_exact(dch, z, xc);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(sc.v[k] - std::exp(-z * om[k] * om[k]) * xc.v[k]) < 1e-15);
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om)};
  StateVector xl = coords({cplx(0.7, -0.2), cplx(-0.4, 0.5), cplx(0.7, -0.2), cplx(-0.4, 0.5)});
  StateVector slift = subordinated_exact(lift, z, xl);
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(slift.v[k] - std::exp(-z * om[k] * om[k]) * xc.v[k]) < 1e-15);
    CHECK(std::abs(slift.v[2 + k] - std::exp(-z * om[k] * om[k]) * xc.v[k]) < 1e-15);
  }

  // translation group: Gaussian brightness spreads by heat flow, the profile
  // stays Gaussian with variance sigma^2 + 2z
  OperatorModel shift = make_shift_group(16.0, 256);
  GridSpec grid = std::get<ShiftGroup>(shift).grid;
  Eigen::VectorXcd gauss(grid.points);
  const double sig = 1.1;
  for (int j = 0; j < grid.points; ++j) {
    const double s = grid.node(j);
    gauss[j] = cplx(1.0, 0.3) * std::exp(-(s - 0.5) * (s - 0.5) / (2.0 * sig * sig));
  }
  StateVector gx = StateVector::on(grid, gauss);
  const double zz = 0.3;
  StateVector hs = subordinated_exact(shift, {zz, 0.0}, gx);
  const double var = sig * sig + 2.0 * zz;
  double wheat = 0.0;
  for (int j = 0; j < grid.points; ++j) {
    const double s = grid.node(j);
    const cplx expect = cplx(1.0, 0.3) * (sig / std::sqrt(var)) *
                        std::exp(-(s - 0.5) * (s - 0.5) / (2.0 * var));
    wheat = std::max(wheat, std::abs(hs.v[j] - expect));
  }
  CHECK(wheat < 1e-12);

  // the open right half plane is required
  CHECK_THROWS_AS(subordinated_exact(diag, {0.0, 1.0}, x4), std::invalid_argument);
  CHECK_THROWS_AS(subordinated_exact(diag, {-0.1, 0.0}, x4), std::invalid_argument);
}

TEST_CASE("resolvent powers match the integral representation") {
  StateVector one = coords({cplx(1, 0)});

  // (1 - A)^{-1} at q = 0 is the identity
  Eigen::VectorXd q0(1);
  q0 << 0.0;
  CHECK((resolvent_power(DiagonalGroup{q0}, 0, 0.0, one) - one).norm(2.0) < 1e-15);

  // q = 1, n = 1: (-i)(1-i)^{-2} = 1/2
  Eigen::VectorXd q1(1);
  q1 << 1.0;
  StateVector r11 = resolvent_power(DiagonalGroup{q1}, 1, 0.0, one);
  CHECK(std::abs(r11.v[0] - cplx(0.5, 0.0)) < 1e-15);

  // Laplace-transform quadrature oracle over several (n, alpha) pairs
  double worst = 0.0;
  for (double qq : {0.7, 2.2})
    for (auto [n, al] : {std::pair{0, 0.0}, {1, 0.0}, {2, 0.5}, {3, -0.3}}) {
      Eigen::VectorXd qv(1);
      qv << qq;
      StateVector r = resolvent_power(DiagonalGroup{qv}, n, al, one);
      const cplx oracle = oracles::resolvent_power_laplace(qq, n, al);
      worst = std::max(worst, std::abs(r.v[0] - oracle));
    }
  CHECK(worst < 1e-8);

  // matrix model on an eigenvector reduces to the scalar symbol
  Eigen::MatrixXcd rot(2, 2);
  rot << cplx(0, 0), cplx(1, 0), cplx(-1, 0), cplx(0, 0);
  OperatorModel rotm = make_matrix_group(rot);
  StateVector ev = coords({cplx(1, 0), cplx(0, 1)});
  StateVector rv = resolvent_power(rotm, 1, 0.5, ev);
  const cplx scalar = std::pow(cplx(0, -1), 1) * std::pow(cplx(1, -1), -2.5);
  CHECK(std::abs(rv.v[0] - scalar) < 1e-14);
  CHECK(std::abs(rv.v[1] - scalar * cplx(0, 1)) < 1e-14);

  // domain checks
  Eigen::VectorXd om1(1);
  om1 << 1.0;
  CHECK_THROWS_AS(resolvent_power(make_diagonal_cosine(om1), 0, 0.0, one),
                  std::invalid_argument);
  CHECK_THROWS_AS(resolvent_power(DiagonalGroup{q1}, -1, 0.0, one), std::invalid_argument);
  CHECK_THROWS_AS(resolvent_power(DiagonalGroup{q1}, 0, -1.0, one), std::invalid_argument);
}

TEST_CASE("direct integration of the smoothed family hits the triangle values") {
  // integrating the evolution against (1 - cos(t s))/(pi s^2) produces
  // (t - |q|)_+ on each spectral component; the kernel mass identity
  // J(a) = integral of (1 - cos(a s))/s^2 = pi |a| is verified numerically
  for (double a : {1.0, 2.0}) {
    const double S = 2e5;
    auto f = [a](double s) {
      if (std::abs(s) < 1e-8) return 0.5 * a * a;
      return (1.0 - std::cos(a * s)) / (s * s);
    };
    // mean-corrected truncation: the tail of (1 - cos)/s^2 integrates to 2/S
    const double J = 2.0 * oracles::simpson(f, 0.0, S, 400000) + 2.0 / S;
    CHECK(std::abs(J - M_PI * a) < 1e-10);
  }

  StateVector one = coords({cplx(1, 0)});
  Eigen::VectorXd q1(1);
  q1 << 1.0;
  OperatorModel m1 = DiagonalGroup{q1};

  // t = 0 integrates the zero kernel
  FejerDirectResult f0 = fejer_family_direct_ex(m1, 0.0, one, 1e-6);
  CHECK(f0.value.norm(2.0) == 0.0);
  CHECK(f0.converged);

  // inside the light cone: (3 - 1)_+ = 2
  FejerDirectResult f1 = fejer_family_direct_ex(m1, 3.0, one, 2e-5);
  CHECK(f1.converged);
  CHECK(f1.achieved <= 2e-5);
  CHECK(std::abs(f1.value.v[0] - cplx(2.0, 0.0)) < 1e-7);

  // outside: (3 - 5)_+ = 0
  Eigen::VectorXd q5(1);
  q5 << 5.0;
  FejerDirectResult f5 = fejer_family_direct_ex(DiagonalGroup{q5}, 3.0, one, 2e-5);
  CHECK(f5.converged);
  CHECK(std::abs(f5.value.v[0]) < 1e-7);

  // cosine model behaves identically in its frequency
  Eigen::VectorXd o1(1);
  o1 << 1.0;
  FejerDirectResult fc = fejer_family_direct_ex(make_diagonal_cosine(o1), 3.0, one, 2e-5);
  CHECK(fc.converged);
  CHECK(std::abs(fc.value.v[0] - cplx(2.0, 0.0)) < 1e-7);

  // shorthand wrapper and input validation
  StateVector direct = fejer_family_direct(m1, 3.0, one, 2e-5);
  CHECK((direct - f1.value).norm(2.0) == 0.0);
  CHECK_THROWS_AS(fejer_family_direct_ex(m1, 1.0, one, 0.0), std::invalid_argument);
  OperatorModel shift = make_shift_group(16.0, 64);
  StateVector xs = bump_profile(std::get<ShiftGroup>(shift).grid);
  CHECK_THROWS_AS(fejer_family_direct_ex(shift, 1.0, xs, 1e-4), std::invalid_argument);
}

TEST_CASE("shift coefficient tables are prefix consistent") {
  OperatorModel shift = make_shift_group(16.0, 256);
  const ShiftGroup& model = std::get<ShiftGroup>(shift);
  StateVector x = bump_profile(model.grid);

  auto tab20 = shift_coeff_table(model, x, 20);
  auto tab8 = shift_coeff_table(model, x, 8);
  REQUIRE(tab20.size() == 21);
  REQUIRE(tab8.size() == 9);
  double worst = 0.0;
  for (int n = 0; n <= 8; ++n) {
    worst = std::max(worst, (tab20[n].to_state() - tab8[n].to_state()).norm(2.0));
    StateVector via = coeff_analytic(shift, ExpansionKind::group, n, x).to_state();
    worst = std::max(worst, (tab20[n].to_state() - via).norm(2.0));
  }
  CHECK(worst < 1e-14);

  CHECK_THROWS_AS(shift_coeff_table(model, x, -1), std::invalid_argument);
  StateVector off_grid = coords({cplx(1, 0), cplx(0, 1)});
  CHECK_THROWS_AS(shift_coeff_table(model, off_grid, 4), std::invalid_argument);
}

TEST_CASE("generator power norms are computed spectrally") {
  StateVector ones2 = coords({cplx(1, 0), cplx(1, 0)});
  Eigen::VectorXd q12(2);
  q12 << 1.0, 2.0;
  CHECK(generator_power_norm(DiagonalGroup{q12}, ones2, 2) ==
        doctest::Approx(std::sqrt(17.0)).epsilon(1e-14));
  // cosine generator is -omega^2, so power p weights by omega^{2p}
  CHECK(generator_power_norm(make_diagonal_cosine(q12), ones2, 1) ==
        doctest::Approx(std::sqrt(17.0)).epsilon(1e-14));

  // power zero is the plain norm even with a zero frequency present
  Eigen::VectorXd q02(2);
  q02 << 0.0, 2.0;
  CHECK(generator_power_norm(DiagonalGroup{q02}, ones2, 0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  // unitary matrix case: |theta| = 1 makes every power an isometry
  Eigen::MatrixXcd rot(2, 2);
  rot << cplx(0, 0), cplx(1, 0), cplx(-1, 0), cplx(0, 0);
  OperatorModel rotm = make_matrix_group(rot);
  StateVector ev = coords({cplx(1, 0), cplx(0, 1)});
  CHECK(generator_power_norm(rotm, ev, 3) ==
        doctest::Approx(ev.norm(2.0)).epsilon(1e-13));

  OperatorModel shift = make_shift_group(16.0, 64);
  StateVector xs = bump_profile(std::get<ShiftGroup>(shift).grid);
  CHECK_THROWS_AS(generator_power_norm(shift, xs, 1), std::invalid_argument);
  Eigen::VectorXd om1(1);
  om1 << 1.0;
  OperatorModel lift = BlockCosineLift{make_diagonal_cosine(om1)};
  StateVector xl = coords({cplx(1, 0), cplx(0, 1)});
  CHECK_THROWS_AS(generator_power_norm(lift, xl, 1), std::invalid_argument);
  CHECK_THROWS_AS(generator_power_norm(DiagonalGroup{q12}, ones2, -1), std::invalid_argument);
}
