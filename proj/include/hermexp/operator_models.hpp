#ifndef HERMEXP_OPERATOR_MODELS_HPP
#define HERMEXP_OPERATOR_MODELS_HPP

#include <Eigen/Dense>
#include <complex>
#include <variant>
#include <vector>

#include "hermexp/state_vector.hpp"

namespace hermexp {

enum class ExpansionKind { group, cosine, sine };

// A = i diag(q): unitary multiplication group e^{itq}
struct DiagonalGroup {
  Eigen::VectorXd q;
};

// A = -diag(omega^2), omega_k > 0: cosine family cos(omega t), contraction
struct DiagonalCosine {
  Eigen::VectorXd omega;
};

// A = -d/dx on a uniform periodic grid over [-L, L): translation group
struct ShiftGroup {
  GridSpec grid;
};

// A skew-Hermitian: unitary group e^{tA} = U diag(e^{i theta t}) U^*
struct MatrixGroup {
  Eigen::MatrixXcd a;
  Eigen::VectorXd theta;  // A = U diag(i theta) U^*
  Eigen::MatrixXcd u;
};

// block generator [[0, I], [A, 0]] over the product space X x X with the sum
// norm; generates the group J(t) = [[C(t), S(t)], [A S(t), C(t)]]
struct BlockCosineLift {
  DiagonalCosine inner;
};

using OperatorModel =
    std::variant<DiagonalGroup, DiagonalCosine, ShiftGroup, MatrixGroup, BlockCosineLift>;

MatrixGroup make_matrix_group(const Eigen::MatrixXcd& a);
DiagonalCosine make_diagonal_cosine(Eigen::VectorXd omega);
ShiftGroup make_shift_group(double half_width, int points);  // points: power of two

// dimension a state must have for this model
int state_dim(const OperatorModel& model);

// exact evolution
StateVector evolve_group(const OperatorModel& model, double t, const StateVector& x);
StateVector evolve_cosine(const OperatorModel& model, double t, const StateVector& x);
StateVector evolve_sine(const OperatorModel& model, double t, const StateVector& x);

// closed-form expansion coefficient of degree n applied to x:
//   group:  A^n T_g(1/4) x / (2^n n!)          (pairs with H_n)
//   cosine: A^n T_c(1/4) x / (2^{2n} (2n)!)    (pairs with H_{2n})
//   sine:   A^n T_c(1/4) x / (2^{2n+1} (2n+1)!) (pairs with H_{2n+1})
LogStateVector coeff_analytic(const OperatorModel& model, ExpansionKind kind,
                              int n, const StateVector& x);

struct CoefficientTable {
  ExpansionKind kind = ExpansionKind::group;
  std::vector<LogStateVector> entries;  // entries[n] is the degree-n coefficient
};

// every shift-group coefficient h_n * f for n <= max_n in one grid sweep;
// the per-degree convolution is the trapezoid sum of the periodic integral,
// evaluated in frequency space
std::vector<LogStateVector> shift_coeff_table(const ShiftGroup& model,
                                              const StateVector& x, int max_n);

// subordinated holomorphic semigroup at z: e^{zA^2} x (group models) or
// e^{zA} x (cosine models); requires Re z > 0
StateVector subordinated_exact(const OperatorModel& model, std::complex<double> z,
                               const StateVector& x);

// (-A)^n (1 - A)^{-n-alpha-1} x on the principal branch; diagonal-group and
// matrix models only
StateVector resolvent_power(const OperatorModel& model, int n, double alpha,
                            const StateVector& x);

struct FejerDirectResult {
  StateVector value;
  double achieved = 0.0;  // last successive-refinement difference
  bool converged = false;
};

// integral of f_t(s) against the evolution family, by truncated adaptive
// quadrature; the truncation radius follows the kernel tail bound
// 2 ||x|| / (pi S) < tol
FejerDirectResult fejer_family_direct_ex(const OperatorModel& model, double t,
                                         const StateVector& x, double tol);
StateVector fejer_family_direct(const OperatorModel& model, double t,
                                const StateVector& x, double tol);

// model norm: the product-space sum norm for the block lift, plain p-norm
// otherwise
double state_norm(const OperatorModel& model, const StateVector& x, double p = 2.0);

// || A^p x || in l2, computed spectrally (diagonal, matrix models)
double generator_power_norm(const OperatorModel& model, const StateVector& x, int p);

}  // namespace hermexp

#endif
