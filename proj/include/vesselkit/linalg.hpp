#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace vesselkit {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Throws ValidationError naming `what` when any entry is NaN/Inf.
void require_finite(const ComplexMatrix& m, const char* what);

struct SolveReport {
    double condition_estimate = 1.0;
    bool ill_conditioned = false;
};

constexpr double kPivotFloor = 1e-14;
constexpr double kConditionCap = 1e12;

/// M^{-1} * rhs via partial-pivoting LU. Throws SingularMatrixError when a
/// pivot falls below kPivotFloor * ||M||_F; flags (does not throw) condition
/// estimates above kConditionCap.
ComplexMatrix lu_solve(const ComplexMatrix& m, const ComplexMatrix& rhs, SolveReport* report = nullptr);

/// Product of LU pivots with permutation sign.
cplx det_lu(const ComplexMatrix& m);

/// Symmetric diagonal scaling s_i = 1/sqrt(|M_ii|) (1 where the diagonal is
/// zero). Solves and determinants of D M D are insensitive to the wild
/// diagonal growth of Cauchy-like vessel matrices.
Eigen::VectorXd equilibration(const ComplexMatrix& m);

/// M^{-1} * rhs through the equilibrated matrix; same guards as lu_solve.
ComplexMatrix solve_equilibrated(const ComplexMatrix& m, const ComplexMatrix& rhs, SolveReport* report = nullptr);

/// Condition estimate of the equilibrated matrix.
double equilibrated_condition(const ComplexMatrix& m);

/// exp(x*M) for 2x2 M via the Cayley-Hamilton closed form.
ComplexMatrix mat2_exp(const ComplexMatrix& m, cplx x);

/// Truncated power series sum_j coeffs[j] h^j with same-shape coefficients.
struct MatrixSeries {
    std::vector<ComplexMatrix> coeffs;

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
    static MatrixSeries constant(const ComplexMatrix& m, int order);
};

using ScalarSeries = std::vector<cplx>;

/// Truncated Cauchy product; order is the smaller of the two.
MatrixSeries series_mul(const MatrixSeries& a, const MatrixSeries& b);
/// Throws SingularMatrixError when coeffs[0] is singular.
MatrixSeries series_invert(const MatrixSeries& a);
ScalarSeries series_trace(const MatrixSeries& a);
/// Termwise d/dh; order drops by one.
MatrixSeries series_derivative(const MatrixSeries& a);

inline ComplexMatrix adj(const ComplexMatrix& m) { return m.adjoint(); }

} // namespace vesselkit
