#include "vesselkit/linalg.hpp"

#include <cmath>

#include "vesselkit/errors.hpp"

namespace vesselkit {

void require_finite(const ComplexMatrix& m, const char* what)
{
    if (!m.allFinite()) throw ValidationError(std::string(what) + " has non-finite entries");
}

namespace {

Eigen::PartialPivLU<ComplexMatrix> factor(const ComplexMatrix& m, SolveReport* report)
{
    if (m.rows() != m.cols()) throw ValidationError("LU requires a square matrix");
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const double floor = kPivotFloor * m.norm();
    const auto& packed = lu.matrixLU();
    for (Eigen::Index k = 0; k < packed.rows(); ++k) {
        if (std::abs(packed(k, k)) < floor || packed(k, k) == cplx(0.0))
            throw SingularMatrixError("pivot " + std::to_string(k) + " below floor (" +
                                      std::to_string(std::abs(packed(k, k))) + ")");
    }
    if (report) {
        double rc = lu.rcond();
        report->condition_estimate = rc > 0 ? 1.0 / rc : INFINITY;
        report->ill_conditioned = report->condition_estimate > kConditionCap;
    }
    return lu;
}

} // namespace

ComplexMatrix lu_solve(const ComplexMatrix& m, const ComplexMatrix& rhs, SolveReport* report)
{
    return factor(m, report).solve(rhs);
}

cplx det_lu(const ComplexMatrix& m)
{
    if (m.rows() != m.cols()) throw ValidationError("determinant requires a square matrix");
    if (m.rows() == 1) return m(0, 0);
    return Eigen::PartialPivLU<ComplexMatrix>(m).determinant();
}

Eigen::VectorXd equilibration(const ComplexMatrix& m)
{
    Eigen::VectorXd s(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double d = std::abs(m(i, i));
        s(i) = d > 0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    return s;
}

ComplexMatrix solve_equilibrated(const ComplexMatrix& m, const ComplexMatrix& rhs, SolveReport* report)
{
    Eigen::VectorXd s = equilibration(m);
    ComplexMatrix scaled = s.asDiagonal() * m * s.asDiagonal();
    ComplexMatrix y = lu_solve(scaled, s.asDiagonal() * rhs, report);
    return s.asDiagonal() * y;
}

double equilibrated_condition(const ComplexMatrix& m)
{
    Eigen::VectorXd s = equilibration(m);
    ComplexMatrix scaled = s.asDiagonal() * m * s.asDiagonal();
    SolveReport r;
    factor(scaled, &r);
    return r.condition_estimate;
}

ComplexMatrix mat2_exp(const ComplexMatrix& m, cplx x)
{
    if (m.rows() != 2 || m.cols() != 2) throw ValidationError("mat2_exp requires a 2x2 matrix");
    // M = s I + N with N traceless, N^2 = mu^2 I.
    const cplx s = 0.5 * (m(0, 0) + m(1, 1));
    ComplexMatrix n = m;
    n(0, 0) -= s;
    n(1, 1) -= s;
    const cplx mu = std::sqrt(n(0, 0) * n(0, 0) + n(0, 1) * n(1, 0));
    const cplx z = x * mu;
    cplx ch, shc; // cosh(z), sinh(z)/z
    if (std::abs(z) < 1e-3) {
        const cplx z2 = z * z;
        ch = 1.0 + z2 / 2.0 * (1.0 + z2 / 12.0 * (1.0 + z2 / 30.0));
        shc = 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
    } else {
        ch = std::cosh(z);
        shc = std::sinh(z) / z;
    }
    ComplexMatrix out = ch * ComplexMatrix::Identity(2, 2) + (x * shc) * n;
    return std::exp(x * s) * out;
}

MatrixSeries MatrixSeries::constant(const ComplexMatrix& m, int order)
{
    MatrixSeries s;
    s.coeffs.assign(order + 1, ComplexMatrix::Zero(m.rows(), m.cols()));
    s.coeffs[0] = m;
    return s;
}

MatrixSeries series_mul(const MatrixSeries& a, const MatrixSeries& b)
{
    const int order = std::min(a.order(), b.order());
    MatrixSeries out;
    out.coeffs.reserve(order + 1);
    for (int p = 0; p <= order; ++p) {
        ComplexMatrix c = ComplexMatrix::Zero(a.coeffs[0].rows(), b.coeffs[0].cols());
        for (int q = 0; q <= p; ++q) c.noalias() += a.coeffs[q] * b.coeffs[p - q];
        out.coeffs.push_back(std::move(c));
    }
    return out;
}

MatrixSeries series_invert(const MatrixSeries& a)
{
    if (a.coeffs.empty()) throw ValidationError("empty series");
    const ComplexMatrix& lead = a.coeffs[0];
    if (lead.rows() != lead.cols()) throw ValidationError("series inverse requires square coefficients");
    Eigen::PartialPivLU<ComplexMatrix> lu;
    try {
        SolveReport r;
        lu_solve(lead, ComplexMatrix::Identity(lead.rows(), lead.cols()), &r);
        lu.compute(lead);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("singular leading series coefficient: ") + e.what());
    }
    // C_0 = A_0^{-1}, C_p = -A_0^{-1} sum_{q=1..p} A_q C_{p-q}.
    MatrixSeries out;
    out.coeffs.push_back(lu.inverse());
    for (int p = 1; p <= a.order(); ++p) {
        ComplexMatrix acc = ComplexMatrix::Zero(lead.rows(), lead.cols());
        for (int q = 1; q <= p; ++q) acc.noalias() += a.coeffs[q] * out.coeffs[p - q];
        out.coeffs.push_back(-lu.solve(acc));
    }
    return out;
}

ScalarSeries series_trace(const MatrixSeries& a)
{
    ScalarSeries out;
    out.reserve(a.coeffs.size());
    for (const auto& c : a.coeffs) out.push_back(c.trace());
    return out;
}

MatrixSeries series_derivative(const MatrixSeries& a)
{
    MatrixSeries out;
    for (int p = 1; p <= a.order(); ++p) out.coeffs.push_back(static_cast<double>(p) * a.coeffs[p]);
    if (out.coeffs.empty()) out.coeffs.push_back(ComplexMatrix::Zero(a.coeffs[0].rows(), a.coeffs[0].cols()));
    return out;
}

} // namespace vesselkit
