#pragma once

// Finite-dimensional KdV vessels: the triple (A, B, X) with
//
//   B'_x = -(A B sigma2 + B gamma) sigma1^{-1},   X'_x = B sigma2 B^*,
//   A X + X A^* + B sigma1 B^* = 0,
//
// and t-evolution B'_t sigma1 = A sum_i A^i B m_i, X'_t = -sum_i Y_i.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vesselkit/diffpoly.hpp"
#include "vesselkit/linalg.hpp"

namespace vesselkit {

constexpr int kMaxDimension = 16;
constexpr int kMaxMomentOrder = 12;
constexpr int kMaxJetOrder = 12;
constexpr double kModeSeparation = 1e-9;
constexpr double kSpectrumGuard = 1e-9;

struct VesselParams {
    ComplexMatrix sigma1;
    ComplexMatrix sigma2;
    ComplexMatrix gamma;

    /// sigma1 = [[0,1],[1,0]], sigma2 = diag(1,0), gamma = diag(0,i).
    static VesselParams defaults();
    /// Self-adjoint sigma1/sigma2, anti-self-adjoint gamma, invertible sigma1.
    void validate() const;
};

struct VesselState {
    int dim = 0;
    ComplexMatrix A;
    ComplexMatrix B;
    ComplexMatrix X;
    ComplexMatrix X0;
    VesselParams params = VesselParams::defaults();
    double x = 0.0;
    double t = 0.0;
};

/// B'_t = (iA)^n B'_x.
struct HierarchyEvolution {
    int n = 1;
};

/// m_0 = m sigma2 + m12 sigma1.
struct Type0Evolution {
    double m = 0.0;
    double m12 = 0.0;
};

/// Coefficients m_0..m_n, each 2x2.
struct GeneralEvolution {
    std::vector<ComplexMatrix> m;
};

struct EvolutionSpec {
    std::variant<HierarchyEvolution, Type0Evolution, GeneralEvolution> kind;

    /// Coefficient list equivalent to this spec.
    GeneralEvolution to_general(const VesselParams& params = VesselParams::defaults()) const;
    /// Throws InvalidCoefficientsError unless m_i^* = (-1)^i m_i.
    void validate(const VesselParams& params = VesselParams::defaults()) const;
    /// Hierarchy type n, if this is a hierarchy evolution.
    std::optional<int> hierarchy_type() const;
    std::string describe() const;
};

struct SolitonMode {
    double k = 1.0;
    cplx b = 1.0;
};

struct SolitonSpec {
    int n = 1;
    std::vector<SolitonMode> modes;

    /// n >= 1, 1 <= N <= 16, k > 0, b != 0, k pairwise separated by more than 1e-9.
    void validate() const;
    /// max_j k_j^{2n}: ratio of t- to x-rates of the phases.
    double time_rate() const;
};

/// Throws SingularMatrixError when X is singular, ConditioningError when the
/// equilibrated condition estimate exceeds kConditionCap.
ComplexMatrix vessel_solve(const ComplexMatrix& X, const ComplexMatrix& rhs);

/// A = diag(-i k_j^2), B_j = e^{k_j x + k_j^{2n+1} t} b_j [1, i k_j],
/// X = I + [e^{...}/(k_i + k_j) b_i conj(b_j)], X0 = X(0,0).
VesselState soliton_vessel(const SolitonSpec& spec, double x, double t);

/// dim 1, A = -i, B = 0, X = X0 = 1.
VesselState zero_vessel(double x = 0.0, double t = 0.0);

/// B at (x + dx, t + dt): x-leg first, then t-leg. Diagonal A uses the closed
/// per-row exponential; otherwise adaptive RK4 with step doubling.
ComplexMatrix propagate_B(const VesselState& state, double dx, double dt, const EvolutionSpec& evo);

/// Right-hand sides of the two vessel ODEs for B.
ComplexMatrix dB_dx(const ComplexMatrix& A, const ComplexMatrix& B, const VesselParams& params);
ComplexMatrix dB_dt(const ComplexMatrix& A, const ComplexMatrix& B, const GeneralEvolution& evo,
                    const VesselParams& params);
/// X'_t = -sum_i Y_i.
ComplexMatrix dX_dt(const ComplexMatrix& A, const ComplexMatrix& B, const GeneralEvolution& evo);

/// B along the integration paths, as a function of (x, t).
using BPath = std::function<ComplexMatrix(double x, double t)>;

/// X(x,t) = X0 + int_0^t X'_t(B(0,s)) ds + int_0^x B(y,t) sigma2 B(y,t)^* dy by
/// composite Simpson with interval halving until successive estimates differ
/// by less than 1e-10 relative. Throws QuadratureError past the refinement cap.
ComplexMatrix assemble_X(const ComplexMatrix& A, const BPath& path, const ComplexMatrix& X0,
                         const EvolutionSpec& evo, double x, double t,
                         const VesselParams& params = VesselParams::defaults());

/// Composite Simpson on [a, b] with halving; relative tolerance 1e-10.
ComplexMatrix simpson(const std::function<ComplexMatrix(double)>& f, double a, double b);

/// One step of length dt of the general evolution for (B, X); adaptive RK4.
VesselState evolve_general_step(const VesselState& state, const EvolutionSpec& evo, double dt);

struct ScalarFields {
    cplx tau;
    cplx beta;
};

/// tau = det(X0^{-1} X), beta = -tr(sigma2 B^* X^{-1} B).
ScalarFields scalar_fields(const VesselState& state);

/// beta'_t by the chain rule through B'_t and X'_t of the evolution.
cplx beta_dt(const VesselState& state, const EvolutionSpec& evo);

/// beta^(j) for j = 0..J from the exact x-Taylor expansion of (B, X).
BetaJet beta_jet(const VesselState& state, int J);

/// H_n = B^* X^{-1} A^n B.
ComplexMatrix moment(const VesselState& state, int n);

/// Algebraic x-derivative of H_n from H_n, H_{n+1}, beta and beta'.
ComplexMatrix dmoment_dx(const VesselState& state, int n);
ComplexMatrix dmoment_dx(const VesselState& state, int n, const BetaJet& jet);

/// Second x-derivative of H_0, algebraically (needs beta up to beta'').
ComplexMatrix d2moment0_dx2(const VesselState& state, const BetaJet& jet);

enum class GammaMethod { linkage, tau };

ComplexMatrix gamma_star(const VesselState& state, GammaMethod method);

/// S(lambda) = I - B^* X^{-1} (lambda - A)^{-1} B sigma1. Throws SpectrumError
/// within kSpectrumGuard of an eigenvalue of A.
ComplexMatrix transfer_at(const VesselState& state, cplx lambda);

/// S'_x from the transfer ODE, using gamma_star by linkage.
ComplexMatrix transfer_dx(const VesselState& state, cplx lambda);

/// K_0 = H_0', K_n = H_n' + sum_{i<n} K_i sigma1 H_{n-1-i}.
ComplexMatrix kmoment(const VesselState& state, int n);
/// K_0..K_n in one pass.
std::vector<ComplexMatrix> kmoments(const VesselState& state, int n);

/// beta0 / (1 + m t beta0). Throws PoleError when the denominator vanishes.
cplx type0_closed_beta(cplx beta0, double m, double t);

/// exp(x sigma1^{-1}(sigma2 lambda + gamma)) u0.
Eigen::Vector2cd input_lde_solution(const VesselParams& params, cplx lambda, double x, const Eigen::Vector2cd& u0);

/// ||A X + X A^* + B sigma1 B^*||_F / (||A|| ||X|| + ||B||^2).
double lyapunov_residual(const VesselState& state);
/// ||X - X^*||_F / ||X||_F.
double self_adjoint_residual(const VesselState& state);

/// Eigenvalues of A.
std::vector<cplx> spectrum(const ComplexMatrix& A);

} // namespace vesselkit
