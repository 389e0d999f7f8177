#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vesselkit/hierarchy.hpp"
#include "vesselkit/source.hpp"

namespace vesselkit {

struct GridSpec {
    double x0 = -5.0;
    double x1 = 5.0;
    int nx = 101;
    double t0 = 0.0;
    double t1 = 1.0;
    int nt = 21;

    /// Counts >= 2, or 1 with a degenerate interval; finite bounds.
    void validate() const;
    double x_at(int i) const;
    double t_at(int j) const;
    int size() const { return nx * nt; }

    /// "x0:x1:nx,t0:t1:nt".
    static GridSpec parse(const std::string& text);
    std::string to_string() const;
};

struct GridPoint {
    double x;
    double t;
};

/// t-major, then x.
std::vector<GridPoint> grid_points(const GridSpec& grid);

struct ResidualRow {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    double at_x = 0.0;
    double at_t = 0.0;
};

struct ResidualReport {
    std::vector<ResidualRow> rows;

    bool all_pass() const;
    const ResidualRow& row(const std::string& name) const;
    void append(const ResidualReport& other);
    /// Replaces every tolerance and recomputes pass flags.
    void override_tolerance(double tol);

    std::string to_text() const;
    nlohmann::json to_json() const;
};

enum class Variable { x, t };

/// h = 1e-2 for first and second derivatives, 2e-2 for third.
double default_fd_step(int order);

/// Fourth-order central stencil at h and h/2 combined by one Richardson
/// step. order in 0..3.
template <typename F>
auto fd_derivative(const F& sampler, double x, double t, Variable var, int order, double h) -> decltype(sampler(x, t))
{
    auto at = [&](double offset) { return var == Variable::x ? sampler(x + offset, t) : sampler(x, t + offset); };
    auto stencil = [&](double s) -> decltype(sampler(x, t)) {
        switch (order) {
        case 1:
            return (-at(2 * s) + 8.0 * at(s) - 8.0 * at(-s) + at(-2 * s)) / (12.0 * s);
        case 2:
            return (-at(2 * s) + 16.0 * at(s) - 30.0 * at(0.0) + 16.0 * at(-s) - at(-2 * s)) / (12.0 * s * s);
        case 3:
            return (-at(3 * s) + 8.0 * at(2 * s) - 13.0 * at(s) + 13.0 * at(-s) - 8.0 * at(-2 * s) + at(-3 * s)) /
                   (8.0 * s * s * s);
        default:
            return at(0.0);
        }
    };
    if (order == 0) return at(0.0);
    auto coarse = stencil(h);
    auto fine = stencil(h / 2);
    return (16.0 * fine - coarse) / 15.0;
}

using ScalarSampler = std::function<cplx(double, double)>;

/// Worker count from VESSELKIT_THREADS (default: hardware concurrency).
int thread_count();

/// Runs body(0..n-1) on up to thread_count() workers. If any call throws, the
/// exception from the lowest index is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& body);

/// |q_t + (3/2) q q_x - (1/4) q_xxx| with q = 2 beta'; t-derivative by finite
/// differences, x-derivatives from the beta jet.
ResidualReport residual_kdv(const VesselSource& source, const GridSpec& grid, double tol = 1e-6);

/// |beta_t - eps_m b_m(jet)| for a hierarchy source of type n = m + 1.
ResidualReport residual_hierarchy_flow(const VesselSource& source, const FlowConvention& conv, const GridSpec& grid,
                                       double tol = 1e-6);

struct PinningResult {
    int level = 0;
    std::vector<std::pair<Phase, double>> residuals;
    std::vector<Phase> passing;

    bool unique() const { return passing.size() == 1; }
};

/// Runs the level-m flow residual with each of the four candidate phases.
PinningResult pin_flow_phase(const VesselSource& source, int level, RecursionRule rule, const GridSpec& grid,
                             double tol = 1e-6);

/// The single passing phase; throws Error when none or several pass.
Phase require_unique(const PinningResult& result);

struct InvariantOptions {
    int lambda_samples = 20;
    unsigned seed = 1729;
    int moment_max = 3;
    int convolution_max = 4;
    int kmoment_max = 4;
    int backlund_samples = 5;
};

/// Deterministic pseudo-random spectral parameters at distance >= 0.25 from
/// the spectrum of A.
std::vector<cplx> sample_lambdas(const ComplexMatrix& A, int count, unsigned seed);

/// ||K_n^* - phase K_n||.
double kmoment_symmetry_residual(const VesselState& state, int n, cplx phase);

ResidualReport suite_vessel_invariants(const VesselSource& source, const GridSpec& grid,
                                       const InvariantOptions& options = {});

/// Requires a hierarchy source. Type 1 adds the matrix-form KdV identities.
ResidualReport suite_evolution_identities(const VesselSource& source, const GridSpec& grid,
                                          const std::vector<cplx>& lambdas);

enum class Truncation {
    /// sum_{j=0}^{n-1} lambda^{n-1-j} K_j
    ends_at_previous,
    /// sum_{j=1}^{n} lambda^{n-j} K_j
    ends_at_current,
};

std::string to_string(Truncation t);

/// Truncation used by the library's S-evolution row.
constexpr Truncation kFrozenTruncation = Truncation::ends_at_previous;

struct TruncationProbe {
    std::vector<std::pair<Truncation, double>> residuals;
    std::vector<Truncation> passing;

    bool unique() const { return passing.size() == 1; }
};

/// Max over the grid and lambdas of
/// |S_t - (i lambda)^n S_x - i^n [bracket] sigma1 S| for each truncation.
TruncationProbe probe_s_truncation(const VesselSource& source, const GridSpec& grid, const std::vector<cplx>& lambdas,
                                   double tol = 1e-6);

} // namespace vesselkit
