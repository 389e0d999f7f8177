#include "vesselkit/vessel.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "vesselkit/errors.hpp"

namespace vesselkit {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kRelTol = 1e-12;
constexpr double kSimpsonTol = 1e-10;
constexpr int kSimpsonMaxLevel = 20;

ComplexMatrix mat2(cplx a, cplx b, cplx c, cplx d)
{
    ComplexMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

bool is_diagonal(const ComplexMatrix& A)
{
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (i != j && A(i, j) != cplx(0.0)) return false;
    return true;
}

ComplexMatrix sigma1_inverse(const VesselParams& p) { return lu_solve(p.sigma1, ComplexMatrix::Identity(2, 2)); }

cplx ipow(int n)
{
    static const cplx table[4] = {1.0, kI, -1.0, -kI};
    return table[((n % 4) + 4) % 4];
}

// y' = F(y) for a pair of matrices, classical RK4 with step doubling and one
// Richardson correction per accepted step.
using Pair = std::pair<ComplexMatrix, ComplexMatrix>;
using PairRhs = std::function<Pair(const Pair&)>;

Pair axpy(const Pair& y, double h, const Pair& k)
{
    return {y.first + h * k.first, y.second + h * k.second};
}

Pair rk4_step(const PairRhs& f, const Pair& y, double h)
{
    Pair k1 = f(y);
    Pair k2 = f(axpy(y, h / 2, k1));
    Pair k3 = f(axpy(y, h / 2, k2));
    Pair k4 = f(axpy(y, h, k3));
    return {y.first + h / 6 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first),
            y.second + h / 6 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second)};
}

double pair_norm(const Pair& y) { return std::sqrt(y.first.squaredNorm() + y.second.squaredNorm()); }

Pair integrate_adaptive(const PairRhs& f, Pair y, double span)
{
    if (span == 0.0) return y;
    const double dir = span > 0 ? 1.0 : -1.0;
    const double total = std::abs(span);
    const double floor = total * 1e-12;
    double done = 0.0;
    double h = total;
    while (done < total) {
        h = std::min(h, total - done);
        Pair full = rk4_step(f, y, dir * h);
        Pair half = rk4_step(f, rk4_step(f, y, dir * h / 2), dir * h / 2);
        Pair diff{half.first - full.first, half.second - full.second};
        const double err = pair_norm(diff) / 15.0;
        const double scale = std::max(1.0, pair_norm(half));
        if (!std::isfinite(err)) throw StepSizeError("non-finite local error estimate");
        if (err <= kRelTol * scale) {
            y = {half.first + diff.first / 15.0, half.second + diff.second / 15.0};
            done += h;
            const double grow = err > 0 ? 0.9 * std::pow(kRelTol * scale / err, 0.2) : 2.0;
            h *= std::clamp(grow, 1.0, 2.0);
        } else {
            h *= std::clamp(0.9 * std::pow(kRelTol * scale / err, 0.2), 0.1, 0.5);
            if (h < floor)
                throw StepSizeError("step size fell below " + std::to_string(floor) + " with local error " +
                                    std::to_string(err));
        }
    }
    return y;
}

void check_order(int n, int cap, const char* what)
{
    if (n < 0) throw ValidationError(std::string(what) + " order must be non-negative");
    if (n > cap)
        throw ResourceError(std::string(what) + " order " + std::to_string(n) + " exceeds supported maximum " +
                            std::to_string(cap));
}

double factorial(int j)
{
    double f = 1.0;
    for (int i = 2; i <= j; ++i) f *= i;
    return f;
}

} // namespace

VesselParams VesselParams::defaults()
{
    return {mat2(0.0, 1.0, 1.0, 0.0), mat2(1.0, 0.0, 0.0, 0.0), mat2(0.0, 0.0, 0.0, kI)};
}

void VesselParams::validate() const
{
    for (const auto* m : {&sigma1, &sigma2, &gamma})
        if (m->rows() != 2 || m->cols() != 2) throw ValidationError("vessel parameters must be 2x2");
    require_finite(sigma1, "sigma1");
    require_finite(sigma2, "sigma2");
    require_finite(gamma, "gamma");
    if ((sigma1 - sigma1.adjoint()).norm() > 1e-14) throw ValidationError("sigma1 must be self-adjoint");
    if ((sigma2 - sigma2.adjoint()).norm() > 1e-14) throw ValidationError("sigma2 must be self-adjoint");
    if ((gamma + gamma.adjoint()).norm() > 1e-14) throw ValidationError("gamma must be anti-self-adjoint");
    if (std::abs(det_lu(sigma1)) < 1e-14) throw ValidationError("sigma1 must be invertible");
}

GeneralEvolution EvolutionSpec::to_general(const VesselParams& params) const
{
    if (const auto* h = std::get_if<HierarchyEvolution>(&kind)) {
        if (h->n < 1) throw ValidationError("hierarchy type must be at least 1");
        GeneralEvolution g;
        g.m.assign(h->n + 1, ComplexMatrix::Zero(2, 2));
        g.m[h->n] = -ipow(h->n) * params.sigma2;
        g.m[h->n - 1] = -ipow(h->n) * params.gamma;
        return g;
    }
    if (const auto* z = std::get_if<Type0Evolution>(&kind)) {
        return GeneralEvolution{{z->m * params.sigma2 + z->m12 * params.sigma1}};
    }
    return std::get<GeneralEvolution>(kind);
}

void EvolutionSpec::validate(const VesselParams& params) const
{
    if (const auto* h = std::get_if<HierarchyEvolution>(&kind)) {
        if (h->n < 1 || h->n > 10) throw ValidationError("hierarchy type must be in 1..10");
        return;
    }
    if (const auto* z = std::get_if<Type0Evolution>(&kind)) {
        if (!std::isfinite(z->m) || !std::isfinite(z->m12)) throw ValidationError("type-0 coefficients must be finite");
        return;
    }
    const auto& g = std::get<GeneralEvolution>(kind);
    for (std::size_t i = 0; i < g.m.size(); ++i) {
        const auto& m = g.m[i];
        if (m.rows() != 2 || m.cols() != 2) throw ValidationError("evolution coefficients must be 2x2");
        require_finite(m, "evolution coefficient");
        const double sign = i % 2 ? -1.0 : 1.0;
        const double defect = (m.adjoint() - sign * m).norm();
        if (defect > 1e-12 * std::max(1.0, m.norm())) {
            std::ostringstream os;
            os << "coefficient m_" << i << " violates m^* = " << (i % 2 ? "-m" : "m") << " (defect " << defect << ")";
            throw InvalidCoefficientsError(os.str());
        }
    }
    (void)params;
}

std::optional<int> EvolutionSpec::hierarchy_type() const
{
    if (const auto* h = std::get_if<HierarchyEvolution>(&kind)) return h->n;
    return std::nullopt;
}

std::string EvolutionSpec::describe() const
{
    std::ostringstream os;
    if (const auto* h = std::get_if<HierarchyEvolution>(&kind)) {
        os << "hierarchy(n=" << h->n << ")";
    } else if (const auto* z = std::get_if<Type0Evolution>(&kind)) {
        os << "type0(m=" << z->m << ", m12=" << z->m12 << ")";
    } else {
        os << "general(" << std::get<GeneralEvolution>(kind).m.size() << " coefficients)";
    }
    return os.str();
}

void SolitonSpec::validate() const
{
    if (n < 1) throw ValidationError("soliton type n must be at least 1");
    if (modes.empty()) throw ValidationError("soliton needs at least one mode");
    if (static_cast<int>(modes.size()) > kMaxDimension)
        throw ValidationError("at most " + std::to_string(kMaxDimension) + " modes are supported");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto& md = modes[i];
        if (!std::isfinite(md.k) || md.k <= 0) throw ValidationError("mode k must be positive and finite");
        if (!std::isfinite(md.b.real()) || !std::isfinite(md.b.imag()) || md.b == cplx(0.0))
            throw ValidationError("mode b must be nonzero and finite");
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(md.k - modes[j].k) <= kModeSeparation)
                throw ConditioningError("modes " + std::to_string(j) + " and " + std::to_string(i) +
                                        " have coincident k");
    }
}

double SolitonSpec::time_rate() const
{
    double rate = 1.0;
    for (const auto& md : modes) rate = std::max(rate, std::pow(md.k, 2 * n));
    return rate;
}

ComplexMatrix vessel_solve(const ComplexMatrix& X, const ComplexMatrix& rhs)
{
    SolveReport report;
    ComplexMatrix sol = solve_equilibrated(X, rhs, &report);
    if (report.ill_conditioned)
        throw ConditioningError("X is ill-conditioned (condition estimate " +
                                std::to_string(report.condition_estimate) + ")");
    return sol;
}

VesselState soliton_vessel(const SolitonSpec& spec, double x, double t)
{
    spec.validate();
    const int N = static_cast<int>(spec.modes.size());
    VesselState s;
    s.dim = N;
    s.x = x;
    s.t = t;
    s.A = ComplexMatrix::Zero(N, N);
    s.B = ComplexMatrix(N, 2);
    auto fill_X = [&](double xx, double tt) {
        std::vector<double> theta(N);
        for (int j = 0; j < N; ++j) {
            const double k = spec.modes[j].k;
            theta[j] = k * xx + std::pow(k, 2 * spec.n + 1) * tt;
        }
        ComplexMatrix X = ComplexMatrix::Identity(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                X(i, j) += std::exp(theta[i] + theta[j]) / (spec.modes[i].k + spec.modes[j].k) * spec.modes[i].b *
                           std::conj(spec.modes[j].b);
        return std::make_pair(X, theta);
    };
    auto [X, theta] = fill_X(x, t);
    for (int j = 0; j < N; ++j) {
        const double k = spec.modes[j].k;
        s.A(j, j) = -kI * k * k;
        const cplx row = std::exp(theta[j]) * spec.modes[j].b;
        s.B(j, 0) = row;
        s.B(j, 1) = row * kI * k;
    }
    s.X = X;
    s.X0 = fill_X(0.0, 0.0).first;
    require_finite(s.B, "B");
    require_finite(s.X, "X");
    return s;
}

VesselState zero_vessel(double x, double t)
{
    VesselState s;
    s.dim = 1;
    s.A = ComplexMatrix::Constant(1, 1, -kI);
    s.B = ComplexMatrix::Zero(1, 2);
    s.X = ComplexMatrix::Identity(1, 1);
    s.X0 = s.X;
    s.x = x;
    s.t = t;
    return s;
}

ComplexMatrix dB_dx(const ComplexMatrix& A, const ComplexMatrix& B, const VesselParams& params)
{
    return -(A * B * params.sigma2 + B * params.gamma) * sigma1_inverse(params);
}

ComplexMatrix dB_dt(const ComplexMatrix& A, const ComplexMatrix& B, const GeneralEvolution& evo,
                    const VesselParams& params)
{
    ComplexMatrix acc = ComplexMatrix::Zero(B.rows(), 2);
    ComplexMatrix AiB = B;
    for (const auto& m : evo.m) {
        acc += AiB * m;
        AiB = A * AiB;
    }
    return A * acc * sigma1_inverse(params);
}

ComplexMatrix dX_dt(const ComplexMatrix& A, const ComplexMatrix& B, const GeneralEvolution& evo)
{
    const Eigen::Index N = A.rows();
    ComplexMatrix out = ComplexMatrix::Zero(N, N);
    const ComplexMatrix Astar = A.adjoint();
    for (std::size_t i = 0; i < evo.m.size(); ++i) {
        if (evo.m[i].isZero(0.0)) continue;
        const ComplexMatrix core = B * evo.m[i] * B.adjoint();
        // Y_i = sum_{j<=i} (-1)^j A^{i-j} core (A^*)^j
        std::vector<ComplexMatrix> left(i + 1);
        left[0] = ComplexMatrix::Identity(N, N);
        for (std::size_t p = 1; p <= i; ++p) left[p] = A * left[p - 1];
        ComplexMatrix right = ComplexMatrix::Identity(N, N);
        for (std::size_t j = 0; j <= i; ++j) {
            const double sign = j % 2 ? -1.0 : 1.0;
            out -= sign * left[i - j] * core * right;
            right = right * Astar;
        }
    }
    return out;
}

ComplexMatrix propagate_B(const VesselState& state, double dx, double dt, const EvolutionSpec& evo)
{
    evo.validate(state.params);
    const GeneralEvolution g = evo.to_general(state.params);
    const ComplexMatrix s1inv = sigma1_inverse(state.params);
    ComplexMatrix B = state.B;
    if (is_diagonal(state.A)) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            const cplx a = state.A(j, j);
            Eigen::RowVector2cd row = B.row(j);
            if (dx != 0.0) {
                ComplexMatrix Mx = -(a * state.params.sigma2 + state.params.gamma) * s1inv;
                row = row * mat2_exp(Mx, dx);
            }
            if (dt != 0.0) {
                ComplexMatrix acc = ComplexMatrix::Zero(2, 2);
                cplx ai = 1.0;
                for (const auto& m : g.m) {
                    acc += ai * m;
                    ai *= a;
                }
                ComplexMatrix Mt = a * acc * s1inv;
                row = row * mat2_exp(Mt, dt);
            }
            B.row(j) = row;
        }
        return B;
    }
    const ComplexMatrix A = state.A;
    const VesselParams params = state.params;
    const ComplexMatrix dummy = ComplexMatrix::Zero(1, 1);
    if (dx != 0.0) {
        PairRhs fx = [&](const Pair& y) { return Pair{dB_dx(A, y.first, params), dummy}; };
        B = integrate_adaptive(fx, {B, dummy}, dx).first;
    }
    if (dt != 0.0) {
        PairRhs ft = [&](const Pair& y) { return Pair{dB_dt(A, y.first, g, params), dummy}; };
        B = integrate_adaptive(ft, {B, dummy}, dt).first;
    }
    return B;
}

ComplexMatrix simpson(const std::function<ComplexMatrix(double)>& f, double a, double b)
{
    ComplexMatrix fa = f(a);
    if (a == b) return ComplexMatrix::Zero(fa.rows(), fa.cols());
    ComplexMatrix fb = f(b);
    int n = 16;
    double h = (b - a) / n;
    ComplexMatrix ends = fa + fb;
    ComplexMatrix odd = ComplexMatrix::Zero(fa.rows(), fa.cols());
    ComplexMatrix even = ComplexMatrix::Zero(fa.rows(), fa.cols());
    for (int i = 1; i < n; ++i) (i % 2 ? odd : even) += f(a + i * h);
    ComplexMatrix prev = h / 3 * (ends + 4.0 * odd + 2.0 * even);
    for (int level = 0; level < kSimpsonMaxLevel; ++level) {
        even += odd;
        odd.setZero();
        n *= 2;
        h /= 2;
        for (int i = 1; i < n; i += 2) odd += f(a + i * h);
        ComplexMatrix cur = h / 3 * (ends + 4.0 * odd + 2.0 * even);
        const double diff = (cur - prev).norm();
        if (diff < kSimpsonTol * std::max(1.0, cur.norm())) return cur;
        prev = std::move(cur);
    }
    throw QuadratureError("Simpson quadrature did not converge after " + std::to_string(n) + " intervals");
}

ComplexMatrix assemble_X(const ComplexMatrix& A, const BPath& path, const ComplexMatrix& X0, const EvolutionSpec& evo,
                         double x, double t, const VesselParams& params)
{
    evo.validate(params);
    const GeneralEvolution g = evo.to_general(params);
    ComplexMatrix X = X0;
    if (t != 0.0) X += simpson([&](double s) { return dX_dt(A, path(0.0, s), g); }, 0.0, t);
    if (x != 0.0) {
        X += simpson(
            [&](double y) {
                ComplexMatrix B = path(y, t);
                return ComplexMatrix(B * params.sigma2 * B.adjoint());
            },
            0.0, x);
    }
    return X;
}

VesselState evolve_general_step(const VesselState& state, const EvolutionSpec& evo, double dt)
{
    evo.validate(state.params);
    const GeneralEvolution g = evo.to_general(state.params);
    VesselState out = state;
    out.t = state.t + dt;
    if (dt == 0.0) return out;
    const ComplexMatrix A = state.A;
    const VesselParams params = state.params;
    PairRhs f = [&](const Pair& y) { return Pair{dB_dt(A, y.first, g, params), dX_dt(A, y.first, g)}; };
    Pair y = integrate_adaptive(f, {state.B, state.X}, dt);
    out.B = std::move(y.first);
    out.X = std::move(y.second);
    require_finite(out.B, "B");
    require_finite(out.X, "X");
    return out;
}

ScalarFields scalar_fields(const VesselState& state)
{
    const Eigen::VectorXd s = equilibration(state.X);
    const Eigen::VectorXd s0 = equilibration(state.X0);
    SolveReport r0, r1;
    ComplexMatrix scaled = s.asDiagonal() * state.X * s.asDiagonal();
    ComplexMatrix scaled0 = s0.asDiagonal() * state.X0 * s0.asDiagonal();
    // Run the guarded factorizations; determinants use the same scaled matrices.
    lu_solve(scaled0, ComplexMatrix::Identity(state.dim, state.dim), &r0);
    lu_solve(scaled, ComplexMatrix::Identity(state.dim, state.dim), &r1);
    if (r0.ill_conditioned || r1.ill_conditioned) throw ConditioningError("X or X0 is ill-conditioned");
    cplx tau = det_lu(scaled) / det_lu(scaled0);
    for (int i = 0; i < state.dim; ++i) tau *= (s0(i) * s0(i)) / (s(i) * s(i));
    const ComplexMatrix H0 = state.B.adjoint() * vessel_solve(state.X, state.B);
    return {tau, -(state.params.sigma2 * H0).trace()};
}

cplx beta_dt(const VesselState& state, const EvolutionSpec& evo)
{
    const GeneralEvolution g = evo.to_general(state.params);
    const ComplexMatrix Bt = dB_dt(state.A, state.B, g, state.params);
    const ComplexMatrix Xt = dX_dt(state.A, state.B, g);
    const ComplexMatrix XiB = vessel_solve(state.X, state.B);
    const ComplexMatrix Ht = Bt.adjoint() * XiB + XiB.adjoint() * Bt - XiB.adjoint() * Xt * XiB;
    return -(state.params.sigma2 * Ht).trace();
}

BetaJet beta_jet(const VesselState& state, int J)
{
    check_order(J, kMaxJetOrder, "jet");
    const int order = J + 1;
    std::vector<ComplexMatrix> Bs{state.B};
    for (int p = 0; p < order; ++p) Bs.push_back(dB_dx(state.A, Bs.back(), state.params) / double(p + 1));
    const Eigen::VectorXd s = equilibration(state.X);
    MatrixSeries Xs;
    Xs.coeffs.push_back(s.asDiagonal() * state.X * s.asDiagonal());
    for (int p = 0; p < order; ++p) {
        ComplexMatrix acc = ComplexMatrix::Zero(state.dim, state.dim);
        for (int a = 0; a <= p; ++a) acc += Bs[a] * state.params.sigma2 * Bs[p - a].adjoint();
        Xs.coeffs.push_back(s.asDiagonal() * acc * s.asDiagonal() / double(p + 1));
    }
    SolveReport report;
    lu_solve(Xs.coeffs[0], ComplexMatrix::Identity(state.dim, state.dim), &report);
    if (report.ill_conditioned) throw ConditioningError("X is ill-conditioned");
    // d/dh log det X(x+h) = tau'/tau (x+h) = -beta(x+h)
    ScalarSeries logd = series_trace(series_mul(series_invert(Xs), series_derivative(Xs)));
    BetaJet jet;
    for (int j = 0; j <= J; ++j) jet[j] = -factorial(j) * logd[j];
    return jet;
}

ComplexMatrix moment(const VesselState& state, int n)
{
    check_order(n, kMaxMomentOrder + 1, "moment");
    ComplexMatrix AnB = state.B;
    for (int i = 0; i < n; ++i) AnB = state.A * AnB;
    return state.B.adjoint() * vessel_solve(state.X, AnB);
}

ComplexMatrix dmoment_dx(const VesselState& state, int n, const BetaJet& jet)
{
    check_order(n, kMaxMomentOrder, "moment");
    const cplx b = jet.at(0), b1 = jet.at(1);
    const ComplexMatrix Hn = moment(state, n);
    const ComplexMatrix Hn1 = moment(state, n + 1);
    const ComplexMatrix E21 = mat2(0.0, 0.0, 1.0, 0.0);
    const ComplexMatrix E12 = mat2(0.0, 1.0, 0.0, 0.0);
    const ComplexMatrix M = mat2(b, kI, -kI * (b1 - b * b), -b);
    const ComplexMatrix N = mat2(0.0, 0.0, kI, 0.0);
    return E21 * Hn1 - Hn1 * E12 + M * Hn - Hn * N;
}

ComplexMatrix dmoment_dx(const VesselState& state, int n) { return dmoment_dx(state, n, beta_jet(state, 1)); }

ComplexMatrix d2moment0_dx2(const VesselState& state, const BetaJet& jet)
{
    const cplx b = jet.at(0), b1 = jet.at(1), b2 = jet.at(2);
    const ComplexMatrix H0 = moment(state, 0);
    const ComplexMatrix dH0 = dmoment_dx(state, 0, jet);
    const ComplexMatrix dH1 = dmoment_dx(state, 1, jet);
    const ComplexMatrix E21 = mat2(0.0, 0.0, 1.0, 0.0);
    const ComplexMatrix E12 = mat2(0.0, 1.0, 0.0, 0.0);
    const ComplexMatrix M = mat2(b, kI, -kI * (b1 - b * b), -b);
    const ComplexMatrix dM = mat2(b1, 0.0, -kI * (b2 - 2.0 * b * b1), -b1);
    const ComplexMatrix N = mat2(0.0, 0.0, kI, 0.0);
    return E21 * dH1 - dH1 * E12 + dM * H0 + M * dH0 - dH0 * N;
}

ComplexMatrix gamma_star(const VesselState& state, GammaMethod method)
{
    if (method == GammaMethod::linkage) {
        const ComplexMatrix H0 = moment(state, 0);
        const auto& p = state.params;
        return p.gamma + p.sigma2 * H0 * p.sigma1 - p.sigma1 * H0 * p.sigma2;
    }
    const BetaJet jet = beta_jet(state, 1);
    const cplx b = jet.at(0), b1 = jet.at(1);
    return mat2(-kI * (b1 - b * b), -b, b, kI);
}

std::vector<cplx> spectrum(const ComplexMatrix& A)
{
    std::vector<cplx> out;
    if (is_diagonal(A)) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) out.push_back(A(i, i));
        return out;
    }
    Eigen::ComplexEigenSolver<ComplexMatrix> es(A, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

ComplexMatrix transfer_at(const VesselState& state, cplx lambda)
{
    for (cplx mu : spectrum(state.A)) {
        if (std::abs(lambda - mu) <= kSpectrumGuard) {
            std::ostringstream os;
            os << "lambda " << lambda << " lies within " << kSpectrumGuard << " of the eigenvalue " << mu;
            throw SpectrumError(os.str());
        }
    }
    const Eigen::Index N = state.A.rows();
    ComplexMatrix resolvent_B = lu_solve(lambda * ComplexMatrix::Identity(N, N) - state.A, state.B);
    return ComplexMatrix::Identity(2, 2) -
           state.B.adjoint() * vessel_solve(state.X, resolvent_B) * state.params.sigma1;
}

ComplexMatrix transfer_dx(const VesselState& state, cplx lambda)
{
    const auto& p = state.params;
    const ComplexMatrix s1inv = sigma1_inverse(p);
    const ComplexMatrix S = transfer_at(state, lambda);
    const ComplexMatrix gs = gamma_star(state, GammaMethod::linkage);
    return s1inv * (p.sigma2 * lambda + gs) * S - S * s1inv * (p.sigma2 * lambda + p.gamma);
}

std::vector<ComplexMatrix> kmoments(const VesselState& state, int n)
{
    check_order(n, kMaxMomentOrder, "K-moment");
    const BetaJet jet = beta_jet(state, 1);
    std::vector<ComplexMatrix> H, K;
    for (int i = 0; i < n; ++i) H.push_back(moment(state, i));
    for (int j = 0; j <= n; ++j) {
        ComplexMatrix k = dmoment_dx(state, j, jet);
        for (int i = 0; i < j; ++i) k += K[i] * state.params.sigma1 * H[j - 1 - i];
        K.push_back(std::move(k));
    }
    return K;
}

ComplexMatrix kmoment(const VesselState& state, int n) { return kmoments(state, n).back(); }

cplx type0_closed_beta(cplx beta0, double m, double t)
{
    const cplx denom = 1.0 + m * t * beta0;
    if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(m * t * beta0))) {
        std::ostringstream os;
        os << "type-0 solution has a pole at t = " << t << " (1 + m t beta0 = " << denom << ")";
        throw PoleError(os.str());
    }
    return beta0 / denom;
}

Eigen::Vector2cd input_lde_solution(const VesselParams& params, cplx lambda, double x, const Eigen::Vector2cd& u0)
{
    const ComplexMatrix M = sigma1_inverse(params) * (params.sigma2 * lambda + params.gamma);
    return mat2_exp(M, x) * u0;
}

double lyapunov_residual(const VesselState& state)
{
    const ComplexMatrix r = state.A * state.X + state.X * state.A.adjoint() +
                            state.B * state.params.sigma1 * state.B.adjoint();
    const double scale = state.A.norm() * state.X.norm() + state.B.squaredNorm();
    return r.norm() / (scale > 0 ? scale : 1.0);
}

double self_adjoint_residual(const VesselState& state)
{
    const double scale = state.X.norm();
    return (state.X - state.X.adjoint()).norm() / (scale > 0 ? scale : 1.0);
}

} // namespace vesselkit
