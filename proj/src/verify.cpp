#include "vesselkit/verify.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "vesselkit/errors.hpp"

namespace vesselkit {

namespace {

constexpr cplx kI{0.0, 1.0};

struct RowDef {
    std::string name;
    double tol;
};

using PointFn = std::function<std::vector<double>(double x, double t)>;

ResidualReport run_grid(const std::vector<RowDef>& defs, const GridSpec& grid, const PointFn& fn)
{
    grid.validate();
    const auto pts = grid_points(grid);
    std::vector<std::vector<double>> values(pts.size());
    parallel_for(static_cast<int>(pts.size()), [&](int i) {
        values[i] = fn(pts[i].x, pts[i].t);
        if (values[i].size() != defs.size()) throw Error("internal: residual count mismatch");
    });

    ResidualReport report;
    for (std::size_t r = 0; r < defs.size(); ++r) {
        ResidualRow row;
        row.name = defs[r].name;
        row.tolerance = defs[r].tol;
        row.max_residual = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double v = values[i][r];
            if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
            if (v > row.max_residual) {
                row.max_residual = v;
                row.at_x = pts[i].x;
                row.at_t = pts[i].t;
            }
        }
        row.pass = row.max_residual <= row.tolerance;
        report.rows.push_back(row);
    }
    return report;
}

double max_abs_entry(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double t_step(const VesselSource& source, int order) { return default_fd_step(order) / source.time_rate(); }

ComplexMatrix mpow(const ComplexMatrix& m, int n)
{
    ComplexMatrix out = ComplexMatrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < n; ++i) out = out * m;
    return out;
}

cplx ipow(int n)
{
    static const cplx table[4] = {1.0, kI, -1.0, -kI};
    return table[((n % 4) + 4) % 4];
}

int require_hierarchy(const VesselSource& source)
{
    auto n = source.evolution().hierarchy_type();
    if (!n) throw ValidationError("this check needs a hierarchy evolution, got " + source.evolution().describe());
    return *n;
}

ComplexMatrix sigma1_inv(const VesselParams& p) { return lu_solve(p.sigma1, ComplexMatrix::Identity(2, 2)); }

// beta_t by finite differences and b_m on the jet, per grid point.
std::pair<cplx, cplx> flow_sides(const VesselSource& source, const DiffPoly& rhs, int jet_order, double x, double t)
{
    ScalarSampler beta = [&](double xx, double tt) { return scalar_fields(source.state_at(xx, tt)).beta; };
    const cplx beta_t = fd_derivative(beta, x, t, Variable::t, 1, t_step(source, 1));
    const cplx value = evaluate(rhs, beta_jet(source.state_at(x, t), jet_order));
    return {beta_t, value};
}

} // namespace

// ---------------------------------------------------------------- grid

void GridSpec::validate() const
{
    for (double v : {x0, x1, t0, t1})
        if (!std::isfinite(v)) throw ValidationError("grid bounds must be finite");
    if (nx < 1 || nt < 1) throw ValidationError("grid counts must be positive");
    if (nx == 1 && x0 != x1) throw ValidationError("nx = 1 requires x0 == x1");
    if (nt == 1 && t0 != t1) throw ValidationError("nt = 1 requires t0 == t1");
    if (nx > 1 && !(x1 > x0)) throw ValidationError("grid needs x1 > x0");
    if (nt > 1 && !(t1 > t0)) throw ValidationError("grid needs t1 > t0");
    if (static_cast<long>(nx) * nt > 10'000'000) throw ValidationError("grid has too many points");
}

double GridSpec::x_at(int i) const { return nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1); }
double GridSpec::t_at(int j) const { return nt == 1 ? t0 : t0 + (t1 - t0) * j / (nt - 1); }

GridSpec GridSpec::parse(const std::string& text)
{
    auto fail = [&]() -> GridSpec {
        throw ValidationError("grid '" + text + "' does not match x0:x1:nx,t0:t1:nt");
    };
    const auto comma = text.find(',');
    if (comma == std::string::npos) return fail();
    auto axis = [&](const std::string& part, double& a, double& b, int& n) {
        std::vector<std::string> fields;
        std::stringstream ss(part);
        std::string f;
        while (std::getline(ss, f, ':')) fields.push_back(f);
        if (fields.size() != 3) fail();
        try {
            std::size_t used = 0;
            a = std::stod(fields[0], &used);
            if (used != fields[0].size()) fail();
            b = std::stod(fields[1], &used);
            if (used != fields[1].size()) fail();
            n = std::stoi(fields[2], &used);
            if (used != fields[2].size()) fail();
        } catch (const std::logic_error&) {
            fail();
        }
    };
    GridSpec g;
    axis(text.substr(0, comma), g.x0, g.x1, g.nx);
    axis(text.substr(comma + 1), g.t0, g.t1, g.nt);
    g.validate();
    return g;
}

std::string GridSpec::to_string() const
{
    std::ostringstream os;
    os << x0 << ':' << x1 << ':' << nx << ',' << t0 << ':' << t1 << ':' << nt;
    return os.str();
}

std::vector<GridPoint> grid_points(const GridSpec& grid)
{
    std::vector<GridPoint> pts;
    pts.reserve(grid.size());
    for (int j = 0; j < grid.nt; ++j)
        for (int i = 0; i < grid.nx; ++i) pts.push_back({grid.x_at(i), grid.t_at(j)});
    return pts;
}

// ---------------------------------------------------------------- reports

bool ResidualReport::all_pass() const
{
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

const ResidualRow& ResidualReport::row(const std::string& name) const
{
    for (const auto& r : rows)
        if (r.name == name) return r;
    throw Error("report has no row '" + name + "'");
}

void ResidualReport::append(const ResidualReport& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }

void ResidualReport::override_tolerance(double tol)
{
    for (auto& r : rows) {
        r.tolerance = tol;
        r.pass = r.max_residual <= tol;
    }
}

std::string ResidualReport::to_text() const
{
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    std::ostringstream os;
    os << std::left << std::setw(width + 2) << "check" << std::setw(14) << "max_residual" << std::setw(11)
       << "tolerance" << std::setw(6) << "pass"
       << "at (x, t)\n";
    os << std::scientific << std::setprecision(3);
    for (const auto& r : rows) {
        os << std::left << std::setw(width + 2) << r.name << std::setw(14) << r.max_residual << std::setw(11)
           << r.tolerance << std::setw(6) << (r.pass ? "yes" : "NO");
        os << std::defaultfloat << std::setprecision(6) << '(' << r.at_x << ", " << r.at_t << ")\n";
        os << std::scientific << std::setprecision(3);
    }
    return os.str();
}

nlohmann::json ResidualReport::to_json() const
{
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& r : rows) {
        checks.push_back({{"name", r.name},
                          {"max_residual", r.max_residual},
                          {"tolerance", r.tolerance},
                          {"pass", r.pass},
                          {"at", {{"x", r.at_x}, {"t", r.at_t}}}});
    }
    return {{"checks", checks}};
}

// ---------------------------------------------------------------- FD / threads

double default_fd_step(int order) { return order >= 3 ? 2e-2 : 1e-2; }

int thread_count()
{
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("VESSELKIT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    return hw;
}

void parallel_for(int n, const std::function<void(int)>& body)
{
    if (n <= 0) return;
    const int workers = std::min(thread_count(), n);
    std::vector<std::exception_ptr> errors(n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<int> next{0};
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int i = next++; i < n && !failed; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- KdV and flows

ResidualReport residual_kdv(const VesselSource& source, const GridSpec& grid, double tol)
{
    if (require_hierarchy(source) != 1) throw ValidationError("the KdV residual needs a type-1 evolution");
    ScalarSampler q = [&](double x, double t) { return 2.0 * beta_jet(source.state_at(x, t), 1).at(1); };
    return run_grid({{"kdv", tol}}, grid, [&](double x, double t) {
        const BetaJet jet = beta_jet(source.state_at(x, t), 4);
        const cplx qv = 2.0 * jet.at(1), qx = 2.0 * jet.at(2), qxxx = 2.0 * jet.at(4);
        const cplx qt = fd_derivative(q, x, t, Variable::t, 1, t_step(source, 1));
        return std::vector<double>{std::abs(qt + 1.5 * qv * qx - 0.25 * qxxx)};
    });
}

ResidualReport residual_hierarchy_flow(const VesselSource& source, const FlowConvention& conv, const GridSpec& grid,
                                       double tol)
{
    const int n = require_hierarchy(source);
    const int m = n - conv.type_offset;
    if (m < 0) throw ValidationError("no hierarchy level pairs with vessel type " + std::to_string(n));
    const DiffPoly rhs = flow_rhs(m, conv);
    return run_grid({{"hierarchy_flow_level_" + std::to_string(m), tol}}, grid, [&](double x, double t) {
        auto [lhs, value] = flow_sides(source, rhs, 2 * m + 3, x, t);
        return std::vector<double>{std::abs(lhs - value)};
    });
}

PinningResult pin_flow_phase(const VesselSource& source, int level, RecursionRule rule, const GridSpec& grid,
                             double tol)
{
    const int n = require_hierarchy(source);
    if (n != level + 1)
        throw ValidationError("pinning level " + std::to_string(level) + " needs a type-" + std::to_string(level + 1) +
                              " source");
    const DiffPoly b = hierarchy_table(level, rule)[level].b;
    std::vector<RowDef> defs;
    for (Phase p : kAllPhases) defs.push_back({to_string(p), tol});
    auto report = run_grid(defs, grid, [&](double x, double t) {
        auto [lhs, value] = flow_sides(source, b, 2 * level + 3, x, t);
        std::vector<double> out;
        for (Phase p : kAllPhases) out.push_back(std::abs(lhs - phase_value(p).to_complex() * value));
        return out;
    });
    PinningResult result;
    result.level = level;
    for (std::size_t k = 0; k < kAllPhases.size(); ++k) {
        result.residuals.push_back({kAllPhases[k], report.rows[k].max_residual});
        if (report.rows[k].pass) result.passing.push_back(kAllPhases[k]);
    }
    return result;
}

Phase require_unique(const PinningResult& result)
{
    if (!result.unique()) {
        std::ostringstream os;
        os << "phase pinning for level " << result.level << " is ambiguous: " << result.passing.size()
           << " candidates pass";
        throw Error(os.str());
    }
    return result.passing.front();
}

// ---------------------------------------------------------------- invariants

std::vector<cplx> sample_lambdas(const ComplexMatrix& A, int count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto spec = spectrum(A);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < count) {
        cplx l(u(rng), u(rng));
        bool ok = true;
        for (cplx mu : spec) ok = ok && std::abs(l - mu) >= 0.25;
        if (ok) out.push_back(l);
    }
    return out;
}

double kmoment_symmetry_residual(const VesselState& state, int n, cplx phase)
{
    const ComplexMatrix K = kmoment(state, n);
    return (K.adjoint() - phase * K).norm();
}

ResidualReport suite_vessel_invariants(const VesselSource& source, const GridSpec& grid,
                                       const InvariantOptions& opt)
{
    grid.validate();
    const VesselState probe = source.state_at(grid.x0, grid.t0);
    const std::vector<cplx> lambdas = sample_lambdas(probe.A, opt.lambda_samples, opt.seed);
    const int ode_samples = std::min<int>(3, lambdas.size());
    const int backlund_samples = std::min<int>(opt.backlund_samples, lambdas.size());
    const double hx1 = default_fd_step(1);

    std::vector<RowDef> defs{{"lyapunov", 1e-7},
                             {"x_self_adjoint", 1e-8},
                             {"transfer_symmetry", 1e-8},
                             {"transfer_symmetry_star", 1e-8},
                             {"transfer_ode", 1e-6},
                             {"moment_dx", 1e-7},
                             {"h0_self_adjoint", 1e-10},
                             {"moment_symmetry", 1e-9},
                             {"moment_symmetry_star", 1e-9},
                             {"first_moment_structure", 1e-8},
                             {"trace_sigma1_h0", 1e-9},
                             {"trace_sigma2_h0", 1e-8},
                             {"trace_j_h0", 1e-8},
                             {"trace_h1", 1e-7},
                             {"convolution", 1e-8},
                             {"kmoment_symmetry", 1e-8},
                             {"beta_tau", 1e-7},
                             {"gamma_star_dual", 1e-8},
                             {"gamma_star_anti", 1e-8},
                             {"input_lde", 1e-8},
                             {"backlund", 1e-6}};

    return run_grid(defs, grid, [&](double x, double t) {
        const VesselState s = source.state_at(x, t);
        const auto& p = s.params;
        const ComplexMatrix s1inv = sigma1_inv(p);
        const BetaJet jet = beta_jet(s, 2);
        const cplx b = jet.at(0), b1 = jet.at(1), b2 = jet.at(2);
        std::vector<double> r;

        r.push_back(lyapunov_residual(s));
        r.push_back(self_adjoint_residual(s));

        double sym = 0, sym_star = 0;
        for (cplx l : lambdas) {
            const ComplexMatrix S = transfer_at(s, l);
            const ComplexMatrix Sm = transfer_at(s, -std::conj(l));
            sym = std::max(sym, (Sm.adjoint() * p.sigma1 * S - p.sigma1).norm());
            sym_star = std::max(sym_star, (S * s1inv * Sm.adjoint() - s1inv).norm());
        }
        r.push_back(sym);
        r.push_back(sym_star);

        double ode = 0;
        for (int k = 0; k < ode_samples; ++k) {
            const cplx l = lambdas[k];
            auto S = [&](double xx, double tt) { return transfer_at(source.state_at(xx, tt), l); };
            ComplexMatrix fd = fd_derivative(S, x, t, Variable::x, 1, hx1);
            ode = std::max(ode, (fd - transfer_dx(s, l)).norm());
        }
        r.push_back(ode);

        double mdx = 0;
        for (int n = 0; n <= opt.moment_max; ++n) {
            auto H = [&](double xx, double tt) { return moment(source.state_at(xx, tt), n); };
            ComplexMatrix fd = fd_derivative(H, x, t, Variable::x, 1, hx1);
            const ComplexMatrix alg = dmoment_dx(s, n, jet);
            mdx = std::max(mdx, (fd - alg).norm() / std::max(1.0, alg.norm()));
        }
        r.push_back(mdx);

        std::vector<ComplexMatrix> H;
        for (int n = 0; n <= std::max(opt.moment_max, 1); ++n) H.push_back(moment(s, n));
        r.push_back((H[0] - H[0].adjoint()).norm());
        double msym = 0, msym_star = 0;
        for (int n = 1; n <= opt.moment_max; ++n) {
            const double sg = (n + 1) % 2 ? -1.0 : 1.0;
            ComplexMatrix a = H[n] + sg * H[n].adjoint();
            ComplexMatrix c = a;
            for (int i = 0; i < n; ++i) {
                a += (i % 2 ? -1.0 : 1.0) * H[i].adjoint() * p.sigma1 * H[n - 1 - i];
                c += ((n - 1 + i) % 2 ? -1.0 : 1.0) * H[i] * p.sigma1 * H[n - 1 - i].adjoint();
            }
            msym = std::max(msym, a.norm());
            msym_star = std::max(msym_star, c.norm());
        }
        r.push_back(msym);
        r.push_back(msym_star);

        const cplx w = b1 - b * b;
        r.push_back(std::max({std::abs(H[0](0, 0) + b), std::abs(H[0](0, 1) + kI * w / 2.0),
                              std::abs(H[0](1, 0) - kI * w / 2.0)}));

        ComplexMatrix J(2, 2), D22(2, 2), E12(2, 2);
        J << 0.0, 1.0, -1.0, 0.0;
        D22 << 0.0, 0.0, 0.0, kI;
        E12 << 0.0, 1.0, 0.0, 0.0;
        r.push_back(std::abs((p.sigma1 * H[0]).trace() + (s.A + s.A.adjoint()).trace()));
        r.push_back(std::abs((p.sigma2 * H[0]).trace() + b));
        r.push_back(std::abs((J * H[0]).trace() - kI * w));
        r.push_back(std::abs((p.sigma2 * H[1]).trace() - (D22 * H[0]).trace() - b * (E12 * H[0]).trace() +
                             (b2 - 4.0 * b1 * b + 2.0 * b * b * b) / (2.0 * kI)));

        double conv = 0;
        const ComplexMatrix BsB = s.B * p.sigma1 * s.B.adjoint();
        const ComplexMatrix As = s.A.adjoint();
        const double an = s.A.norm();
        for (int n = 0; n <= opt.convolution_max; ++n) {
            ComplexMatrix lhs = mpow(s.A, n + 1) * s.X + (n % 2 ? -1.0 : 1.0) * s.X * mpow(As, n + 1);
            for (int i = 0; i <= n; ++i) lhs += (i % 2 ? -1.0 : 1.0) * mpow(s.A, n - i) * BsB * mpow(As, i);
            const double scale = std::pow(an, n + 1) * s.X.norm() + std::pow(an, n) * s.B.squaredNorm();
            conv = std::max(conv, lhs.norm() / (scale > 0 ? scale : 1.0));
        }
        r.push_back(conv);

        double ksym = 0;
        const auto K = kmoments(s, opt.kmoment_max);
        for (int n = 0; n <= opt.kmoment_max; ++n)
            ksym = std::max(ksym, (K[n].adjoint() - (n % 2 ? -1.0 : 1.0) * K[n]).norm());
        r.push_back(ksym);

        auto tau = [&](double xx, double tt) { return scalar_fields(source.state_at(xx, tt)).tau; };
        const ScalarFields sf = scalar_fields(s);
        r.push_back(std::abs(fd_derivative(tau, x, t, Variable::x, 1, hx1) / sf.tau + sf.beta));

        const ComplexMatrix g_link = gamma_star(s, GammaMethod::linkage);
        const ComplexMatrix g_tau = gamma_star(s, GammaMethod::tau);
        r.push_back(max_abs_entry(g_link - g_tau));
        r.push_back(max_abs_entry(g_link + g_link.adjoint()));

        double in_res = 0, out_res = 0;
        const Eigen::Vector2cd u0(1.0, 0.0);
        for (int k = 0; k < backlund_samples; ++k) {
            const cplx l = lambdas[k];
            auto u = [&](double xx, double) { return ComplexMatrix(input_lde_solution(p, l, xx, u0)); };
            auto y = [&](double xx, double tt) {
                return ComplexMatrix(transfer_at(source.state_at(xx, tt), l) * input_lde_solution(p, l, xx, u0));
            };
            const ComplexMatrix uv = u(x, t), yv = y(x, t);
            const ComplexMatrix du = fd_derivative(u, x, t, Variable::x, 1, hx1);
            const ComplexMatrix dy = fd_derivative(y, x, t, Variable::x, 1, hx1);
            in_res = std::max(in_res, (du - s1inv * (l * p.sigma2 + p.gamma) * uv).norm() / std::max(1.0, uv.norm()));
            out_res = std::max(out_res, (dy - s1inv * (l * p.sigma2 + g_link) * yv).norm() / std::max(1.0, yv.norm()));
        }
        r.push_back(in_res);
        r.push_back(out_res);
        return r;
    });
}

// ---------------------------------------------------------------- evolution identities

std::string to_string(Truncation t)
{
    return t == Truncation::ends_at_previous ? "K_{n-1}" : "K_n";
}

namespace {

ComplexMatrix s_evolution_rhs(const VesselState& s, cplx l, int n, Truncation trunc,
                              const std::vector<ComplexMatrix>& K)
{
    const ComplexMatrix S = transfer_at(s, l);
    ComplexMatrix bracket = ComplexMatrix::Zero(2, 2);
    for (int j = 0; j < n; ++j) {
        const int idx = trunc == Truncation::ends_at_previous ? j : j + 1;
        bracket += std::pow(l, n - 1 - j) * K[idx];
    }
    return std::pow(kI * l, n) * transfer_dx(s, l) + ipow(n) * bracket * s.params.sigma1 * S;
}

} // namespace

ResidualReport suite_evolution_identities(const VesselSource& source, const GridSpec& grid,
                                          const std::vector<cplx>& lambdas)
{
    const int n = require_hierarchy(source);
    const double ht = t_step(source, 1);
    std::vector<RowDef> defs;
    if (n == 1) {
        defs.push_back({"moment_dt", 1e-6});
        defs.push_back({"transfer_pde", 1e-6});
        defs.push_back({"gamma_star_dt", 1e-6});
    }
    defs.push_back({"transfer_hierarchy", 1e-6});

    return run_grid(defs, grid, [&](double x, double t) {
        const VesselState s = source.state_at(x, t);
        const auto& p = s.params;
        const BetaJet jet = beta_jet(s, 2);
        const ComplexMatrix dH0 = dmoment_dx(s, 0, jet);
        std::vector<double> r;
        if (n == 1) {
            double mdt = 0;
            for (int k = 0; k <= 2; ++k) {
                auto H = [&](double xx, double tt) { return moment(source.state_at(xx, tt), k); };
                const ComplexMatrix fd = fd_derivative(H, x, t, Variable::t, 1, ht);
                const ComplexMatrix rhs = kI * dmoment_dx(s, k + 1, jet) + kI * dH0 * p.sigma1 * moment(s, k);
                mdt = std::max(mdt, (fd - rhs).norm());
            }
            r.push_back(mdt);

            double spde = 0;
            for (cplx l : lambdas) {
                auto S = [&](double xx, double tt) { return transfer_at(source.state_at(xx, tt), l); };
                const ComplexMatrix fd = fd_derivative(S, x, t, Variable::t, 1, ht);
                const ComplexMatrix rhs = kI * l * transfer_dx(s, l) + kI * dH0 * p.sigma1 * transfer_at(s, l);
                spde = std::max(spde, (fd - rhs).norm());
            }
            r.push_back(spde);

            auto G = [&](double xx, double tt) { return gamma_star(source.state_at(xx, tt), GammaMethod::linkage); };
            const ComplexMatrix fd = fd_derivative(G, x, t, Variable::t, 1, ht);
            const ComplexMatrix gs = gamma_star(s, GammaMethod::linkage);
            const ComplexMatrix d2H0 = d2moment0_dx2(s, jet);
            const ComplexMatrix rhs = -kI * gs * dH0 * p.sigma1 + kI * p.sigma1 * d2H0 * p.sigma1 +
                                      kI * p.sigma1 * dH0 * gs;
            r.push_back((fd - rhs).norm());
        }

        const auto K = kmoments(s, n);
        double sh = 0;
        for (cplx l : lambdas) {
            auto S = [&](double xx, double tt) { return transfer_at(source.state_at(xx, tt), l); };
            const ComplexMatrix fd = fd_derivative(S, x, t, Variable::t, 1, ht);
            const ComplexMatrix rhs = s_evolution_rhs(s, l, n, kFrozenTruncation, K);
            sh = std::max(sh, (fd - rhs).norm() / std::max(1.0, rhs.norm()));
        }
        r.push_back(sh);
        return r;
    });
}

TruncationProbe probe_s_truncation(const VesselSource& source, const GridSpec& grid, const std::vector<cplx>& lambdas,
                                   double tol)
{
    const int n = require_hierarchy(source);
    const double ht = t_step(source, 1);
    const Truncation options[2] = {Truncation::ends_at_previous, Truncation::ends_at_current};
    auto report = run_grid({{to_string(options[0]), tol}, {to_string(options[1]), tol}}, grid, [&](double x, double t) {
        const VesselState s = source.state_at(x, t);
        const auto K = kmoments(s, n);
        std::vector<double> r(2, 0.0);
        for (cplx l : lambdas) {
            auto S = [&](double xx, double tt) { return transfer_at(source.state_at(xx, tt), l); };
            const ComplexMatrix fd = fd_derivative(S, x, t, Variable::t, 1, ht);
            for (int k = 0; k < 2; ++k) {
                const ComplexMatrix rhs = s_evolution_rhs(s, l, n, options[k], K);
                r[k] = std::max(r[k], (fd - rhs).norm() / std::max(1.0, rhs.norm()));
            }
        }
        return r;
    });
    TruncationProbe probe;
    for (int k = 0; k < 2; ++k) {
        probe.residuals.push_back({options[k], report.rows[k].max_residual});
        if (report.rows[k].pass) probe.passing.push_back(options[k]);
    }
    return probe;
}

} // namespace vesselkit
