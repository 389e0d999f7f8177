#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "vesselkit/errors.hpp"
#include "vesselkit/verify.hpp"

using namespace vesselkit;

namespace {

SolitonSpec s1() { return {1, {{1.0, std::sqrt(2.0)}}}; }

GridSpec small_grid() { return GridSpec::parse("-3:3:7,0:1:3"); }

struct ScopedEnv {
    ScopedEnv(const char* name, const char* value) : name_(name)
    {
        if (const char* old = std::getenv(name)) old_ = old;
        setenv(name, value, 1);
    }
    ~ScopedEnv()
    {
        if (old_.empty())
            unsetenv(name_);
        else
            setenv(name_, old_.c_str(), 1);
    }
    const char* name_;
    std::string old_;
};

} // namespace

TEST_CASE("grid specs")
{
    const auto g = GridSpec::parse("-5:5:101,0:1:21");
    CHECK(g.nx == 101);
    CHECK(g.nt == 21);
    CHECK(g.x_at(0) == -5.0);
    CHECK(g.x_at(100) == 5.0);
    CHECK(g.t_at(20) == 1.0);
    CHECK(g.size() == 2121);
    CHECK(GridSpec::parse(g.to_string()).nx == 101);

    const auto pts = grid_points(GridSpec::parse("0:1:3,0:1:2"));
    REQUIRE(pts.size() == 6);
    CHECK(pts[1].x == 0.5);
    CHECK(pts[1].t == 0.0);
    CHECK(pts[3].t == 1.0);

    CHECK_NOTHROW(GridSpec::parse("0:0:1,0:1:2"));
    CHECK_THROWS_AS(GridSpec::parse("0:1:1,0:1:2"), ValidationError);
    CHECK_THROWS_AS(GridSpec::parse("0:1:3"), ValidationError);
    CHECK_THROWS_AS(GridSpec::parse("0:1:x,0:1:2"), ValidationError);
    CHECK_THROWS_AS(GridSpec::parse("0:nan:3,0:1:2"), ValidationError);
}

TEST_CASE("finite differences")
{
    auto sq = [](double x, double) { return x * x; };
    CHECK(std::abs(fd_derivative(sq, 1.0, 0.0, Variable::x, 1, 1e-2) - 2.0) < 1e-10);
    auto c = [](double, double) { return 3.0; };
    CHECK(std::abs(fd_derivative(c, 1.0, 0.0, Variable::x, 1, 1e-2)) < 1e-12);
    auto e2 = [](double x, double) { return std::exp(2 * x); };
    CHECK(std::abs(fd_derivative(e2, 0.0, 0.0, Variable::x, 3, 1e-2) - 8.0) < 1e-7);
    auto tx = [](double, double t) { return std::sin(t); };
    CHECK(std::abs(fd_derivative(tx, 0.0, 0.4, Variable::t, 2, 1e-2) + std::sin(0.4)) < 1e-9);

    auto f = [](double x, double) { return std::sin(x); };
    for (int order = 1; order <= 3; ++order) {
        const double exact = order == 1 ? std::cos(0.9) : order == 2 ? -std::sin(0.9) : -std::cos(0.9);
        auto err = [&](double h) { return std::abs(fd_derivative(f, 0.9, 0.0, Variable::x, order, h) - exact); };
        CHECK(err(0.4) / err(0.2) >= 16.0);
    }
}

TEST_CASE("threads")
{
    {
        ScopedEnv env("VESSELKIT_THREADS", "3");
        CHECK(thread_count() == 3);
    }
    {
        ScopedEnv env("VESSELKIT_THREADS", "1");
        CHECK(thread_count() == 1);
    }
    CHECK(thread_count() >= 1);

    std::vector<int> out(100, 0);
    parallel_for(100, [&](int i) { out[i] = i * i; });
    for (int i = 0; i < 100; ++i) CHECK(out[i] == i * i);

    ScopedEnv env("VESSELKIT_THREADS", "4");
    try {
        parallel_for(50, [](int i) {
            if (i == 7 || i == 30) throw ValidationError("at " + std::to_string(i));
        });
        FAIL("no exception");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()) == "at 7");
    }
}

TEST_CASE("residual reports")
{
    ResidualReport r;
    r.rows.push_back({"a", 1e-9, 1e-8, true, 0.5, 0.25});
    r.rows.push_back({"b", 2e-3, 1e-6, false, -1.0, 1.0});
    CHECK_FALSE(r.all_pass());
    CHECK(r.row("b").max_residual == 2e-3);
    CHECK_THROWS_AS(r.row("c"), Error);

    const auto j = r.to_json();
    REQUIRE(j["checks"].size() == 2);
    CHECK(j["checks"][0]["name"] == "a");
    CHECK(j["checks"][1]["pass"] == false);
    CHECK(j["checks"][1]["at"]["x"] == -1.0);
    CHECK(r.to_text().find("NO") != std::string::npos);

    r.override_tolerance(1.0);
    CHECK(r.all_pass());
}

TEST_CASE("KdV residual")
{
    SolitonSource src(s1());
    const auto rep = residual_kdv(src, GridSpec{});
    CHECK(rep.row("kdv").max_residual <= 1e-8);
    CHECK(rep.all_pass());

    ZeroSource zero;
    CHECK(residual_kdv(zero, small_grid()).row("kdv").max_residual == 0.0);

    SolitonSource two({1, {{1.0, std::sqrt(2.0)}, {2.0, 2.0}}});
    CHECK(residual_kdv(two, small_grid()).all_pass());

    const auto a = residual_kdv(two, small_grid());
    const auto b = residual_kdv(two, small_grid());
    CHECK(a.row("kdv").max_residual == b.row("kdv").max_residual);
}

TEST_CASE("hierarchy flow residual")
{
    SolitonSource src(s1());
    const auto conv = shipped_flow_convention();
    CHECK(residual_hierarchy_flow(src, conv, small_grid()).all_pass());
    ZeroSource zero;
    CHECK(residual_hierarchy_flow(zero, conv, small_grid()).rows[0].max_residual == 0.0);

    SolitonSource k2({2, {{2.0, 1.0}}});
    CHECK(residual_hierarchy_flow(k2, conv, GridSpec{}).all_pass());
}

TEST_CASE("phase pinning regression")
{
    const auto conv = shipped_flow_convention(RecursionRule::closed_system);
    const GridSpec grid = GridSpec::parse("-2:2:5,0:0.5:3");
    for (int level = 0; level <= 4; ++level) {
        CAPTURE(level);
        SolitonSource src({level + 1, {{1.3, 1.0}}});
        const auto result = pin_flow_phase(src, level, RecursionRule::closed_system, grid);
        REQUIRE(result.unique());
        CHECK(require_unique(result) == *conv.phase(level));
    }

    PinningResult none;
    CHECK_THROWS_AS(require_unique(none), Error);
    SolitonSource wrong_type({2, {{1.0, 1.0}}});
    CHECK_THROWS_AS(pin_flow_phase(wrong_type, 0, RecursionRule::closed_system, grid), ValidationError);
}

TEST_CASE("S truncation probe")
{
    SolitonSource src({2, {{1.0, std::sqrt(2.0)}, {1.5, 1.0}}});
    const auto probe = probe_s_truncation(src, small_grid(), {{0.0, 2.0}, {1.0, -1.5}});
    REQUIRE(probe.unique());
    CHECK(probe.passing[0] == kFrozenTruncation);
}

TEST_CASE("vessel invariant suite")
{
    SolitonSource src(s1());
    const auto rep = suite_vessel_invariants(src, small_grid());
    CHECK(rep.all_pass());
    CHECK(rep.rows.size() == 21);

    ZeroSource zero;
    const auto z = suite_vessel_invariants(zero, small_grid());
    CHECK(z.all_pass());
    for (const auto& row : z.rows)
        if (row.name != "input_lde" && row.name != "backlund") CHECK(row.max_residual == 0.0);

    auto two = std::make_shared<SolitonSource>(SolitonSpec{1, {{1.0, std::sqrt(2.0)}, {2.0, 2.0}}});
    PerturbedSource bad(two, 1e-3);
    const auto b = suite_vessel_invariants(bad, small_grid());
    CHECK_FALSE(b.row("lyapunov").pass);

    const auto lambdas = sample_lambdas(two->state_at(0, 0).A, 20, 1729);
    CHECK(lambdas.size() == 20);
    CHECK(lambdas == sample_lambdas(two->state_at(0, 0).A, 20, 1729));
    for (cplx l : lambdas)
        for (cplx e : spectrum(two->state_at(0, 0).A)) CHECK(std::abs(l - e) >= 0.25);
}

TEST_CASE("K-moment symmetry phases")
{
    const auto s = soliton_vessel({1, {{1.0, std::sqrt(2.0)}, {2.0, 2.0}}}, 0.3, 0.1);
    for (int n = 0; n <= 4; ++n) {
        CAPTURE(n);
        CHECK(kmoment_symmetry_residual(s, n, n % 2 ? -1.0 : 1.0) < 1e-8);
    }
    CHECK(kmoment_symmetry_residual(s, 1, cplx(0.0, 1.0)) > 1e-3);
}

TEST_CASE("evolution identities")
{
    SolitonSource src(s1());
    const auto rep = suite_evolution_identities(src, small_grid(), {{0.0, 2.0}});
    CHECK(rep.all_pass());
    CHECK(rep.row("transfer_pde").max_residual <= 1e-6);

    ZeroSource zero;
    for (const auto& row : suite_evolution_identities(zero, small_grid(), {{0.0, 2.0}}).rows)
        CHECK(row.max_residual == 0.0);

    SolitonSource k2({2, {{1.0, 1.0}}});
    const auto r2 = suite_evolution_identities(k2, small_grid(), {{0.0, 2.0}});
    CHECK(r2.rows.size() == 1);
    CHECK(r2.all_pass());
}
