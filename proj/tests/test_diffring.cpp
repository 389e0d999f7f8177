#include <random>

#include "doctest.h"
#include "vesselkit/diffpoly.hpp"
#include "vesselkit/errors.hpp"

using namespace vesselkit;
using GR = GaussianRational;

namespace {

DiffPoly random_poly(std::mt19937& rng)
{
    std::uniform_int_distribution<int> nterms(0, 4), order(0, 3), power(1, 2), num(-5, 5), den(1, 4);
    std::vector<DiffMonomial> ms;
    int n = nterms(rng);
    for (int k = 0; k < n; ++k) {
        DiffMonomial m;
        m.coeff = GR(mpq_class(num(rng), den(rng)), mpq_class(num(rng), den(rng)));
        int nf = nterms(rng) % 3;
        for (int f = 0; f < nf; ++f) m.factors.push_back({order(rng), power(rng)});
        ms.push_back(m);
    }
    return DiffPoly::from_monomials(ms);
}

BetaJet sample_jet(int max_order)
{
    BetaJet jet;
    for (int j = 0; j <= max_order + 4; ++j) jet[j] = {0.3 * (j + 1) - 0.7, 0.2 * j - 0.1};
    return jet;
}

} // namespace

TEST_CASE("gaussian rationals")
{
    GR a(mpq_class(1, 2), mpq_class(-3, 4));
    CHECK(a.to_string() == "1/2 - 3/4*i");
    CHECK(GR::i().to_string() == "i");
    CHECK((GR::ratio(-1, 16) * GR::i()).to_string() == "-1/16*i");
    CHECK(GR::ratio(6, 4).to_string() == "3/2");
    CHECK(a * a.inverse() == GR(1));
    CHECK(GR::i() * GR::i() == GR(-1));
    CHECK_THROWS_AS(GR(0).inverse(), std::domain_error);
}

TEST_CASE("arithmetic examples")
{
    auto b1 = DiffPoly::beta(1);
    CHECK(b1 + b1 == GR(2) * b1);
    CHECK(b1 * b1 == DiffPoly::beta(1, 2));
    CHECK(render(GR::ratio(-1, 4) * DiffPoly::beta(3), RenderFormat::text) == "(-1/4)*B3");
    CHECK((b1 - b1).is_zero());
}

TEST_CASE("derivation examples")
{
    CHECK(derive(DiffPoly::beta(1, 2)) == GR(2) * DiffPoly::beta(1) * DiffPoly::beta(2));
    CHECK(derive(DiffPoly::constant(GR::ratio(7, 3))).is_zero());
    CHECK(derive(DiffPoly::beta(1) * DiffPoly::beta(3)) ==
          DiffPoly::beta(2) * DiffPoly::beta(3) + DiffPoly::beta(1) * DiffPoly::beta(4));
}

TEST_CASE("evaluation")
{
    DiffPoly b0 = GR::ratio(-1, 4) * DiffPoly::beta(3) + GR::ratio(3, 2) * DiffPoly::beta(1, 2);
    BetaJet jet{{1, 1.0}, {2, 0.0}, {3, 2.0}};
    CHECK(std::abs(evaluate(b0, jet) - std::complex<double>(1.0)) < 1e-15);
    CHECK(evaluate(DiffPoly{}, BetaJet{}) == std::complex<double>(0.0));
    CHECK(evaluate(DiffPoly::beta(0, 2), BetaJet{{0, 3.0}}) == std::complex<double>(9.0));

    try {
        evaluate(b0, BetaJet{{1, 1.0}});
        FAIL("expected MissingOrderError");
    } catch (const MissingOrderError& e) {
        CHECK(e.order() == 3);
    }
}

TEST_CASE("rendering")
{
    DiffPoly b0 = GR::ratio(-1, 4) * DiffPoly::beta(3) + GR::ratio(3, 2) * DiffPoly::beta(1, 2);
    CHECK(render(b0, RenderFormat::text) == "(-1/4)*B3 + (3/2)*B1^2");
    CHECK(render(DiffPoly{}, RenderFormat::text) == "0");
    CHECK(render(GR::i() * DiffPoly::beta(1), RenderFormat::latex) == "i\\beta'");
    CHECK(render(b0, RenderFormat::latex) == "-\\frac{1}{4}\\beta''' + \\frac{3}{2}(\\beta')^{2}");

    auto doc = nlohmann::json::parse(render(b0, RenderFormat::json));
    CHECK(from_json(doc) == b0);
    CHECK(doc["monomials"][0]["factors"][0]["order"] == 3);
}

TEST_CASE("json schema violations are rejected")
{
    CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"terms": []})")), ValidationError);
    CHECK_THROWS_AS(from_json(nlohmann::json::parse(
                        R"({"monomials":[{"coeff":{"re":[1,0],"im":[0,1]},"factors":[]}]})")),
                    ValidationError);
}

TEST_CASE("exact integration")
{
    DiffPoly p = DiffPoly::beta(1) * DiffPoly::beta(4) + GR(3) * DiffPoly::beta(2, 2);
    CHECK(integrate(derive(p)) == p);
    CHECK(integrate(DiffPoly::beta(3)) == DiffPoly::beta(2));
    // beta'^2 is not a total derivative
    CHECK_THROWS_AS(integrate(DiffPoly::beta(1, 2)), NotExactError);
}

TEST_CASE("ring axioms and homomorphism on random polynomials")
{
    std::mt19937 rng(20240601);
    for (int trial = 0; trial < 60; ++trial) {
        DiffPoly p = random_poly(rng), q = random_poly(rng), r = random_poly(rng);
        CHECK((p + q) + r == p + (q + r));
        CHECK((p * q) * r == p * (q * r));
        CHECK(p * q == q * p);
        CHECK(p * (q + r) == p * q + p * r);
        CHECK(derive(p * q) == derive(p) * q + p * derive(q));

        BetaJet jet = sample_jet(8);
        auto ep = evaluate(p, jet), eq = evaluate(q, jet);
        auto sum = evaluate(p + q, jet), prod = evaluate(p * q, jet);
        CHECK(std::abs(sum - (ep + eq)) <= 1e-12 * std::max(1.0, std::abs(sum)));
        CHECK(std::abs(prod - ep * eq) <= 1e-12 * std::max(1.0, std::abs(prod)));
    }
}

TEST_CASE("canonical form ignores insertion order")
{
    std::vector<DiffMonomial> ms{{GR(2), {{1, 2}}}, {GR::ratio(1, 3), {{3, 1}}}, {GR(-1), {{0, 1}, {2, 1}}},
                                 {GR(5), {}}, {GR(-2), {{1, 2}}}};
    auto p = DiffPoly::from_monomials(ms);
    std::reverse(ms.begin(), ms.end());
    CHECK(DiffPoly::from_monomials(ms) == p);
    CHECK(DiffPoly::from_monomials(p.monomials()) == p);
    CHECK(p.size() == 3);
    auto listed = p.monomials();
    CHECK(listed.front().factors.empty());
    CHECK(listed.back().factors == Factors{{0, 1}, {2, 1}});
}
