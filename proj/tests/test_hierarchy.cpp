#include "doctest.h"
#include "vesselkit/errors.hpp"
#include "vesselkit/hierarchy.hpp"

using namespace vesselkit;
using GR = GaussianRational;

namespace {

DiffPoly B(int order, int power = 1) { return DiffPoly::beta(order, power); }
const GR I = GR::i();

// Frozen from an undetermined-coefficient solve of b_{m+1}' = i(-b'''/4 + 2 beta' b' + beta'' b).
DiffPoly closed_b1()
{
    return I * (GR::ratio(1, 16) * B(5) - GR::ratio(5, 4) * B(1) * B(3) - GR::ratio(5, 8) * B(2, 2) +
                GR::ratio(5, 2) * B(1, 3));
}

DiffPoly closed_b2()
{
    return GR::ratio(1, 64) * B(7) - GR::ratio(7, 16) * B(1) * B(5) - GR::ratio(7, 8) * B(2) * B(4) -
           GR::ratio(21, 32) * B(3, 2) + GR::ratio(35, 8) * B(1, 2) * B(3) + GR::ratio(35, 8) * B(1) * B(2, 2) -
           GR::ratio(35, 8) * B(1, 4);
}

DiffPoly printed_b1()
{
    return I * (GR::ratio(1, 16) * B(5) - B(1) * B(3) - GR::ratio(3, 4) * B(2, 2) + GR::ratio(3, 2) * B(1, 3));
}

} // namespace

TEST_CASE("b0")
{
    CHECK(b0() == GR::ratio(-1, 4) * B(3) + GR::ratio(3, 2) * B(1, 2));
    CHECK(evaluate(b0(), BetaJet{{1, 0.0}, {3, 0.0}}) == std::complex<double>(0.0));
    CHECK(std::abs(evaluate(b0(), BetaJet{{1, 1.0}, {3, 2.0}}) - 1.0) < 1e-15);
}

TEST_CASE("printed recursion")
{
    auto b1 = next_b(b0(), RecursionRule::printed);
    CHECK(b1 == printed_b1());
    CHECK(next_b(DiffPoly{}, RecursionRule::printed).is_zero());
    CHECK(defining_identity_residual(b0(), b1).is_zero());

    // It does not close the a/b/c system at level 0.
    auto table = hierarchy_table(1, RecursionRule::printed);
    auto residual = system_identity_residual(table[0], table[1]);
    auto expected = GR::ratio(1, 2) * B(1) * (GR(12) * B(1) * B(2) - B(4));
    CHECK(residual == expected);
}

TEST_CASE("closed recursion")
{
    auto b1 = next_b(b0());
    CHECK(b1 == closed_b1());
    CHECK(next_b(b1) == closed_b2());
    CHECK(next_b(DiffPoly{}).is_zero());
    CHECK_FALSE(defining_identity_residual(b0(), b1).is_zero());

    BetaJet jet;
    for (int j = 0; j < 16; ++j) jet[j] = (j + 1) / 3.0 * (j % 2 ? -1.0 : 1.0);
    CHECK(std::abs(evaluate(b1, jet) - std::complex<double>(0, -281.0 / 108)) < 1e-12 * 281.0 / 108);
    CHECK(std::abs(evaluate(closed_b2(), jet) - (-1559.0 / 162)) < 1e-12 * 1559.0 / 162);
}

TEST_CASE("companions")
{
    auto [a0, c0] = abc_from_b(b0(), next_b(b0()));
    auto a0_expected = I * (GR::ratio(-3, 2) * B(0) * B(1, 2) + GR::ratio(1, 4) * B(0) * B(3) +
                            GR::ratio(3, 2) * B(1) * B(2) - GR::ratio(1, 8) * B(4));
    CHECK(a0 == a0_expected);
    auto c0_expected = GR::ratio(3, 2) * B(0, 2) * B(1, 2) - GR::ratio(1, 4) * B(0, 2) * B(3) -
                       GR(3) * B(0) * B(1) * B(2) + GR::ratio(1, 4) * B(0) * B(4) - GR::ratio(1, 2) * B(1, 3) +
                       GR::ratio(3, 4) * B(1) * B(3) + GR::ratio(7, 8) * B(2, 2) - GR::ratio(1, 16) * B(5);
    CHECK(c0 == c0_expected);

    auto zero = abc_from_b(DiffPoly{}, DiffPoly{});
    CHECK(zero.a.is_zero());
    CHECK(zero.c.is_zero());
}

TEST_CASE("system closure")
{
    CHECK(check_system_identity(0));
    CHECK(check_system_identity(1));
    CHECK_FALSE(check_system_identity(0, RecursionRule::printed));

    auto table = hierarchy_table(2);
    HierarchyEntry perturbed = table[1];
    perturbed.b += DiffPoly::constant(1);
    auto [a, c] = abc_from_b(perturbed.b, table[2].b);
    perturbed.a = a;
    perturbed.c = c;
    CHECK_FALSE(check_system_identity(table[0], perturbed));
}

TEST_CASE("hierarchy table structure")
{
    auto table = hierarchy_table(5);
    REQUIRE(table.size() == 6);
    const std::size_t counts[] = {2, 4, 7, 12, 21, 34};
    for (int m = 0; m <= 5; ++m) {
        CHECK(table[m].level == m);
        CHECK(table[m].b.max_order() == 2 * m + 3);
        CHECK(table[m].b.size() == counts[m]);
        if (m < 5) CHECK(check_system_identity(table[m], table[m + 1]));
    }
    CHECK(hierarchy_table(0).size() == 1);
    CHECK_THROWS_AS(hierarchy_table(11), ResourceError);
    CHECK_THROWS_AS(hierarchy_table(-1), ValidationError);
}

TEST_CASE("flow conventions")
{
    auto conv = shipped_flow_convention();
    CHECK(conv.vessel_type(0) == 1);
    CHECK(conv.phase(0) == Phase::minus_one);
    CHECK(conv.phase(1) == Phase::minus_i);
    CHECK(flow_rhs(0, conv) == -b0());
    CHECK(flow_rhs(1, conv) == -I * closed_b1());

    auto printed = shipped_flow_convention(RecursionRule::printed);
    CHECK(flow_rhs(0, printed) == -b0());
    CHECK_THROWS_AS(flow_rhs(1, printed), Error);
    CHECK(recursion_rule_from_string("printed") == RecursionRule::printed);
    CHECK_THROWS_AS(recursion_rule_from_string("other"), ValidationError);
}
