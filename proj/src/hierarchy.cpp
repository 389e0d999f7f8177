#include "vesselkit/hierarchy.hpp"

#include "vesselkit/errors.hpp"

namespace vesselkit {

namespace {

const GaussianRational kI = GaussianRational::i();

DiffPoly beta() { return DiffPoly::beta(0); }
DiffPoly beta1() { return DiffPoly::beta(1); }

// beta' - beta^2
DiffPoly w() { return beta1() - DiffPoly::beta(0, 2); }

} // namespace

std::string to_string(RecursionRule rule)
{
    return rule == RecursionRule::closed_system ? "closed" : "printed";
}

RecursionRule recursion_rule_from_string(const std::string& s)
{
    if (s == "closed") return RecursionRule::closed_system;
    if (s == "printed") return RecursionRule::printed;
    throw ValidationError("unknown recursion rule '" + s + "' (expected closed or printed)");
}

DiffPoly b0()
{
    return GaussianRational::ratio(-1, 4) * DiffPoly::beta(3) + GaussianRational::ratio(3, 2) * DiffPoly::beta(1, 2);
}

DiffPoly next_b(const DiffPoly& b_m, RecursionRule rule)
{
    if (rule == RecursionRule::printed) {
        return (-kI * GaussianRational::ratio(1, 4)) * derive(b_m, 2) + kI * (beta1() * b_m);
    }
    DiffPoly rate = GaussianRational::ratio(-1, 4) * derive(b_m, 3) + GaussianRational(2) * (beta1() * derive(b_m)) +
                    DiffPoly::beta(2) * b_m;
    return integrate(kI * rate);
}

Companions abc_from_b(const DiffPoly& b_m, const DiffPoly& b_next)
{
    DiffPoly a = (GaussianRational(2) * (beta() * b_m) - derive(b_m)) * (GaussianRational(2) * kI).inverse();
    DiffPoly c = -kI * (b_next + derive(a) - kI * (w() * b_m));
    return {std::move(a), std::move(c)};
}

DiffPoly defining_identity_residual(const DiffPoly& b_m, const DiffPoly& b_next)
{
    return GaussianRational(4) * derive(b_next) + kI * derive(b_m, 3) -
           (GaussianRational(4) * kI) * derive(beta1() * b_m);
}

DiffPoly system_identity_residual(const HierarchyEntry& m, const HierarchyEntry& m_next)
{
    return GaussianRational(2) * m_next.a - derive(m.c) - (GaussianRational(2) * kI) * (w() * m.a) -
           GaussianRational(2) * (beta() * m.c);
}

bool check_system_identity(const HierarchyEntry& m, const HierarchyEntry& m_next)
{
    return system_identity_residual(m, m_next).is_zero();
}

bool check_system_identity(int m, RecursionRule rule)
{
    auto table = hierarchy_table(m + 1, rule);
    return check_system_identity(table[m], table[m + 1]);
}

std::vector<HierarchyEntry> hierarchy_table(int max_level, RecursionRule rule)
{
    if (max_level < 0) throw ValidationError("hierarchy level must be non-negative");
    if (max_level > kMaxHierarchyLevel)
        throw ResourceError("hierarchy level " + std::to_string(max_level) + " exceeds supported maximum " +
                            std::to_string(kMaxHierarchyLevel));
    // c_m needs b_{m+1}, so one extra b is generated.
    std::vector<DiffPoly> bs{b0()};
    for (int m = 0; m <= max_level; ++m) bs.push_back(next_b(bs.back(), rule));

    std::vector<HierarchyEntry> table;
    for (int m = 0; m <= max_level; ++m) {
        auto [a, c] = abc_from_b(bs[m], bs[m + 1]);
        table.push_back({m, bs[m], std::move(a), std::move(c)});
    }
    return table;
}

GaussianRational phase_value(Phase p)
{
    switch (p) {
    case Phase::plus_one: return 1;
    case Phase::minus_one: return -1;
    case Phase::plus_i: return kI;
    case Phase::minus_i: return -kI;
    }
    return 1;
}

std::string to_string(Phase p)
{
    switch (p) {
    case Phase::plus_one: return "1";
    case Phase::minus_one: return "-1";
    case Phase::plus_i: return "i";
    case Phase::minus_i: return "-i";
    }
    return "?";
}

std::optional<Phase> FlowConvention::phase(int level) const
{
    if (level < 0 || level >= static_cast<int>(phases.size())) return std::nullopt;
    return phases[level];
}

FlowConvention shipped_flow_convention(RecursionRule rule)
{
    FlowConvention conv;
    conv.rule = rule;
    if (rule == RecursionRule::closed_system) {
        // eps_m = -i^m, pinned level by level against type-(m+1) solitons.
        conv.phases = {Phase::minus_one, Phase::minus_i, Phase::plus_one, Phase::plus_i, Phase::minus_one};
    } else {
        // Only the base level has a passing phase under the printed rule.
        conv.phases = {Phase::minus_one};
    }
    return conv;
}

DiffPoly flow_rhs(int m, const FlowConvention& conv)
{
    auto eps = conv.phase(m);
    if (!eps) throw Error("flow phase for level " + std::to_string(m) + " is not pinned under the " +
                          to_string(conv.rule) + " recursion");
    return phase_value(*eps) * hierarchy_table(m, conv.rule)[m].b;
}

} // namespace vesselkit
