#pragma once

// KdV hierarchy right-hand sides b_m and the companions a_m, c_m of the
// moment system of S*Gamma*S^{-1}:
//
//   b_{m+1} = -a_m' + i c_m + i (beta' - beta^2) b_m
//   2 a_{m+1} = c_m' + 2 i (beta' - beta^2) a_m + 2 beta c_m
//   b_m' = 2 beta b_m - 2 i a_m
//
// with d_m = -a_m implicit. Level m drives vessels of evolutionary type m+1.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vesselkit/diffpoly.hpp"

namespace vesselkit {

constexpr int kMaxHierarchyLevel = 10;

/// How b_{m+1} is obtained from b_m.
///
/// closed_system eliminates a_m, c_m from the moment system:
///   b_{m+1}' = i(-b_m'''/4 + 2 beta' b_m' + beta'' b_m),
/// integrated exactly. printed is the shorter relation
///   4 b_{m+1}' = -i b_m''' + 4i (beta' b_m)',
/// which does not close the system beyond the base level.
enum class RecursionRule { closed_system, printed };

std::string to_string(RecursionRule rule);
RecursionRule recursion_rule_from_string(const std::string& s);

struct HierarchyEntry {
    int level = 0;
    DiffPoly b;
    DiffPoly a;
    DiffPoly c;
};

/// -(1/4) beta''' + (3/2) (beta')^2.
DiffPoly b0();

/// Integration constant is zero in both rules.
DiffPoly next_b(const DiffPoly& b_m, RecursionRule rule = RecursionRule::closed_system);

struct Companions {
    DiffPoly a;
    DiffPoly c;
};

/// a_m = (2 beta b_m - b_m') / (2i), c_m = -i (b_{m+1} + a_m' - i (beta' - beta^2) b_m).
Companions abc_from_b(const DiffPoly& b_m, const DiffPoly& b_next);

/// 4 (b_{m+1})' + i (b_m)''' - 4i (beta' b_m)'.
DiffPoly defining_identity_residual(const DiffPoly& b_m, const DiffPoly& b_next);

/// 2 a_{m+1} - c_m' - 2i (beta' - beta^2) a_m - 2 beta c_m.
DiffPoly system_identity_residual(const HierarchyEntry& m, const HierarchyEntry& m_next);
bool check_system_identity(const HierarchyEntry& m, const HierarchyEntry& m_next);
/// Builds levels m, m+1 with the given rule and checks closure.
bool check_system_identity(int m, RecursionRule rule = RecursionRule::closed_system);

/// Entries 0..max_level. Throws ResourceError beyond kMaxHierarchyLevel.
std::vector<HierarchyEntry> hierarchy_table(int max_level, RecursionRule rule = RecursionRule::closed_system);

enum class Phase { plus_one, minus_one, plus_i, minus_i };

constexpr std::array<Phase, 4> kAllPhases = {Phase::plus_one, Phase::minus_one, Phase::plus_i, Phase::minus_i};

GaussianRational phase_value(Phase p);
std::string to_string(Phase p);

/// Phase eps_m per level (empty when not pinned) and the level -> vessel type offset.
struct FlowConvention {
    RecursionRule rule = RecursionRule::closed_system;
    std::vector<std::optional<Phase>> phases;
    int type_offset = 1;

    std::optional<Phase> phase(int level) const;
    int vessel_type(int level) const { return level + type_offset; }
};

/// Phases frozen from the soliton pinning experiments.
FlowConvention shipped_flow_convention(RecursionRule rule = RecursionRule::closed_system);

/// eps_m * b_m: right-hand side of beta_t for hierarchy level m.
/// Throws Error when eps_m is not pinned for the convention.
DiffPoly flow_rhs(int m, const FlowConvention& conv);

} // namespace vesselkit
