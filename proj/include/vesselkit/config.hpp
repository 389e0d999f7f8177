#pragma once

// Run configuration files (JSON). Unknown keys are rejected.
//
//   {
//     "mode": "soliton" | "general",
//     "evolution": {"type": "hierarchy", "n": 1}
//                | {"type": "type0", "m": 1.0, "m12": 0.0}
//                | {"type": "general", "coefficients": [{"re": [[..],[..]], "im": [[..],[..]]}, ...]},
//     "modes": [{"k": 1.0, "b_re": 1.41, "b_im": 0.0}, ...],
//     "grid": "x0:x1:nx,t0:t1:nt" or {"x0": .., "x1": .., "nx": .., "t0": .., "t1": .., "nt": ..},
//     "outputs": {"fields": ["q", "beta", "tau"], "path": "out.csv"},
//     "x_perturbation": 0.0
//   }
//
// An empty mode list selects the zero vessel. A nonzero x_perturbation adds
// to the corner entries of X (see PerturbedSource).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vesselkit/source.hpp"
#include "vesselkit/verify.hpp"

namespace vesselkit {

enum class RunMode { soliton, general };

struct OutputSpec {
    std::vector<std::string> fields{"q", "beta", "tau"};
    /// Empty means standard output.
    std::string path;
};

struct RunConfig {
    RunMode mode = RunMode::soliton;
    EvolutionSpec evolution{HierarchyEvolution{1}};
    std::vector<SolitonMode> modes;
    GridSpec grid;
    OutputSpec outputs;
    double x_perturbation = 0.0;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::string& path);

    void validate() const;
    /// Soliton data at t = 0; n is the hierarchy type for soliton mode and 1 otherwise.
    SolitonSpec soliton_spec() const;
    std::shared_ptr<const VesselSource> make_source() const;
};

} // namespace vesselkit
