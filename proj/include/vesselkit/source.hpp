#pragma once

// Providers of vessel states on the (x, t) plane. Verification suites sample
// sources pointwise, so every implementation is safe for concurrent calls.

#include <functional>
#include <memory>
#include <string>

#include "vesselkit/vessel.hpp"

namespace vesselkit {

class VesselSource {
public:
    virtual ~VesselSource() = default;

    virtual VesselState state_at(double x, double t) const = 0;
    virtual const EvolutionSpec& evolution() const = 0;
    /// Ratio of t- to x-variation; finite-difference t-steps are divided by it.
    virtual double time_rate() const { return 1.0; }
    virtual std::string describe() const = 0;
};

class SolitonSource : public VesselSource {
public:
    explicit SolitonSource(SolitonSpec spec);

    VesselState state_at(double x, double t) const override;
    const EvolutionSpec& evolution() const override { return evo_; }
    double time_rate() const override { return spec_.time_rate(); }
    std::string describe() const override;
    const SolitonSpec& spec() const { return spec_; }

private:
    SolitonSpec spec_;
    EvolutionSpec evo_;
};

/// B = 0 vessel; declares the KdV evolution so every suite applies.
class ZeroSource : public VesselSource {
public:
    VesselState state_at(double x, double t) const override { return zero_vessel(x, t); }
    const EvolutionSpec& evolution() const override { return evo_; }
    std::string describe() const override { return "zero vessel"; }

private:
    EvolutionSpec evo_{HierarchyEvolution{1}};
};

/// Numerically evolved vessel. Each state is obtained by stepping the
/// initial line state(x, t0) in t with evolve_general_step; the x-flow and
/// t-flows commute, so no quadrature along x is needed and no cancellation
/// against large X(x0, t) entries occurs. Results depend only on (x, t).
class EvolvedSource : public VesselSource {
public:
    using InitialLine = std::function<VesselState(double x)>;

    EvolvedSource(InitialLine initial, double t0, EvolutionSpec evo, double rate = 1.0);
    /// Initial line from closed-form soliton data at t0.
    EvolvedSource(const SolitonSpec& initial, double t0, EvolutionSpec evo);

    VesselState state_at(double x, double t) const override;
    const EvolutionSpec& evolution() const override { return evo_; }
    double time_rate() const override { return rate_; }
    std::string describe() const override;

private:
    InitialLine initial_;
    double t0_;
    EvolutionSpec evo_;
    double rate_;
};

/// Adds delta to X(0, N-1) and X(N-1, 0). With N >= 2 this breaks the
/// Lyapunov equation; a one-mode vessel shifted this way is still a vessel.
class PerturbedSource : public VesselSource {
public:
    PerturbedSource(std::shared_ptr<const VesselSource> inner, double delta) : inner_(std::move(inner)), delta_(delta) {}

    VesselState state_at(double x, double t) const override;
    const EvolutionSpec& evolution() const override { return inner_->evolution(); }
    double time_rate() const override { return inner_->time_rate(); }
    std::string describe() const override;

private:
    std::shared_ptr<const VesselSource> inner_;
    double delta_;
};

} // namespace vesselkit
