#include "vesselkit/source.hpp"

#include <cmath>
#include <sstream>

#include "vesselkit/errors.hpp"

namespace vesselkit {

namespace {

// Largest |t-rate / x-rate| over the modes for a diagonal-A evolution.
double evolution_rate(const SolitonSpec& spec, const EvolutionSpec& evo)
{
    const VesselState s = soliton_vessel(spec, 0.0, 0.0);
    double rate = 0.0;
    const GeneralEvolution g = evo.to_general(s.params);
    for (int j = 0; j < s.dim; ++j) {
        const double k = spec.modes[j].k;
        cplx a = s.A(j, j), ai = 1.0;
        ComplexMatrix acc = ComplexMatrix::Zero(2, 2);
        for (const auto& m : g.m) {
            acc += ai * m;
            ai *= a;
        }
        rate = std::max(rate, (a * acc).norm() / k);
    }
    return rate;
}

} // namespace

SolitonSource::SolitonSource(SolitonSpec spec) : spec_(std::move(spec)), evo_{HierarchyEvolution{spec_.n}}
{
    spec_.validate();
}

VesselState SolitonSource::state_at(double x, double t) const { return soliton_vessel(spec_, x, t); }

std::string SolitonSource::describe() const
{
    std::ostringstream os;
    os << "soliton n=" << spec_.n << " k=[";
    for (std::size_t j = 0; j < spec_.modes.size(); ++j) os << (j ? "," : "") << spec_.modes[j].k;
    os << "]";
    return os.str();
}

EvolvedSource::EvolvedSource(InitialLine initial, double t0, EvolutionSpec evo, double rate)
    : initial_(std::move(initial)), t0_(t0), evo_(std::move(evo)), rate_(rate)
{
    evo_.validate();
    if (!(rate_ > 0)) throw ValidationError("time rate must be positive");
}

EvolvedSource::EvolvedSource(const SolitonSpec& initial, double t0, EvolutionSpec evo)
    : EvolvedSource([initial, t0](double x) { return soliton_vessel(initial, x, t0); }, t0, evo,
                    std::max(1.0, evolution_rate(initial, evo)))
{
}

VesselState EvolvedSource::state_at(double x, double t) const
{
    VesselState s = initial_(x);
    s.x = x;
    s.t = t0_;
    return evolve_general_step(s, evo_, t - t0_);
}

std::string EvolvedSource::describe() const { return "evolved vessel, " + evo_.describe(); }

VesselState PerturbedSource::state_at(double x, double t) const
{
    VesselState s = inner_->state_at(x, t);
    const int j = s.dim - 1;
    s.X(0, j) += delta_;
    if (j != 0) s.X(j, 0) += delta_;
    return s;
}

std::string PerturbedSource::describe() const
{
    std::ostringstream os;
    os << inner_->describe() << " with X perturbed by " << delta_;
    return os.str();
}

} // namespace vesselkit
