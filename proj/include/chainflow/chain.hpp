#ifndef CHAINFLOW_CHAIN_HPP
#define CHAINFLOW_CHAIN_HPP

#include "chainflow/eos.hpp"
#include "chainflow/state.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace chainflow {

// Nearest-neighbor particle chain on a line. Positions are strictly
// increasing and every gap exceeds the covolume b; both are enforced by the
// stepping code, which refuses to continue otherwise.
struct ParticleChain {
    std::vector<double> x;
    std::vector<double> v;
    double m = 1.0;

    std::size_t size() const { return x.size(); }
};

struct ChainObservables {
    double mass = 0.0;
    double momentum = 0.0;
    double energy = 0.0; // kinetic plus pair potential over gaps
};

// Two uniform half-chains meeting at the origin: n/2 particles with spacing
// m/rho_L and velocity v_L on the left, likewise on the right. The innermost
// particles sit at -m/(2 rho_L) and +m/(2 rho_R), so each particle's mass is
// centered on its own slot and binning reproduces the target densities.
// No random perturbation is applied.
ParticleChain init_riemann_chain(const VdwEos& eos, const FluidState& u_L, const FluidState& u_R,
                                 std::size_t n, double m);

// Free-end forces: a_i = (phi'(gap right of i) - phi'(gap left of i))/m with
// the missing term dropped at the two ends. Throws HardCoreError if a gap is
// at or below b, Error on non-finite positions.
void accelerations(const VdwEos& eos, const ParticleChain& chain, std::vector<double>& acc);

// One velocity-Verlet step. acc must hold accelerations(chain) on entry and
// holds the accelerations of the updated chain on exit, so the driver loop
// costs one force evaluation per step.
void verlet_step(const VdwEos& eos, ParticleChain& chain, double dt, std::vector<double>& acc);

// Largest dt with dt*sqrt(|phi''(r_min)|) <= cap over current gaps. The
// stiffest pair is the tightest one, so this bounds the fastest oscillation
// period resolved by the integrator.
double stable_dt(const VdwEos& eos, const ParticleChain& chain, double cap = 0.1);

ChainObservables observables(const VdwEos& eos, const ParticleChain& chain);

// Advance by ceil(t_end/dt) steps. The observer fires at t = 0, every
// stride-th step, and on the final state; it receives (time, chain) and must
// not mutate the chain.
using ChainObserver = std::function<void(double, const ParticleChain&)>;
void run_chain(const VdwEos& eos, ParticleChain& chain, double dt, double t_end,
               std::size_t stride, const ChainObserver& observer);

} // namespace chainflow

#endif
