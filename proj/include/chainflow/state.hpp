#ifndef CHAINFLOW_STATE_HPP
#define CHAINFLOW_STATE_HPP

#include "chainflow/eos.hpp"

#include <array>

namespace chainflow {

// Conserved isothermal Euler state per unit length: density and momentum.
// Velocity is always mom/rho; keep the conversion in one place because
// mixing (rho, v) and (rho, rho*v) tuples is the classic bug here.
struct FluidState {
    double rho = 0.0;
    double mom = 0.0;

    double velocity() const { return mom / rho; }

    FluidState operator+(const FluidState& o) const { return {rho + o.rho, mom + o.mom}; }
    FluidState operator-(const FluidState& o) const { return {rho - o.rho, mom - o.mom}; }
    FluidState operator*(double c) const { return {c * rho, c * mom}; }
};

inline FluidState operator*(double c, const FluidState& u) { return u * c; }

// Flux of (rho, rho v): (rho v, rho v^2 + p). Rejects spinodal densities:
// a state there has no phase and the macro scheme treats it as a failed
// step, so the error must surface here rather than produce a number.
FluidState euler_flux(const VdwEos& eos, const FluidState& u);

} // namespace chainflow

#endif
