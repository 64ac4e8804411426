#ifndef CHAINFLOW_EOS_HPP
#define CHAINFLOW_EOS_HPP

#include <array>
#include <optional>

namespace chainflow {

enum class Phase { Liquid, Vapor };

// Spinodal interval in specific volume. p'(tau) > 0 exactly on (tau_lo, tau_hi).
struct Spinodal {
    double tau_lo;
    double tau_hi;
};

// Maxwell (equal-area) saturation state: p(tau_l) = p(tau_v) = p_sat and the
// line p_sat cuts equal areas out of the isotherm between tau_l and tau_v.
struct MaxwellState {
    double p_sat;
    double tau_l; // saturated liquid volume, < spinodal
    double tau_v; // saturated vapor volume,  > spinodal
};

// Van der Waals fluid on a fixed isotherm.
//
//   p(tau) = R*T/(tau - b) - a/tau^2,   tau = 1/rho > b
//
// All temperatures are held at T; there is no energy equation anywhere in
// this code. The same (a, b, R*T) triple also defines the pair potential
// used by the particle chain, phi' = -p, so chain and continuum share one
// constitutive law by construction.
class VdwEos {
public:
    VdwEos(double a, double b, double R, double T);

    double a() const { return a_; }
    double covolume() const { return b_; }
    double gas_constant() const { return R_; }
    double temperature() const { return T_; }

    double critical_temperature() const { return 8.0 * a_ / (27.0 * R_ * b_); }
    double critical_volume() const { return 3.0 * b_; }

    // Pressure and derivatives in specific volume. Throw DomainError for
    // tau <= b (hard core reached, pressure diverges).
    double pressure(double tau) const;
    double dpressure_dtau(double tau) const;
    // Antiderivative of p: P(tau) = R*T*log(tau - b) + a/tau. Used by the
    // equal-area construction; exposed for tests.
    double pressure_antiderivative(double tau) const;

    // Density forms, rho in (0, 1/b).
    double pressure_rho(double rho) const;
    double dpressure_drho(double rho) const;
    // sqrt(dp/drho); throws DomainError when dp/drho <= 0 (spinodal states
    // have no real sound speed).
    double sound_speed(double rho) const;

    // Interparticle potential consistent with the isotherm: phi'(r) = -p(r).
    // Defined for gap r > b; diverges logarithmically at the core.
    double phi(double r) const;
    double dphi(double r) const;
    double ddphi(double r) const;
    // Roots of phi' (zero-pressure spacings), present only on cold isotherms
    // (T/Tc < 27/32): first is the stable spacing (phi'' > 0), second the
    // unstable one.
    std::optional<std::array<double, 2>> stationary_spacings() const;

    // Two-phase structure; both throw DomainError when T >= Tc. Results are
    // computed once and cached (the object stays logically const).
    const Spinodal& spinodal() const;
    const MaxwellState& maxwell() const;

    // Admissible single-phase states: tau outside the open spinodal interval.
    bool admissible(double tau) const;
    bool admissible_rho(double rho) const { return admissible(1.0 / rho); }
    // Phase of an admissible volume; DomainError inside the spinodal.
    Phase phase_of(double tau) const;
    Phase phase_of_rho(double rho) const { return phase_of(1.0 / rho); }

private:
    double a_, b_, R_, T_;
    mutable std::optional<Spinodal> spinodal_;
    mutable std::optional<MaxwellState> maxwell_;
};

} // namespace chainflow

#endif
