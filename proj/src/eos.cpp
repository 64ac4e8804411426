#include "chainflow/eos.hpp"
#include "chainflow/errors.hpp"
#include "chainflow/state.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace chainflow {
namespace {

// Bisection to near machine precision. Caller guarantees a sign change on
// [lo, hi]; we only assert it.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw DomainError("bisect: no sign change in bracket");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

VdwEos::VdwEos(double a, double b, double R, double T) : a_(a), b_(b), R_(R), T_(T) {
    if (!(a > 0.0) || !(b > 0.0) || !(R > 0.0) || !(T > 0.0))
        throw ConfigError("equation of state requires a, b, R, T all positive");
}

double VdwEos::pressure(double tau) const {
    if (!(tau > b_)) {
        std::ostringstream os;
        os << "pressure undefined at tau = " << tau << " (covolume b = " << b_ << ")";
        throw DomainError(os.str());
    }
    return R_ * T_ / (tau - b_) - a_ / (tau * tau);
}

double VdwEos::dpressure_dtau(double tau) const {
    if (!(tau > b_)) throw DomainError("dp/dtau undefined at or below the covolume");
    double d = tau - b_;
    return -R_ * T_ / (d * d) + 2.0 * a_ / (tau * tau * tau);
}

double VdwEos::pressure_antiderivative(double tau) const {
    if (!(tau > b_)) throw DomainError("pressure antiderivative undefined at or below the covolume");
    return R_ * T_ * std::log(tau - b_) + a_ / tau;
}

double VdwEos::pressure_rho(double rho) const {
    if (!(rho > 0.0) || !(rho < 1.0 / b_)) {
        std::ostringstream os;
        os << "density " << rho << " outside (0, 1/b)";
        throw DomainError(os.str());
    }
    return R_ * T_ * rho / (1.0 - b_ * rho) - a_ * rho * rho;
}

double VdwEos::dpressure_drho(double rho) const {
    if (!(rho > 0.0) || !(rho < 1.0 / b_)) throw DomainError("density outside (0, 1/b)");
    double d = 1.0 - b_ * rho;
    return R_ * T_ / (d * d) - 2.0 * a_ * rho;
}

double VdwEos::sound_speed(double rho) const {
    double c2 = dpressure_drho(rho);
    if (!(c2 > 0.0)) {
        std::ostringstream os;
        os << "no real sound speed at rho = " << rho << " (dp/drho = " << c2 << ")";
        throw DomainError(os.str());
    }
    return std::sqrt(c2);
}

double VdwEos::phi(double r) const {
    if (!(r > b_)) throw DomainError("pair potential undefined at or below the hard core");
    return -a_ / r - R_ * T_ * std::log(r - b_);
}

double VdwEos::dphi(double r) const {
    // phi'(r) = a/r^2 - R*T/(r - b); equals -p(r) term for term, but is kept
    // as its own expression so the consistency between the potential and the
    // isotherm stays a checkable fact instead of a definition.
    if (!(r > b_)) throw DomainError("pair force undefined at or below the hard core");
    return a_ / (r * r) - R_ * T_ / (r - b_);
}

double VdwEos::ddphi(double r) const {
    return -dpressure_dtau(r);
}

std::optional<std::array<double, 2>> VdwEos::stationary_spacings() const {
    // phi'(r) = 0 iff p(r) = 0 iff R*T*r^2 = a*(r-b)/..., i.e. the cubic
    // R*T*r^2 - a*r + a*b = 0 after clearing denominators: p(r) = 0
    // <=> R*T r^2 = a (r - b) <=> R*T r^2 - a r + a b = 0.
    double disc = a_ * a_ - 4.0 * R_ * T_ * a_ * b_;
    if (disc <= 0.0) return std::nullopt;
    double sq = std::sqrt(disc);
    double r_stable = (a_ - sq) / (2.0 * R_ * T_);
    double r_unstable = (a_ + sq) / (2.0 * R_ * T_);
    if (!(r_stable > b_)) return std::nullopt;
    return std::array<double, 2>{r_stable, r_unstable};
}

const Spinodal& VdwEos::spinodal() const {
    if (spinodal_) return *spinodal_;
    double Tc = critical_temperature();
    if (!(T_ < Tc)) {
        std::ostringstream os;
        os << "no spinodal: T = " << T_ << " is not below Tc = " << Tc;
        throw DomainError(os.str());
    }
    double tau_c = critical_volume();
    // p' > 0 somewhere iff T < Tc; p'(tau_c) > 0 then, p' < 0 near the core
    // and as tau -> inf. Bracket each root against tau_c.
    auto g = [this](double tau) { return dpressure_dtau(tau); };
    if (!(g(tau_c) > 0.0))
        throw DomainError("spinodal: T is numerically at the critical point");
    double lo = b_ * (1.0 + 1e-12);
    while (g(lo) >= 0.0) lo = 0.5 * (lo + b_); // paranoia; g -> -inf at b
    double tau_lo = bisect(g, lo, tau_c);
    double far = 2.0 * tau_c;
    while (g(far) >= 0.0) far *= 2.0;
    double tau_hi = bisect(g, tau_c, far);
    spinodal_ = Spinodal{tau_lo, tau_hi};
    return *spinodal_;
}

const MaxwellState& VdwEos::maxwell() const {
    if (maxwell_) return *maxwell_;
    const Spinodal& sp = spinodal();
    // p decreases, rises between the spinodal volumes, then decreases to 0+:
    // the local min sits at tau_lo, the local max at tau_hi.
    double p_lo = std::max(pressure(sp.tau_lo), 0.0); // clipped: tau_v needs p > 0
    double p_hi = pressure(sp.tau_hi);
    if (!(p_hi > p_lo))
        throw DomainError("degenerate isotherm: no saturation window");

    // For a horizontal cut at pbar, tau_l and tau_v are the outer roots of
    // p(tau) = pbar. Area difference via the exact antiderivative:
    //   G(pbar) = P(tau_v) - P(tau_l) - pbar*(tau_v - tau_l),
    // monotone decreasing in pbar; G = 0 is the equal-area cut.
    auto outer_roots = [&](double pbar, double& tau_l, double& tau_v) {
        auto f = [&](double tau) { return pressure(tau) - pbar; };
        double lo = b_ * (1.0 + 1e-13);
        while (f(lo) <= 0.0) lo = b_ + 0.5 * (lo - b_);
        tau_l = bisect(f, lo, sp.tau_lo);
        double hi = 2.0 * sp.tau_hi;
        while (f(hi) >= 0.0) hi *= 2.0; // p -> 0+ so any pbar > 0 is crossed
        tau_v = bisect(f, sp.tau_hi, hi);
    };
    auto G = [&](double pbar) {
        double tl, tv;
        outer_roots(pbar, tl, tv);
        return pressure_antiderivative(tv) - pressure_antiderivative(tl) - pbar * (tv - tl);
    };
    double eps = (p_hi - p_lo) * 1e-13;
    double p_sat = bisect(G, p_lo + eps, p_hi - eps);
    double tau_l, tau_v;
    outer_roots(p_sat, tau_l, tau_v);
    maxwell_ = MaxwellState{p_sat, tau_l, tau_v};
    return *maxwell_;
}

bool VdwEos::admissible(double tau) const {
    if (!(tau > b_)) return false;
    if (!(T_ < critical_temperature())) return true;
    const Spinodal& sp = spinodal();
    return tau <= sp.tau_lo || tau >= sp.tau_hi;
}

FluidState euler_flux(const VdwEos& eos, const FluidState& u) {
    if (!eos.admissible_rho(u.rho)) {
        std::ostringstream os;
        os << "flux of inadmissible state rho = " << u.rho;
        throw DomainError(os.str());
    }
    double v = u.velocity();
    return {u.mom, u.mom * v + eos.pressure_rho(u.rho)};
}

Phase VdwEos::phase_of(double tau) const {
    if (!(tau > b_)) throw DomainError("phase undefined at or below the covolume");
    const Spinodal& sp = spinodal();
    if (tau <= sp.tau_lo) return Phase::Liquid;
    if (tau >= sp.tau_hi) return Phase::Vapor;
    std::ostringstream os;
    os << "tau = " << tau << " lies inside the spinodal (" << sp.tau_lo << ", " << sp.tau_hi
       << "); no phase assigned";
    throw DomainError(os.str());
}

} // namespace chainflow
