#include "chainflow/chain.hpp"
#include "chainflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chainflow {
namespace {

// Gap validation shared by the force loop. Returns phi'(r) with the EOS
// parameters expanded locally; the expression must stay in sync with
// VdwEos::dphi (cross-checked by tests).
struct PairForce {
    double a, b, RT;

    explicit PairForce(const VdwEos& eos)
        : a(eos.a()), b(eos.covolume()), RT(eos.gas_constant() * eos.temperature()) {}

    double dphi(double r) const { return a / (r * r) - RT / (r - b); }

    void check_gap(double r, std::size_t i) const {
        if (r > b) return;
        std::ostringstream os;
        if (std::isnan(r))
            os << "non-finite gap between particles " << i << " and " << i + 1;
        else
            os << "hard-core violation: gap " << r << " between particles " << i << " and "
               << i + 1 << " is not above b = " << b;
        throw HardCoreError(os.str());
    }
};

} // namespace

ParticleChain init_riemann_chain(const VdwEos& eos, const FluidState& u_L, const FluidState& u_R,
                                 std::size_t n, double m) {
    if (n < 4 || n % 2 != 0) throw ConfigError("chain init requires an even particle count >= 4");
    if (!(m > 0.0)) throw ConfigError("particle mass must be positive");
    if (!(u_L.rho > 0.0) || !(u_R.rho > 0.0)) throw ConfigError("chain init requires positive densities");
    double r_l = m / u_L.rho;
    double r_r = m / u_R.rho;
    double b = eos.covolume();
    if (!(r_l > b) || !(r_r > b)) {
        std::ostringstream os;
        os << "initial spacing inside the hard core: m/rho_L = " << r_l << ", m/rho_R = " << r_r
           << ", b = " << b;
        throw ConfigError(os.str());
    }
    ParticleChain chain;
    chain.m = m;
    chain.x.resize(n);
    chain.v.resize(n);
    std::size_t half = n / 2;
    double v_l = u_L.velocity();
    double v_r = u_R.velocity();
    for (std::size_t i = 0; i < half; ++i) {
        // i = half-1 sits at -r_l/2, i = half-2 at -3 r_l/2, ...
        chain.x[i] = -(0.5 + double(half - 1 - i)) * r_l;
        chain.v[i] = v_l;
    }
    for (std::size_t i = half; i < n; ++i) {
        chain.x[i] = (0.5 + double(i - half)) * r_r;
        chain.v[i] = v_r;
    }
    return chain;
}

void accelerations(const VdwEos& eos, const ParticleChain& chain, std::vector<double>& acc) {
    std::size_t n = chain.size();
    if (n < 2) throw ConfigError("chain must have at least 2 particles");
    acc.assign(n, 0.0);
    PairForce pf(eos);
    double inv_m = 1.0 / chain.m;
    // a_i = (g_i - g_{i-1})/m with g_i = phi'(x_{i+1} - x_i); free ends drop
    // the out-of-range term.
    double g_prev = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double r = chain.x[i + 1] - chain.x[i];
        pf.check_gap(r, i);
        double g = pf.dphi(r);
        acc[i] = (g - g_prev) * inv_m;
        g_prev = g;
    }
    acc[n - 1] = -g_prev * inv_m;
}

void verlet_step(const VdwEos& eos, ParticleChain& chain, double dt, std::vector<double>& acc) {
    if (!(dt > 0.0)) throw ConfigError("verlet step requires dt > 0");
    std::size_t n = chain.size();
    if (acc.size() != n) throw ConfigError("verlet step needs the cached accelerations of the chain");
    double half_dt2 = 0.5 * dt * dt;
    for (std::size_t i = 0; i < n; ++i) chain.x[i] += dt * chain.v[i] + half_dt2 * acc[i];
    // Half kick with the old accelerations, then overwrite acc in place from
    // the new positions and finish the kick: one force pass per step.
    double half_dt = 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) chain.v[i] += half_dt * acc[i];
    accelerations(eos, chain, acc);
    for (std::size_t i = 0; i < n; ++i) chain.v[i] += half_dt * acc[i];
}

double stable_dt(const VdwEos& eos, const ParticleChain& chain, double cap) {
    if (!(cap > 0.0)) throw ConfigError("time step cap must be positive");
    std::size_t n = chain.size();
    double r_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) r_min = std::min(r_min, chain.x[i + 1] - chain.x[i]);
    if (!(r_min > eos.covolume())) throw HardCoreError("cannot pick a time step: minimal gap at the hard core");
    double stiffness = std::sqrt(std::abs(eos.ddphi(r_min)));
    if (stiffness == 0.0) throw ConfigError("degenerate stiffness; no stable dt rule applies");
    return cap / stiffness;
}

ChainObservables observables(const VdwEos& eos, const ParticleChain& chain) {
    ChainObservables obs;
    std::size_t n = chain.size();
    obs.mass = double(n) * chain.m;
    double mom = 0.0, kin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mom += chain.v[i];
        kin += chain.v[i] * chain.v[i];
    }
    obs.momentum = chain.m * mom;
    obs.energy = 0.5 * chain.m * kin;
    for (std::size_t i = 0; i + 1 < n; ++i) obs.energy += eos.phi(chain.x[i + 1] - chain.x[i]);
    return obs;
}

void run_chain(const VdwEos& eos, ParticleChain& chain, double dt, double t_end,
               std::size_t stride, const ChainObserver& observer) {
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
    if (stride == 0) throw ConfigError("observer stride must be >= 1");
    std::vector<double> acc;
    accelerations(eos, chain, acc);
    if (observer) observer(0.0, chain);
    if (t_end == 0.0) return;
    auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    for (std::size_t step = 1; step <= n_steps; ++step) {
        verlet_step(eos, chain, dt, acc);
        if (observer && (step % stride == 0 || step == n_steps))
            observer(double(step) * dt, chain);
    }
}

} // namespace chainflow
