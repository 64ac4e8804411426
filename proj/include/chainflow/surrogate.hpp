#pragma once

#include "chainflow/micro.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace chainflow {

using InputPoint = std::array<double, 4>;  // rho_L, m_L, rho_R, m_R
using OutputPoint = std::array<double, 5>; // s, rho_sL, m_sL, rho_sR, m_sR

struct Sample {
    InputPoint x{};
    OutputPoint y{};
    // residuals of the jump balance, carried through the store for audit
    double rh_mass = 0.0;
    double rh_mom = 0.0;
};

InputPoint to_point(const RiemannInput& in);
Sample to_sample(const RiemannInput& in, const RiemannResponse& r);
RiemannResponse from_output(const OutputPoint& y);

// Normalization divisors for the distance norm. Densities are measured against
// the coexistence liquid density, momenta against liquid density times the
// liquid sound speed, so one threshold applies to all four components.
std::array<double, 4> default_input_scaling(const VdwEos& eos);

struct GateConfig {
    double epsilon_model = 0.5;
    double gamma_k = 10.0;  // kernel width in scaled units
    double lambda_reg = 1e-10;
    std::array<double, 4> input_scaling{1.0, 1.0, 1.0, 1.0}; // divisors
    void validate() const;
};

struct GatedResult {
    OutputPoint y{};
    bool sampled = false;
};

// Interpolating model over micro responses plus the sampling gate that decides
// when the model is trusted and when the particle solver must be consulted.
// score/predict take a shared lock; anything that mutates the sample set takes
// an exclusive one, so batch drivers may overlap oracle calls with reads.
class Surrogate {
public:
    using Oracle = std::function<Sample(const InputPoint&)>;

    explicit Surrogate(GateConfig cfg);

    const GateConfig& config() const { return cfg_; }
    std::size_t size() const;
    std::vector<Sample> samples() const; // copy, for inspection and tests

    double kernel(const InputPoint& a, const InputPoint& b) const;
    double score(const InputPoint& x) const; // +inf on an empty set

    // Appends, or replaces the stored sample whose scaled distance to s.x is
    // below the duplicate tolerance. Invalidates coefficients until train().
    void add(const Sample& s);
    void train();
    bool trained() const;

    OutputPoint predict(const InputPoint& x) const;

    // score < epsilon: model answer, no state change. Otherwise runs the
    // oracle (outside any lock), appends, retrains, and returns the oracle's
    // own y. An oracle failure propagates and leaves the set untouched.
    GatedResult evaluate_gated(const InputPoint& x, const Oracle& oracle);

    void save_csv(const std::string& path) const;
    void load_csv(const std::string& path); // replaces the set, then trains

    static constexpr double duplicate_tol = 1e-12;

private:
    double sq_dist(const InputPoint& a, const InputPoint& b) const;
    std::size_t nearest_locked(const InputPoint& x, double& best_sq) const;
    OutputPoint predict_locked(const InputPoint& x) const;
    void train_locked();

    GateConfig cfg_;
    std::vector<Sample> rows_;
    Eigen::MatrixXd alpha_; // n x 5, valid iff trained_on_ == rows_.size()
    std::size_t trained_on_ = std::size_t(-1);
    mutable std::shared_mutex mtx_;
};

} // namespace chainflow
