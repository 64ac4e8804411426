#include "chainflow/surrogate.hpp"

#include "chainflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

namespace chainflow {

namespace {

const char* store_header =
    "rho_L,m_L,rho_R,m_R,s,rho_sL,m_sL,rho_sR,m_sR,rh_mass_res,rh_mom_res";

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_sample(const Sample& s, const char* what) {
    if (!(s.x[0] > 0.0) || !(s.x[2] > 0.0) || !(s.y[1] > 0.0) || !(s.y[3] > 0.0))
        throw DomainError(std::string(what) + ": densities must be positive");
    for (double v : s.x)
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite input");
    for (double v : s.y)
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite output");
}

} // namespace

InputPoint to_point(const RiemannInput& in) {
    return {in.u_L.rho, in.u_L.mom, in.u_R.rho, in.u_R.mom};
}

Sample to_sample(const RiemannInput& in, const RiemannResponse& r) {
    Sample s;
    s.x = to_point(in);
    s.y = {r.s, r.star_L.rho, r.star_L.mom, r.star_R.rho, r.star_R.mom};
    s.rh_mass = r.rh_mass;
    s.rh_mom = r.rh_mom;
    return s;
}

RiemannResponse from_output(const OutputPoint& y) {
    RiemannResponse r;
    r.s = y[0];
    r.star_L = {y[1], y[2]};
    r.star_R = {y[3], y[4]};
    return r;
}

std::array<double, 4> default_input_scaling(const VdwEos& eos) {
    double rho_l = 1.0 / eos.maxwell().tau_l;
    double c_ref = eos.sound_speed(rho_l);
    return {rho_l, rho_l * c_ref, rho_l, rho_l * c_ref};
}

void GateConfig::validate() const {
    if (!(epsilon_model > 0.0)) throw ConfigError("gate: epsilon_model must be positive");
    if (!(gamma_k > 0.0)) throw ConfigError("gate: gamma_k must be positive");
    if (!(lambda_reg >= 0.0)) throw ConfigError("gate: lambda_reg must be nonnegative");
    for (double s : input_scaling)
        if (!(s > 0.0)) throw ConfigError("gate: input_scaling entries must be positive");
}

Surrogate::Surrogate(GateConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::size_t Surrogate::size() const {
    std::shared_lock lk(mtx_);
    return rows_.size();
}

std::vector<Sample> Surrogate::samples() const {
    std::shared_lock lk(mtx_);
    return rows_;
}

double Surrogate::sq_dist(const InputPoint& a, const InputPoint& b) const {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double d = (a[i] - b[i]) / cfg_.input_scaling[i];
        acc += d * d;
    }
    return acc;
}

double Surrogate::kernel(const InputPoint& a, const InputPoint& b) const {
    return std::exp(-cfg_.gamma_k * sq_dist(a, b));
}

std::size_t Surrogate::nearest_locked(const InputPoint& x, double& best_sq) const {
    best_sq = std::numeric_limits<double>::infinity();
    std::size_t best = rows_.size();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double d = sq_dist(x, rows_[i].x);
        if (d < best_sq) {
            best_sq = d;
            best = i;
        }
    }
    return best;
}

double Surrogate::score(const InputPoint& x) const {
    std::shared_lock lk(mtx_);
    double best_sq;
    nearest_locked(x, best_sq);
    return std::sqrt(best_sq);
}

void Surrogate::add(const Sample& s) {
    check_sample(s, "surrogate add");
    std::unique_lock lk(mtx_);
    double best_sq;
    std::size_t i = nearest_locked(s.x, best_sq);
    if (i < rows_.size() && std::sqrt(best_sq) < duplicate_tol)
        rows_[i] = s; // keep inputs distinct so the kernel system stays regular
    else
        rows_.push_back(s);
    trained_on_ = std::size_t(-1);
}

void Surrogate::train_locked() {
    const std::size_t n = rows_.size();
    if (n == 0) throw DomainError("surrogate train: empty sample set");
    Eigen::MatrixXd K(n, n);
    Eigen::MatrixXd Y(n, 5);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double k = kernel(rows_[i].x, rows_[j].x);
            K(i, j) = k;
            K(j, i) = k;
        }
        for (int c = 0; c < 5; ++c) Y(i, c) = rows_[i].y[c];
    }
    K.diagonal().array() += cfg_.lambda_reg;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw DomainError("surrogate train: kernel system is not positive definite "
                          "(near-duplicate inputs with lambda_reg = 0?)");
    alpha_ = llt.solve(Y);
    trained_on_ = n;
}

void Surrogate::train() {
    std::unique_lock lk(mtx_);
    train_locked();
}

bool Surrogate::trained() const {
    std::shared_lock lk(mtx_);
    return trained_on_ == rows_.size() && !rows_.empty();
}

OutputPoint Surrogate::predict_locked(const InputPoint& x) const {
    if (trained_on_ != rows_.size() || rows_.empty())
        throw DomainError("surrogate predict: state is not trained");
    OutputPoint y{};
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double k = kernel(rows_[i].x, x);
        for (int c = 0; c < 5; ++c) y[c] += alpha_(i, c) * k;
    }
    return y;
}

OutputPoint Surrogate::predict(const InputPoint& x) const {
    std::shared_lock lk(mtx_);
    return predict_locked(x);
}

GatedResult Surrogate::evaluate_gated(const InputPoint& x, const Oracle& oracle) {
    {
        std::shared_lock lk(mtx_);
        double best_sq;
        nearest_locked(x, best_sq);
        if (std::sqrt(best_sq) < cfg_.epsilon_model) return {predict_locked(x), false};
    }
    Sample fresh = oracle(x); // may throw; nothing recorded in that case
    check_sample(fresh, "surrogate oracle result");
    {
        std::unique_lock lk(mtx_);
        double best_sq;
        std::size_t i = nearest_locked(fresh.x, best_sq);
        if (i < rows_.size() && std::sqrt(best_sq) < duplicate_tol)
            rows_[i] = fresh;
        else
            rows_.push_back(fresh);
        train_locked();
    }
    return {fresh.y, true};
}

void Surrogate::save_csv(const std::string& path) const {
    std::shared_lock lk(mtx_);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open sample store for writing: " + path);
    out << store_header << '\n';
    for (const Sample& s : rows_) {
        out << fmt17(s.x[0]) << ',' << fmt17(s.x[1]) << ',' << fmt17(s.x[2]) << ','
            << fmt17(s.x[3]);
        for (double v : s.y) out << ',' << fmt17(v);
        out << ',' << fmt17(s.rh_mass) << ',' << fmt17(s.rh_mom) << '\n';
    }
    if (!out) throw IoError("write failed for sample store: " + path);
}

void Surrogate::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample store: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("sample store is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != store_header)
        throw IoError("sample store header mismatch in " + path + ": got '" + line + "'");
    std::vector<Sample> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 11> f{};
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= 11) break;
            char* end = nullptr;
            f[k] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw IoError("sample store " + path + " line " + std::to_string(lineno) +
                              ": bad number '" + cell + "'");
            ++k;
        }
        if (k != 11)
            throw IoError("sample store " + path + " line " + std::to_string(lineno) +
                          ": expected 11 fields, got " + std::to_string(k));
        Sample s;
        s.x = {f[0], f[1], f[2], f[3]};
        s.y = {f[4], f[5], f[6], f[7], f[8]};
        s.rh_mass = f[9];
        s.rh_mom = f[10];
        check_sample(s, "sample store row");
        rows.push_back(s);
    }
    std::unique_lock lk(mtx_);
    rows_ = std::move(rows);
    trained_on_ = std::size_t(-1);
    if (!rows_.empty()) train_locked();
}

} // namespace chainflow
