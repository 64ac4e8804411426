#include <doctest.h>

#include "chainflow/errors.hpp"
#include "chainflow/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

using namespace chainflow;

namespace {

GateConfig plain(double eps = 0.5, double gamma = 10.0, double lambda = 0.0) {
    GateConfig g;
    g.epsilon_model = eps;
    g.gamma_k = gamma;
    g.lambda_reg = lambda;
    g.input_scaling = {1.0, 1.0, 1.0, 1.0};
    return g;
}

Sample mk(InputPoint x, OutputPoint y) {
    Sample s;
    s.x = x;
    s.y = y;
    return s;
}

// deterministic stand-in oracle with positive starred densities
Sample toy_oracle(const InputPoint& x) {
    Sample s;
    s.x = x;
    s.y = {0.1 * x[0] - 0.2 * x[1], 0.5 + x[0], 0.3 * x[3], 0.2 + 0.1 * x[2], x[1] - x[3]};
    return s;
}

} // namespace

TEST_CASE("kernel values: coincidence, e-folding distance, symmetry") {
    Surrogate s(plain(0.5, 10.0));
    InputPoint a{1.8, 0.0, 0.3, 0.0};
    CHECK(s.kernel(a, a) == 1.0);

    // squared distance exactly 1/gamma gives exp(-1)
    InputPoint b = a;
    b[1] += std::sqrt(0.1);
    CHECK(s.kernel(a, b) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    for (int t = 0; t < 20; ++t) {
        InputPoint p{u(rng), u(rng), u(rng), u(rng)};
        InputPoint q{u(rng), u(rng), u(rng), u(rng)};
        CHECK(s.kernel(p, q) == s.kernel(q, p));
        CHECK(s.kernel(p, q) > 0.0);
        CHECK(s.kernel(p, q) <= 1.0);
    }
}

TEST_CASE("kernel respects the input scaling") {
    GateConfig g = plain(0.5, 2.0);
    g.input_scaling = {2.0, 1.0, 1.0, 1.0};
    Surrogate s(g);
    InputPoint a{1.0, 0.0, 1.0, 0.0};
    InputPoint b{3.0, 0.0, 1.0, 0.0}; // raw offset 2, scaled offset 1
    CHECK(s.kernel(a, b) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("single-sample training gives alpha equal to y") {
    Surrogate s(plain());
    InputPoint x0{1.8, 0.1, 0.3, 0.0};
    OutputPoint y0{0.2, 1.8, 0.36, 0.33, 0.02};
    s.add(mk(x0, y0));
    s.train();
    OutputPoint at = s.predict(x0);
    for (int c = 0; c < 5; ++c) CHECK(at[c] == doctest::Approx(y0[c]).epsilon(1e-14));
    // with K = [1] the expansion is y0 * kernel(x0, x), checkable anywhere
    InputPoint far{1.5, 0.0, 0.4, 0.1};
    double k = s.kernel(x0, far);
    OutputPoint p = s.predict(far);
    for (int c = 0; c < 5; ++c) CHECK(p[c] == doctest::Approx(y0[c] * k).epsilon(1e-13));
}

TEST_CASE("two-sample training matches the hand 2x2 solve") {
    GateConfig g = plain(0.5, 0.7);
    Surrogate s(g);
    InputPoint x1{1.8, 0.0, 0.3, 0.0};
    InputPoint x2{1.8, 0.3, 0.3, 0.1};
    OutputPoint y1{0.1, 1.8, 0.2, 0.3, 0.05};
    OutputPoint y2{0.2, 1.7, 0.3, 0.35, 0.06};
    s.add(mk(x1, y1));
    s.add(mk(x2, y2));
    s.train();

    double d2 = 0.3 * 0.3 + 0.1 * 0.1;
    double k12 = std::exp(-0.7 * d2);
    double det = 1.0 - k12 * k12;
    InputPoint q{1.75, 0.1, 0.32, 0.0};
    auto dist2 = [](const InputPoint& a, const InputPoint& b) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return acc;
    };
    double kq1 = std::exp(-0.7 * dist2(q, x1));
    double kq2 = std::exp(-0.7 * dist2(q, x2));
    OutputPoint got = s.predict(q);
    for (int c = 0; c < 5; ++c) {
        double a1 = (y1[c] - k12 * y2[c]) / det;
        double a2 = (y2[c] - k12 * y1[c]) / det;
        double want = a1 * kq1 + a2 * kq2;
        CHECK(got[c] == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("interpolation at training points with zero regularization") {
    Surrogate s(plain(0.5, 3.0, 0.0));
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::vector<Sample> set;
    for (int i = 0; i < 12; ++i) {
        InputPoint x{u(rng), u(rng) - 1.0, u(rng), u(rng) - 1.0};
        set.push_back(toy_oracle(x));
        s.add(set.back());
    }
    s.train();
    for (const Sample& smp : set) {
        OutputPoint p = s.predict(smp.x);
        for (int c = 0; c < 5; ++c) {
            double scale = std::max(1.0, std::abs(smp.y[c]));
            CHECK(std::abs(p[c] - smp.y[c]) / scale < 1e-8);
        }
    }
}

TEST_CASE("midpoint of two equal-output samples follows the closed form") {
    Surrogate s(plain(0.5, 10.0));
    InputPoint x1{1.8, 0.0, 0.3, 0.0};
    InputPoint x2{1.8, 0.05, 0.3, 0.0};
    OutputPoint y{0.15, 1.75, 0.25, 0.32, 0.04};
    s.add(mk(x1, y));
    s.add(mk(x2, y));
    s.train();
    InputPoint mid{1.8, 0.025, 0.3, 0.0};
    double k12 = std::exp(-10.0 * 0.0025);
    double kmid = std::exp(-10.0 * 0.000625);
    double factor = 2.0 * kmid / (1.0 + k12); // the interpolant overshoots by this
    OutputPoint p = s.predict(mid);
    for (int c = 0; c < 5; ++c) {
        CHECK(p[c] == doctest::Approx(y[c] * factor).epsilon(1e-12));
        // small separation: the overshoot factor is under one percent
        CHECK(p[c] == doctest::Approx(y[c]).epsilon(0.01));
    }
}

TEST_CASE("prediction decays to zero far from all samples") {
    Surrogate s(plain(0.5, 10.0));
    s.add(toy_oracle({1.8, 0.0, 0.3, 0.0}));
    s.train();
    OutputPoint p = s.predict({50.0, 50.0, 50.0, 50.0});
    for (int c = 0; c < 5; ++c) CHECK(std::abs(p[c]) < 1e-200);
}

TEST_CASE("score: empty set, stored point, nearest of two") {
    GateConfig g = plain();
    g.input_scaling = {2.0, 1.0, 1.0, 1.0};
    Surrogate s(g);
    InputPoint q{1.0, 0.0, 0.5, 0.0};
    CHECK(std::isinf(s.score(q)));

    InputPoint x1{1.0, 0.0, 0.5, 0.0};
    InputPoint x2{2.0, 0.0, 0.5, 0.4};
    s.add(toy_oracle(x1));
    s.add(toy_oracle(x2));
    CHECK(s.score(x1) == 0.0);

    // q2 sits at scaled distance 0.25 from x1 and sqrt(0.0625+0.16)=0.4717 from x2
    InputPoint q2{1.5, 0.0, 0.5, 0.0};
    CHECK(s.score(q2) == doctest::Approx(0.25).epsilon(1e-14));
    InputPoint q3{2.0, 0.0, 0.5, 0.3};
    CHECK(s.score(q3) == doctest::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("gate: empty set always samples, stored point never does") {
    Surrogate s(plain(0.5, 10.0, 1e-10));
    int calls = 0;
    auto oracle = [&](const InputPoint& x) {
        ++calls;
        return toy_oracle(x);
    };
    InputPoint x0{1.8, 0.0, 0.3, 0.0};
    GatedResult r0 = s.evaluate_gated(x0, oracle);
    CHECK(r0.sampled);
    CHECK(calls == 1);
    CHECK(s.size() == 1);
    // exact revisit: score 0 < epsilon, model path
    GatedResult r1 = s.evaluate_gated(x0, oracle);
    CHECK_FALSE(r1.sampled);
    CHECK(calls == 1);
    CHECK(s.size() == 1);
    // far point: must sample, set grows by exactly one
    InputPoint x2{1.8, 1.0, 0.3, 0.0};
    GatedResult r2 = s.evaluate_gated(x2, oracle);
    CHECK(r2.sampled);
    CHECK(calls == 2);
    CHECK(s.size() == 2);
}

TEST_CASE("gate boundary: score at or above epsilon forces the oracle") {
    Surrogate s(plain(0.3, 10.0, 1e-10));
    int calls = 0;
    auto oracle = [&](const InputPoint& x) {
        ++calls;
        return toy_oracle(x);
    };
    InputPoint x0{1.8, 0.0, 0.3, 0.0};
    s.evaluate_gated(x0, oracle);
    REQUIRE(calls == 1);
    InputPoint inside = x0;
    inside[1] += 0.29;
    s.evaluate_gated(inside, oracle);
    CHECK(calls == 1); // 0.29 < 0.3, model path
    InputPoint edge = x0;
    edge[1] += 0.3;
    s.evaluate_gated(edge, oracle);
    CHECK(calls == 2); // score == epsilon is NOT below the threshold
}

TEST_CASE("fresh oracle calls return the oracle's values, not the model's") {
    Surrogate s(plain(0.5, 10.0, 1e-10));
    auto oracle = [](const InputPoint& x) { return toy_oracle(x); };
    InputPoint x1{1.8, 0.0, 0.3, 0.0};
    s.evaluate_gated(x1, oracle);
    InputPoint x2{1.8, 2.0, 0.3, 0.0}; // far: model would predict near zero here
    GatedResult r = s.evaluate_gated(x2, oracle);
    Sample want = toy_oracle(x2);
    for (int c = 0; c < 5; ++c) CHECK(r.y[c] == want.y[c]);
}

TEST_CASE("adding at an existing input replaces the stored sample") {
    Surrogate s(plain());
    InputPoint x{1.8, 0.0, 0.3, 0.0};
    s.add(mk(x, {0.1, 1.0, 0.0, 1.0, 0.0}));
    s.add(mk(x, {0.7, 2.0, 0.1, 2.0, 0.1}));
    CHECK(s.size() == 1);
    CHECK(s.samples()[0].y[0] == 0.7);
    s.train();
    CHECK(s.predict(x)[0] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("prediction is invariant under sample-set permutation") {
    std::vector<Sample> set;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.2, 1.8);
    for (int i = 0; i < 8; ++i)
        set.push_back(toy_oracle({u(rng), u(rng) - 1.0, u(rng), u(rng) - 1.0}));

    Surrogate fwd(plain(0.5, 2.0, 1e-12));
    Surrogate rev(plain(0.5, 2.0, 1e-12));
    for (const Sample& s : set) fwd.add(s);
    for (auto it = set.rbegin(); it != set.rend(); ++it) rev.add(*it);
    fwd.train();
    rev.train();
    for (int t = 0; t < 10; ++t) {
        InputPoint q{u(rng), u(rng) - 1.0, u(rng), u(rng) - 1.0};
        OutputPoint a = fwd.predict(q);
        OutputPoint b = rev.predict(q);
        for (int c = 0; c < 5; ++c)
            CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-9));
    }
}

TEST_CASE("retraining on an unchanged set reproduces predictions bitwise") {
    Surrogate s(plain(0.5, 2.0, 1e-10));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.2, 1.8);
    for (int i = 0; i < 6; ++i)
        s.add(toy_oracle({u(rng), u(rng) - 1.0, u(rng), u(rng) - 1.0}));
    s.train();
    InputPoint q{1.0, 0.1, 0.9, -0.1};
    OutputPoint a = s.predict(q);
    s.train();
    OutputPoint b = s.predict(q);
    for (int c = 0; c < 5; ++c) CHECK(a[c] == b[c]);
}

TEST_CASE("sample store round-trips bitwise and restores the model") {
    const char* path = "tmp_store_roundtrip.csv";
    Surrogate s(plain(0.5, 2.0, 1e-10));
    s.add(mk({1.0 / 3.0, -0.1, 0.3141592653589793, 0.0},
             {0.1, 1.8071403273364048, 0.2, 0.31972996451885527, -0.05}));
    Sample withres = toy_oracle({1.9, 0.25, 0.31, -0.125});
    withres.rh_mass = 3.0e-3;
    withres.rh_mom = 1.0 / 7.0;
    s.add(withres);
    s.train();
    s.save_csv(path);

    Surrogate t(plain(0.5, 2.0, 1e-10));
    t.load_csv(path);
    REQUIRE(t.size() == 2);
    auto a = s.samples();
    auto b = t.samples();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int j = 0; j < 4; ++j) CHECK(a[i].x[j] == b[i].x[j]);
        for (int j = 0; j < 5; ++j) CHECK(a[i].y[j] == b[i].y[j]);
        CHECK(a[i].rh_mass == b[i].rh_mass);
        CHECK(a[i].rh_mom == b[i].rh_mom);
    }
    CHECK(t.trained());
    InputPoint q{1.0, 0.0, 0.5, 0.0};
    OutputPoint pa = s.predict(q);
    OutputPoint pb = t.predict(q);
    for (int c = 0; c < 5; ++c) CHECK(pa[c] == pb[c]);
    std::remove(path);
}

TEST_CASE("store loading rejects damaged files") {
    Surrogate s(plain());
    CHECK_THROWS_AS(s.load_csv("no_such_file_anywhere.csv"), IoError);

    const char* bad_header = "tmp_store_badheader.csv";
    {
        std::ofstream out(bad_header);
        out << "rho_L,m_L\n1,2\n";
    }
    CHECK_THROWS_AS(s.load_csv(bad_header), IoError);
    std::remove(bad_header);

    const char* bad_row = "tmp_store_badrow.csv";
    {
        std::ofstream out(bad_row);
        out << "rho_L,m_L,rho_R,m_R,s,rho_sL,m_sL,rho_sR,m_sR,rh_mass_res,rh_mom_res\n";
        out << "1.8,0,0.3,0,0.1,1.8,0.2,0.33,notanumber,0,0\n";
    }
    CHECK_THROWS_AS(s.load_csv(bad_row), IoError);
    std::remove(bad_row);

    const char* short_row = "tmp_store_shortrow.csv";
    {
        std::ofstream out(short_row);
        out << "rho_L,m_L,rho_R,m_R,s,rho_sL,m_sL,rho_sR,m_sR,rh_mass_res,rh_mom_res\n";
        out << "1.8,0,0.3,0,0.1\n";
    }
    CHECK_THROWS_AS(s.load_csv(short_row), IoError);
    std::remove(short_row);
}

TEST_CASE("nested thresholds on one deterministic stream order the call counts") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<InputPoint> stream;
    for (int i = 0; i < 60; ++i)
        stream.push_back({1.5 + u(rng), 0.5 * u(rng) - 0.25, 0.2 + 0.4 * u(rng),
                          0.2 * u(rng) - 0.1});

    auto run = [&](double eps) {
        Surrogate s(plain(eps, 2.0, 1e-10));
        int calls = 0;
        auto oracle = [&](const InputPoint& x) {
            ++calls;
            return toy_oracle(x);
        };
        for (const InputPoint& x : stream) s.evaluate_gated(x, oracle);
        return calls;
    };
    int c1 = run(0.25);
    int c2 = run(0.5);
    int c3 = run(1.0);
    CHECK(c2 <= c1);
    CHECK(c3 <= c2);
    CHECK(c1 <= 60);
    CHECK(c3 >= 1);
}

TEST_CASE("error paths: untrained predict, empty train, bad config, bad samples") {
    Surrogate s(plain());
    InputPoint q{1.0, 0.0, 0.5, 0.0};
    CHECK_THROWS_AS(s.predict(q), DomainError);
    CHECK_THROWS_AS(s.train(), DomainError);
    s.add(toy_oracle(q));
    CHECK_THROWS_AS(s.predict(q), DomainError); // added but not yet trained
    s.train();
    CHECK_NOTHROW(s.predict(q));

    GateConfig bad;
    bad.epsilon_model = 0.0;
    CHECK_THROWS_AS(Surrogate{bad}, ConfigError);
    GateConfig bad2;
    bad2.input_scaling = {1.0, 0.0, 1.0, 1.0};
    CHECK_THROWS_AS(Surrogate{bad2}, ConfigError);

    Sample neg = mk({-1.0, 0.0, 0.3, 0.0}, {0.1, 1.0, 0.0, 1.0, 0.0});
    CHECK_THROWS_AS(s.add(neg), DomainError);
    Sample nan = mk({1.0, 0.0, 0.3, 0.0},
                    {std::numeric_limits<double>::quiet_NaN(), 1.0, 0.0, 1.0, 0.0});
    CHECK_THROWS_AS(s.add(nan), DomainError);
}

TEST_CASE("oracle failure leaves the surrogate untouched") {
    Surrogate s(plain(0.5, 10.0, 1e-10));
    s.add(toy_oracle({1.8, 0.0, 0.3, 0.0}));
    s.train();
    auto broken = [](const InputPoint&) -> Sample { throw ExtractionError("no wave found"); };
    InputPoint far{1.8, 3.0, 0.3, 0.0};
    CHECK_THROWS_AS(s.evaluate_gated(far, broken), ExtractionError);
    CHECK(s.size() == 1);
    CHECK(s.trained());
}

TEST_CASE("default input scaling uses coexistence liquid values") {
    VdwEos eos(3.0, 1.0 / 3.0, 8.0 / 3.0, 0.85);
    auto sc = default_input_scaling(eos);
    double rho_l = 1.0 / eos.maxwell().tau_l;
    double c = eos.sound_speed(rho_l);
    CHECK(sc[0] == rho_l);
    CHECK(sc[1] == rho_l * c);
    CHECK(sc[2] == rho_l);
    CHECK(sc[3] == rho_l * c);
    CHECK(sc[0] == doctest::Approx(1.807).epsilon(0.01));
}
