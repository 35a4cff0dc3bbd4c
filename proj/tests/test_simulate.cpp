#include <cmath>
#include <numbers>

#include <doctest.h>

#include "lil/io.hpp"
#include "lil/simulate.hpp"
#include "testutil.hpp"

using namespace lil;
constexpr double kPi = std::numbers::pi;

namespace {

ManifoldSpec circle2pi() { return ManifoldSpec::circle(2.0 * kPi); }

SimConfig circle_config(double T, double h, uint64_t seed,
                        std::vector<SpectralFunction> obs) {
    SimConfig cfg;
    cfg.manifold = circle2pi();
    cfg.start = cfg.manifold.make_point({0.0});
    cfg.step_h = h;
    cfg.t_max = T;
    cfg.seed = seed;
    cfg.observables = std::move(obs);
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    auto cfg = circle_config(100.0, 0.01, 1, {});
    CHECK_NOTHROW(Simulator{cfg});
    auto bad = cfg;
    bad.step_h = 0.2;
    CHECK_THROWS(Simulator{bad});
    bad = cfg;
    bad.t_max = 2.0;
    CHECK_THROWS(Simulator{bad});
    bad = cfg;
    bad.checkpoints.ratio = 1.0;
    CHECK_THROWS(Simulator{bad});
    bad = cfg;
    bad.checkpoints.ratio = 2.5;
    CHECK_THROWS(Simulator{bad});
    bad = cfg;
    bad.checkpoints.first = 2.0;
    CHECK_THROWS(Simulator{bad});
    bad = cfg;
    bad.observables = {SpectralFunction::basis_mode(ManifoldSpec::circle(1.0), 1)};
    CHECK_THROWS(Simulator{bad});
}

TEST_CASE("constant observable accumulates c m0^{-1/2} t") {
    const double c = 3.25;
    auto cfg = circle_config(50.0, 0.01, 5, {SpectralFunction::basis_mode(circle2pi(), 0, c)});
    Simulator sim(cfg);
    auto state = sim.init_path(0);
    for (int i = 0; i < 5000; ++i) sim.step(state);
    const double t = state.time(cfg.step_h);
    const double expect = c / std::sqrt(2.0 * kPi) * t;
    CHECK(std::abs(state.occupation[0] - expect) <= 1e-12 * std::abs(expect));
}

TEST_CASE("unwrapped circle increments are Gaussian with variance h") {
    const double h = 0.01, L = 2.0 * kPi;
    int passed = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto cfg = circle_config(3.0 + 100000 * h, h, seed, {});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        std::vector<double> incs;
        incs.reserve(100000);
        double prev = s.position.coords[0];
        for (int i = 0; i < 100000; ++i) {
            sim.step(s);
            double d = s.position.coords[0] - prev;
            if (d > L / 2) d -= L;       // min-image unwrap; steps are far below L/2
            if (d < -L / 2) d += L;
            incs.push_back(d);
            prev = s.position.coords[0];
        }
        double p = testutil::ks_test_pvalue(std::move(incs), [h](double x) {
            return testutil::normal_cdf(x / std::sqrt(h));
        });
        if (p > 0.01) ++passed;
    }
    CHECK(passed >= 9);
}

TEST_CASE("sphere path stays on the sphere for 1e6 steps") {
    SimConfig cfg;
    cfg.manifold = ManifoldSpec::sphere2();
    cfg.start = cfg.manifold.make_point({0.0, 0.0, 1.0});
    cfg.step_h = 0.01;
    cfg.t_max = 10000.0;
    cfg.seed = 3;
    Simulator sim(cfg);
    auto s = sim.init_path(0);
    for (int i = 0; i < 1000000; ++i) sim.step(s);
    double n2 = 0.0;
    for (double c : s.position.coords) n2 += c * c;
    CHECK(std::abs(std::sqrt(n2) - 1.0) < 1e-12);
}

TEST_CASE("horizon is enforced") {
    auto cfg = circle_config(3.0, 0.1, 1, {});
    Simulator sim(cfg);
    auto s = sim.init_path(0);
    for (int i = 0; i < 30; ++i) sim.step(s);
    CHECK_THROWS(sim.step(s));
}

TEST_CASE("mu_t") {
    auto m = circle2pi();
    SUBCASE("constant observable gives exactly zero") {
        auto cfg = circle_config(20.0, 0.01, 2, {SpectralFunction::basis_mode(m, 0, 2.0)});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        for (int i = 0; i < 2000; ++i) sim.step(s);
        CHECK(std::abs(sim.mu(s, 0)) < 1e-12);
    }
    SUBCASE("zero observable gives zero") {
        SpectralFunction z;
        z.manifold = m;
        z.coeffs = {0.0, 0.0};
        auto cfg = circle_config(20.0, 0.01, 2, {z});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        for (int i = 0; i < 1000; ++i) sim.step(s);
        CHECK(sim.mu(s, 0) == 0.0);
    }
    SUBCASE("linearity over stored accumulators") {
        auto f = SpectralFunction::basis_mode(m, 1);
        auto g = SpectralFunction::basis_mode(m, 2);
        SpectralFunction combo;
        combo.manifold = m;
        combo.coeffs = {0.0, 2.5, -1.25};
        auto cfg = circle_config(50.0, 0.01, 7, {f, g, combo});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        for (int i = 0; i < 5000; ++i) sim.step(s);
        double lhs = sim.mu(s, 2);
        double rhs = 2.5 * sim.mu(s, 0) - 1.25 * sim.mu(s, 1);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
    SUBCASE("undefined before t = 3") {
        auto cfg = circle_config(20.0, 0.01, 2, {SpectralFunction::basis_mode(m, 1)});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        for (int i = 0; i < 100; ++i) sim.step(s);  // t = 1
        CHECK_THROWS(sim.mu(s, 0));
    }
}

TEST_CASE("trapezoid accumulator is second order on a smooth driver") {
    // constant-speed winding X_s = s mod L with f = phi_1:
    // exact L_T = sin(T)/sqrt(pi)
    auto m = circle2pi();
    const double T = 100.0;
    auto run = [&](double h) {
        auto cfg = circle_config(T, h, 1, {SpectralFunction::basis_mode(m, 1)});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        const auto n = static_cast<uint64_t>(std::llround(T / h));
        for (uint64_t i = 1; i <= n; ++i)
            sim.advance_to(s, m.make_point({static_cast<double>(i) * h}));
        return s.occupation[0];
    };
    const double exact = std::sin(T) / std::sqrt(kPi);
    double e1 = std::abs(run(0.02) - exact);
    double e2 = std::abs(run(0.01) - exact);
    CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("occupation ergodicity: |L_t(f)/t| small at t = 1e5") {
    auto m = circle2pi();
    auto f = SpectralFunction::basis_mode(m, 1);  // ||f||_L2 = 1
    int passed = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto cfg = circle_config(1e5, 0.1, seed, {f});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        for (int i = 0; i < 1000000; ++i) sim.step(s);
        if (std::abs(s.occupation[0] / s.time(cfg.step_h)) <= 0.05) ++passed;
    }
    CHECK(passed >= 9);
}

TEST_CASE("occupation histogram is uniform (chi-squared, 32 bins)") {
    // positions sampled every 10 time units so the chi-squared null applies
    const double h = 0.1, L = 2.0 * kPi;
    const int bins = 32;
    int passed = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto cfg = circle_config(1e5, h, seed, {});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        std::vector<int> counts(bins, 0);
        int n_samples = 0;
        for (int i = 0; i < 1000000; ++i) {
            sim.step(s);
            if (i % 100 == 99) {  // every 10 time units
                int b = std::min(bins - 1, static_cast<int>(s.position.coords[0] / L * bins));
                ++counts[static_cast<size_t>(b)];
                ++n_samples;
            }
        }
        double expect = static_cast<double>(n_samples) / bins;
        double stat = 0.0;
        for (int c : counts) stat += (c - expect) * (c - expect) / expect;
        if (testutil::chi2_pvalue(stat, bins - 1) > 0.01) ++passed;
    }
    CHECK(passed >= 9);
}

TEST_CASE("ensemble determinism and additivity") {
    auto m = circle2pi();
    auto f = SpectralFunction::basis_mode(m, 1);
    SUBCASE("identical (seed, config) twice is bitwise identical") {
        auto cfg = circle_config(100.0, 0.05, 11, {f});
        Simulator sim(cfg);
        auto a = sim.run_ensemble(4, 1);
        auto b = sim.run_ensemble(4, 1);
        REQUIRE(a.paths.size() == b.paths.size());
        for (size_t j = 0; j < a.paths.size(); ++j) {
            REQUIRE(a.paths[j].checkpoints.size() == b.paths[j].checkpoints.size());
            CHECK(a.paths[j].final_state.position.coords == b.paths[j].final_state.position.coords);
            CHECK(a.paths[j].final_state.occupation == b.paths[j].final_state.occupation);
            for (size_t c = 0; c < a.paths[j].checkpoints.size(); ++c)
                CHECK(a.paths[j].checkpoints[c].mu == b.paths[j].checkpoints[c].mu);
        }
    }
    SUBCASE("thread count does not change results") {
        auto cfg = circle_config(50.0, 0.05, 13, {f});
        Simulator sim(cfg);
        auto a = sim.run_ensemble(6, 1);
        auto b = sim.run_ensemble(6, 3);
        for (size_t j = 0; j < a.paths.size(); ++j) {
            CHECK(a.paths[j].final_state.position.coords == b.paths[j].final_state.position.coords);
            CHECK(a.paths[j].final_state.occupation == b.paths[j].final_state.occupation);
        }
    }
    SUBCASE("one long run equals two resumed segments, bitwise") {
        auto cfg = circle_config(1000.0, 0.1, 17, {f});
        Simulator sim(cfg);
        auto s = sim.init_path(0);
        PathState snapshot;
        for (int i = 0; i < 10000; ++i) {
            sim.step(s);
            if (s.step_index == 5000) {
                // serialize through the resume JSON to prove the snapshot is lossless
                snapshot = path_state_from_json(json::parse(to_json(s).dump()));
            }
        }
        auto resumed = snapshot;
        for (int i = 5000; i < 10000; ++i) sim.step(resumed);
        CHECK(resumed.position.coords == s.position.coords);
        CHECK(resumed.occupation == s.occupation);
        CHECK(resumed.prev_values == s.prev_values);
        CHECK(resumed.step_index == s.step_index);
    }
}

TEST_CASE("ensemble statistics at moderate scale") {
    auto m = circle2pi();
    auto f = SpectralFunction::basis_mode(m, 1);
    SUBCASE("variance of t^{-1/2} L_t(phi_1) near 2/pi") {
        auto cfg = circle_config(200.0, 0.01, 21, {f});
        cfg.checkpoints.ratio = 2.0;
        Simulator sim(cfg);
        auto ens = sim.run_ensemble(256, 1);
        std::vector<double> vals;
        for (const auto& p : ens.paths)
            vals.push_back(p.final_state.occupation[0] / std::sqrt(cfg.t_max));
        double v = testutil::sample_variance(vals);
        CHECK(std::abs(v - 2.0 / kPi) < 0.3 * (2.0 / kPi));
    }
    SUBCASE("uniform start gives mean within 3 standard errors of zero") {
        auto cfg = circle_config(200.0, 0.01, 23, {f});
        cfg.start_mode = StartMode::Uniform;
        cfg.checkpoints.ratio = 2.0;
        Simulator sim(cfg);
        auto ens = sim.run_ensemble(256, 1);
        std::vector<double> vals;
        for (const auto& p : ens.paths)
            vals.push_back(p.final_state.occupation[0] / std::sqrt(cfg.t_max));
        double mean = testutil::mean(vals);
        double se = std::sqrt(testutil::sample_variance(vals) / static_cast<double>(vals.size()));
        CHECK(std::abs(mean) <= 3.0 * se);
    }
}

TEST_CASE("checkpoint schedule is geometric, starts at >= 3, strictly increases") {
    auto cfg = circle_config(1000.0, 0.1, 1, {SpectralFunction::basis_mode(circle2pi(), 1)});
    Simulator sim(cfg);
    const auto& steps = sim.checkpoint_steps();
    REQUIRE(!steps.empty());
    CHECK(static_cast<double>(steps.front()) * cfg.step_h >= 3.0);
    for (size_t i = 1; i < steps.size(); ++i) CHECK(steps[i] > steps[i - 1]);
    auto res = sim.run_path(0);
    CHECK(res.checkpoints.size() == steps.size());
    for (const auto& cp : res.checkpoints) CHECK(cp.t >= 3.0);
}
