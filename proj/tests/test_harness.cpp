#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "lil/characterize.hpp"
#include "lil/harness.hpp"
#include "testutil.hpp"

using namespace lil;
constexpr double kPi = std::numbers::pi;

namespace {

ManifoldSpec circle2pi() { return ManifoldSpec::circle(2.0 * kPi); }

Checkpoint make_cp(double t, std::vector<double> mu) {
    Checkpoint cp;
    cp.t = t;
    cp.mu = std::move(mu);
    cp.occupation.assign(cp.mu.size(), 0.0);
    return cp;
}

}  // namespace

TEST_CASE("make_basis") {
    auto m = circle2pi();
    SUBCASE("f_1 = (1/sqrt 2) phi_1, f_2 = (1/sqrt 2) phi_2 (lambda = 1)") {
        auto basis = make_basis(m, 2);
        CHECK(basis.functions[0].coeffs[1] == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-15));
        CHECK(basis.functions[1].coeffs[2] == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-15));
    }
    SUBCASE("Green-Gram identity up to n = 32") {
        auto basis = make_basis(m, 32);
        for (int i = 0; i < 32; ++i) {
            for (int j = i; j < 32; ++j) {
                // polarization through the quadratic form keeps this an
                // independent route from ellipsoid_from's direct sum
                SpectralFunction sum = basis.functions[static_cast<size_t>(i)];
                sum.coeffs.resize(33, 0.0);
                SpectralFunction diff = sum;
                const auto& fj = basis.functions[static_cast<size_t>(j)].coeffs;
                for (size_t n = 0; n < fj.size(); ++n) {
                    sum.coeffs[n] += fj[n];
                    diff.coeffs[n] -= fj[n];
                }
                double gram = 0.25 * (green_quadratic_form(sum) - green_quadratic_form(diff));
                CHECK(std::abs(gram - (i == j ? 1.0 : 0.0)) <= 1e-12);
            }
        }
    }
    SUBCASE("sigma of f_1 is sqrt(2/m0)") {
        auto basis = make_basis(m, 1);
        CHECK(lil_sigma(basis.functions[0]) == doctest::Approx(std::sqrt(1.0 / kPi)).epsilon(1e-14));
    }
    SUBCASE("n must be positive") { CHECK_THROWS(make_basis(m, 0)); }
}

TEST_CASE("ellipsoid_from") {
    auto m = circle2pi();
    SUBCASE("default basis gives the ball of radius sqrt(2/m0)") {
        auto basis = make_basis(m, 2);
        auto e = ellipsoid_from(basis.functions, m);
        CHECK(e.a(0, 0) == doctest::Approx(kPi).epsilon(1e-13));
        CHECK(e.a(1, 1) == doctest::Approx(kPi).epsilon(1e-13));
        CHECK(std::abs(e.a(0, 1)) < 1e-13);
        // boundary: |v| = sqrt(1/pi)
        double r = std::sqrt(1.0 / kPi);
        auto bm = ball_membership(std::vector<double>{r, 0.0}, e);
        CHECK(std::abs(bm.form_value - 1.0) <= 1e-12);
        CHECK(bm.member);
        auto out = ball_membership(std::vector<double>{0.6, 0.0}, e);
        CHECK_FALSE(out.member);
        auto zero = ball_membership(std::vector<double>{0.0, 0.0}, e);
        CHECK(zero.member);
        CHECK(zero.form_value == 0.0);
    }
    SUBCASE("duplicated functions are rejected as singular") {
        auto f1 = SpectralFunction::basis_mode(m, 1);
        CHECK_THROWS(ellipsoid_from({f1, f1}, m));
    }
    SUBCASE("scaled functions match a dense 2x2 inversion oracle") {
        auto basis = make_basis(m, 2);
        auto f1 = basis.functions[0];
        for (double& c : f1.coeffs) c *= 2.0;
        auto e = ellipsoid_from({f1, basis.functions[1]}, m);
        // oracle: Gram by polarization, then Cramer inversion, a = (m0/2) B^-1
        auto gram = [&](const SpectralFunction& u, const SpectralFunction& v) {
            SpectralFunction sum = u, diff = u;
            sum.coeffs.resize(3, 0.0);
            diff.coeffs.resize(3, 0.0);
            for (size_t n = 0; n < v.coeffs.size(); ++n) {
                sum.coeffs[n] += v.coeffs[n];
                diff.coeffs[n] -= v.coeffs[n];
            }
            return 0.25 * (green_quadratic_form(sum) - green_quadratic_form(diff));
        };
        double b11 = gram(f1, f1), b12 = gram(f1, basis.functions[1]),
               b22 = gram(basis.functions[1], basis.functions[1]);
        double det = b11 * b22 - b12 * b12;
        double m0 = 2.0 * kPi;
        CHECK(e.a(0, 0) == doctest::Approx(m0 / 2.0 * b22 / det).epsilon(1e-12));
        CHECK(e.a(1, 1) == doctest::Approx(m0 / 2.0 * b11 / det).epsilon(1e-12));
        CHECK(e.a(0, 1) == doctest::Approx(-m0 / 2.0 * b12 / det).epsilon(1e-10));
        // membership region doubles along axis 1: boundary at 2 sqrt(2/m0)
        double r = std::sqrt(1.0 / kPi);
        CHECK(ball_membership(std::vector<double>{2.0 * r * 0.999, 0.0}, e).member);
        CHECK_FALSE(ball_membership(std::vector<double>{2.0 * r * 1.01, 0.0}, e).member);
    }
    SUBCASE("membership transforms exactly under coordinate scaling") {
        auto basis = make_basis(m, 2);
        auto scaled = basis.functions;
        const double c = 2.0;
        for (double& x : scaled[0].coeffs) x *= c;
        auto e_orig = ellipsoid_from(basis.functions, m);
        auto e_scaled = ellipsoid_from(scaled, m);
        std::mt19937_64 rng(99);
        std::normal_distribution<double> gauss;
        for (int rep = 0; rep < 50; ++rep) {
            double v1 = gauss(rng), v2 = gauss(rng);
            auto a = ball_membership(std::vector<double>{v1, v2}, e_scaled);
            auto b = ball_membership(std::vector<double>{v1 / c, v2}, e_orig);
            CHECK(a.form_value == doctest::Approx(b.form_value).epsilon(1e-11));
            CHECK(a.member == b.member);
        }
    }
    SUBCASE("non-mean-zero input rejected") {
        CHECK_THROWS(ellipsoid_from({SpectralFunction::basis_mode(m, 0)}, m));
    }
    SUBCASE("dimension mismatch in membership") {
        auto e = ellipsoid_from(make_basis(m, 2).functions, m);
        CHECK_THROWS(ball_membership(std::vector<double>{1.0}, e));
    }
}

TEST_CASE("accepted densities land in every ball (first-condition bound)") {
    auto m = circle2pi();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    auto basis = make_basis(m, 32);
    auto e32 = ellipsoid_from(basis.functions, m);
    for (int rep = 0; rep < 20; ++rep) {
        SpectralFunction g;
        g.manifold = m;
        g.coeffs.assign(33, 0.0);
        for (int n = 1; n <= 32; ++n) g.coeffs[static_cast<size_t>(n)] = gauss(rng);
        // scale to sit strictly inside the membership threshold
        CandidateDensity cand{g};
        auto rep0 = check(cand, m);
        double scale = 0.9 * rep0.threshold / rep0.g_half_inv_norm;
        for (double& c : cand.g.coeffs) c *= scale;
        REQUIRE(check(cand, m).member);
        for (int n : {1, 2, 8, 32}) {
            std::vector<double> v;
            for (int k = 1; k <= n; ++k)
                v.push_back(mu_of(cand, basis.functions[static_cast<size_t>(k - 1)]));
            auto en = n == 32 ? e32 : ellipsoid_from(
                std::vector<SpectralFunction>(basis.functions.begin(), basis.functions.begin() + n), m);
            CHECK(ball_membership(v, en).member);
        }
    }
}

TEST_CASE("cluster cloud") {
    SUBCASE("assembly and zero observable") {
        std::vector<Checkpoint> cps = {make_cp(3.0, {0.0, 0.0}), make_cp(4.0, {0.0, 0.0})};
        auto cloud = cluster_cloud(cps, 2);
        CHECK(cloud.times.size() == 2);
        for (const auto& v : cloud.v)
            for (double x : v) CHECK(x == 0.0);
    }
    SUBCASE("rejects non-increasing times and t < 3") {
        std::vector<Checkpoint> bad = {make_cp(4.0, {0.0}), make_cp(4.0, {0.0})};
        CHECK_THROWS(cluster_cloud(bad, 1));
        std::vector<Checkpoint> early = {make_cp(2.0, {0.0})};
        CHECK_THROWS(cluster_cloud(early, 1));
    }
    SUBCASE("containment and angular coverage on synthetic data") {
        auto m = circle2pi();
        auto e = ellipsoid_from(make_basis(m, 2).functions, m);
        const double r = std::sqrt(1.0 / kPi);
        ClusterCloud cloud;
        double t = 1000.0;
        for (int b = 0; b < 16; ++b) {
            double angle = (b + 0.5) * 2.0 * kPi / 16.0;
            cloud.times.push_back(t);
            cloud.v.push_back({0.5 * r * std::cos(angle), 0.5 * r * std::sin(angle)});
            t *= 1.1;
        }
        cloud.times.push_back(t);
        cloud.v.push_back({2.0 * r, 0.0});  // one far outlier
        auto rep = analyze_cloud(cloud, e, 0.25, 0.0, m.volume());
        CHECK(rep.points_considered == 17);
        CHECK(rep.points_inside == 16);
        CHECK(rep.containment_fraction == doctest::Approx(16.0 / 17.0));
        CHECK(rep.angular_bins_total == 16);
        CHECK(rep.angular_bins_covered == 16);
        CHECK(rep.max_form_value == doctest::Approx(4.0).epsilon(1e-12));
        // t_min filter drops early rows
        auto rep2 = analyze_cloud(cloud, e, 0.25, 2000.0, m.volume());
        CHECK(rep2.points_considered < 17);
    }
}

TEST_CASE("running limsup") {
    SUBCASE("running max is nondecreasing and ratio scales by sigma") {
        std::vector<Checkpoint> cps;
        double vals[] = {0.1, 0.5, 0.3, 0.7, 0.2};
        double t = 100.0;
        for (double v : vals) {
            cps.push_back(make_cp(t, {v}));
            t *= 2.0;
        }
        auto rows = running_limsup(cps, 0, 2.0, 100.0);
        REQUIRE(rows.size() == 5);
        for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].running_max >= rows[i - 1].running_max);
        CHECK(rows[3].running_max == 0.7);
        CHECK(rows[3].ratio_to_sigma == doctest::Approx(0.35));
    }
    SUBCASE("window start below 3 rejected") {
        std::vector<Checkpoint> cps = {make_cp(5.0, {0.1})};
        CHECK_THROWS(running_limsup(cps, 0, 1.0, 2.0));
    }
    SUBCASE("constant observable yields all zeros") {
        std::vector<Checkpoint> cps = {make_cp(3.0, {0.0}), make_cp(6.0, {0.0})};
        auto rows = running_limsup(cps, 0, 1.0, 3.0);
        for (const auto& r : rows) CHECK(r.running_max == 0.0);
    }
}

TEST_CASE("chase_target") {
    auto m = circle2pi();
    auto e1 = ellipsoid_from({make_basis(m, 1).functions[0]}, m);
    SUBCASE("achieves the schedule on a synthetic trajectory") {
        std::vector<Checkpoint> cps;
        // v wanders: hits 0.0 at t=5, then 0.2 at t=9 (within eps of target later)
        double ts[] = {3.0, 5.0, 7.0, 9.0, 11.0};
        double vs[] = {0.4, 0.01, 0.3, 0.05, 0.02};
        for (int i = 0; i < 5; ++i) cps.push_back(make_cp(ts[i], {vs[i]}));
        std::vector<double> target = {0.0};
        std::vector<double> eps = {0.05};
        auto res = chase_target(cps, target, eps, e1, 100.0);
        CHECK(res.success);
        REQUIRE(res.achieved_times.size() == 1);
        CHECK(res.achieved_times[0] == 5.0);
        CHECK(res.achieved_errors[0] < 0.05);
    }
    SUBCASE("two-stage schedule uses strictly increasing times") {
        auto e2 = ellipsoid_from(make_basis(m, 2).functions, m);
        std::vector<Checkpoint> cps;
        cps.push_back(make_cp(3.0, {0.02, 0.5}));   // stage 1 candidate
        cps.push_back(make_cp(4.0, {0.01, 0.01}));  // would satisfy both, but stage 2 must come later
        cps.push_back(make_cp(5.0, {0.3, 0.3}));
        cps.push_back(make_cp(6.0, {0.03, 0.03}));
        std::vector<double> target = {0.0, 0.0};
        std::vector<double> eps = {0.1, 0.1};
        auto res = chase_target(cps, target, eps, e2, 100.0);
        CHECK(res.success);
        REQUIRE(res.achieved_times.size() == 2);
        CHECK(res.achieved_times[0] == 3.0);
        CHECK(res.achieved_times[1] == 4.0);
        CHECK(res.achieved_times[1] > res.achieved_times[0]);
        for (size_t k = 0; k < 2; ++k) CHECK(res.achieved_errors[k] < eps[k]);
    }
    SUBCASE("budget exhaustion reports best errors, never wrong times") {
        std::vector<Checkpoint> cps = {make_cp(3.0, {0.4}), make_cp(6.0, {0.3})};
        std::vector<double> target = {0.0};
        std::vector<double> eps = {0.01};
        auto res = chase_target(cps, target, eps, e1, 10.0);
        CHECK_FALSE(res.success);
        CHECK(res.achieved_times.empty());
        CHECK(res.best_errors[0] == doctest::Approx(0.3));
    }
    SUBCASE("preconditions") {
        std::vector<Checkpoint> cps = {make_cp(3.0, {0.0})};
        std::vector<double> eps = {0.1};
        // outside (or on) the ball: radius is sqrt(1/pi) ~ 0.5642
        std::vector<double> outside = {0.6};
        CHECK_THROWS(chase_target(cps, outside, eps, e1, 10.0));
        std::vector<double> boundary = {std::sqrt(1.0 / kPi)};
        CHECK_THROWS(chase_target(cps, boundary, eps, e1, 10.0));
        std::vector<double> target = {0.0};
        std::vector<double> bad_eps = {-0.1};
        CHECK_THROWS(chase_target(cps, target, bad_eps, e1, 10.0));
        std::vector<double> target2 = {0.0, 0.0};
        auto e2 = ellipsoid_from(make_basis(m, 2).functions, m);
        std::vector<double> increasing = {0.1, 0.2};
        CHECK_THROWS(chase_target(cps, target2, increasing, e2, 10.0));
    }
}

TEST_CASE("uniform bound surrogate") {
    auto m = circle2pi();
    const int n_modes = 20;
    // checkpoints from a real short run with raw modes as observables
    std::vector<SpectralFunction> modes;
    std::vector<double> lambdas;
    EigenBasis basis(m, SpectralTruncation(n_modes));
    for (int k = 1; k <= n_modes; ++k) {
        modes.push_back(SpectralFunction::basis_mode(m, k));
        lambdas.push_back(basis.lambda(k));
    }
    SimConfig cfg;
    cfg.manifold = m;
    cfg.start = m.make_point({0.0});
    cfg.step_h = 0.1;
    cfg.t_max = 300.0;
    cfg.seed = 31;
    cfg.observables = modes;
    Simulator sim(cfg);
    auto path = sim.run_path(0);

    std::mt19937_64 rng(55);
    std::normal_distribution<double> gauss;
    std::vector<SpectralFunction> tests;
    for (int rep = 0; rep < 50; ++rep) {
        SpectralFunction f;
        f.manifold = m;
        f.coeffs.assign(n_modes + 1, 0.0);
        for (int n = 1; n <= n_modes; ++n) f.coeffs[static_cast<size_t>(n)] = gauss(rng);
        tests.push_back(std::move(f));
    }

    SUBCASE("coefficient Cauchy-Schwarz holds at every checkpoint") {
        auto rep = uniform_bound_check(path.checkpoints, lambdas, 1.0, tests, 1);
        CHECK(rep.surrogate_ok);
        CHECK(rep.max_violation <= 1e-10);
        CHECK(rep.empirical_C > 0.0);
        CHECK(std::isfinite(rep.empirical_C));
    }
    SUBCASE("unit H-norm mode is bounded by the recorded constant") {
        auto f = SpectralFunction::basis_mode(m, 1, std::pow(basis.lambda(1), -0.5));
        auto rep = uniform_bound_check(path.checkpoints, lambdas, 1.0, {f}, 1);
        for (const auto& cp : path.checkpoints) {
            double mu_f = f.coeffs[1] * cp.mu[0];
            CHECK(std::abs(mu_f) <= rep.empirical_C * (1.0 + 1e-12));
        }
    }
    SUBCASE("doubling f doubles both sides exactly") {
        auto f = tests[0];
        auto f2 = f;
        for (double& c : f2.coeffs) c *= 2.0;
        const auto& cp = path.checkpoints.back();
        auto side = [&](const SpectralFunction& u) {
            double mu_f = 0.0, norm2 = 0.0;
            for (size_t n = 1; n < u.coeffs.size(); ++n) {
                mu_f += u.coeffs[n] * cp.mu[n - 1];
                norm2 += lambdas[n - 1] * u.coeffs[n] * u.coeffs[n];
            }
            return std::pair{std::abs(mu_f), std::sqrt(norm2)};
        };
        auto [l1, r1] = side(f);
        auto [l2, r2] = side(f2);
        CHECK(l2 == 2.0 * l1);
        CHECK(r2 == 2.0 * r1);
    }
    SUBCASE("alpha range enforced") {
        CHECK_THROWS(uniform_bound_check(path.checkpoints, lambdas, 0.5, tests, 1));
        CHECK_THROWS(uniform_bound_check(path.checkpoints, lambdas, 1.0, tests, 2));
    }
}
