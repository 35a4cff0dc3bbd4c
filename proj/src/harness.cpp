#include "lil/harness.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lil {

ObservableBasis make_basis(const ManifoldSpec& m, int n) {
    if (n < 1) throw std::invalid_argument("make_basis: n must be >= 1");
    EigenBasis basis(m, SpectralTruncation(n));
    if (basis.size() <= n)
        throw std::out_of_range("make_basis: n exceeds available modes");
    ObservableBasis out;
    out.n = n;
    for (int k = 1; k <= n; ++k)
        out.functions.push_back(
            SpectralFunction::basis_mode(m, k, std::sqrt(basis.lambda(k) / 2.0)));
    return out;
}

EllipsoidSpec ellipsoid_from(const std::vector<SpectralFunction>& functions,
                             const ManifoldSpec& m) {
    const int n = static_cast<int>(functions.size());
    if (n < 1) throw std::invalid_argument("ellipsoid_from: need at least one function");
    for (const auto& f : functions) {
        if (!(f.manifold == m))
            throw std::invalid_argument("ellipsoid_from: function on a different manifold");
        if (!f.mean_zero())
            throw std::invalid_argument("ellipsoid_from: functions must be mean-zero");
    }
    // Green-Gram matrix B_ij = (f_i, G f_j) = sum_n 2 lambda_n^{-1} f_i[n] f_j[n]
    size_t max_len = 0;
    for (const auto& f : functions) max_len = std::max(max_len, f.coeffs.size());
    SpectralFunction probe;
    probe.manifold = m;
    probe.coeffs.assign(max_len, 0.0);
    auto lam = eigenvalues_for(probe);

    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            size_t len = std::min(functions[static_cast<size_t>(i)].coeffs.size(),
                                  functions[static_cast<size_t>(j)].coeffs.size());
            for (size_t k = 1; k < len; ++k)
                s += 2.0 / lam[k] * functions[static_cast<size_t>(i)].coeffs[k] *
                     functions[static_cast<size_t>(j)].coeffs[k];
            B(i, j) = s;
            B(j, i) = s;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const auto& ev = es.eigenvalues();
    double emin = ev(0), emax = ev(n - 1);
    if (!(emin > 0.0) || emax / emin > 1e12)
        throw std::invalid_argument(
            "ellipsoid_from: Green-Gram matrix is singular or near-singular "
            "(functions linearly dependent)");

    EllipsoidSpec e;
    e.a = (m.volume() / 2.0) *
          (es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose());
    e.a = 0.5 * (e.a + e.a.transpose().eval());  // keep symmetric to the last bit
    return e;
}

BallMembership ball_membership(std::span<const double> v, const EllipsoidSpec& e) {
    if (static_cast<int>(v.size()) != e.dim())
        throw std::invalid_argument("ball_membership: dimension mismatch");
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), e.dim());
    double q = vv.dot(e.a * vv);
    return {q, q <= 1.0 + 1e-12};
}

ClusterCloud cluster_cloud(const std::vector<Checkpoint>& checkpoints, int n) {
    ClusterCloud cloud;
    for (const auto& cp : checkpoints) {
        if (static_cast<int>(cp.mu.size()) < n)
            throw std::invalid_argument("cluster_cloud: checkpoint has fewer observables than n");
        if (!cloud.times.empty() && cp.t <= cloud.times.back())
            throw std::invalid_argument("cluster_cloud: checkpoint times must be strictly increasing");
        if (cp.t < 3.0)
            throw std::invalid_argument("cluster_cloud: checkpoints must have t >= 3");
        cloud.times.push_back(cp.t);
        cloud.v.emplace_back(cp.mu.begin(), cp.mu.begin() + n);
    }
    return cloud;
}

CloudReport analyze_cloud(const ClusterCloud& cloud, const EllipsoidSpec& e,
                          double inflation, double t_min, double m0,
                          double radial_fraction, int angular_bins) {
    CloudReport rep;
    const double limit = (1.0 + inflation) * (1.0 + inflation);
    const double radius = std::sqrt(2.0 / m0);
    std::vector<bool> bin_hit(static_cast<size_t>(angular_bins), false);
    const bool planar = e.dim() == 2;
    rep.angular_bins_total = planar ? angular_bins : 0;

    for (size_t i = 0; i < cloud.times.size(); ++i) {
        if (cloud.times[i] < t_min) continue;
        auto bm = ball_membership(cloud.v[i], e);
        ++rep.points_considered;
        if (bm.form_value <= limit) ++rep.points_inside;
        rep.max_form_value = std::max(rep.max_form_value, bm.form_value);
        double r2 = 0.0;
        for (double c : cloud.v[i]) r2 += c * c;
        rep.max_radius = std::max(rep.max_radius, std::sqrt(r2));
        if (planar && std::sqrt(r2) >= radial_fraction * radius) {
            double angle = std::atan2(cloud.v[i][1], cloud.v[i][0]);
            if (angle < 0) angle += 2.0 * std::numbers::pi;
            int bin = std::min(angular_bins - 1,
                               static_cast<int>(angle / (2.0 * std::numbers::pi) * angular_bins));
            bin_hit[static_cast<size_t>(bin)] = true;
        }
    }
    for (bool b : bin_hit) rep.angular_bins_covered += b ? 1 : 0;
    rep.containment_fraction =
        rep.points_considered ? static_cast<double>(rep.points_inside) / rep.points_considered : 1.0;
    return rep;
}

std::vector<RunningLimsupRow> running_limsup(const std::vector<Checkpoint>& checkpoints,
                                             int k, double sigma, double t0) {
    if (t0 < 3.0) throw std::invalid_argument("running_limsup: window start must be >= 3");
    std::vector<RunningLimsupRow> rows;
    double running = -std::numeric_limits<double>::infinity();
    for (const auto& cp : checkpoints) {
        if (cp.t < t0) continue;
        running = std::max(running, cp.mu[static_cast<size_t>(k)]);
        rows.push_back({cp.t, running, sigma > 0.0 ? running / sigma : 0.0});
    }
    return rows;
}

TargetChaseResult chase_target(const std::vector<Checkpoint>& checkpoints,
                               std::span<const double> target,
                               std::span<const double> eps,
                               const EllipsoidSpec& e, double budget) {
    const int n = static_cast<int>(target.size());
    if (static_cast<int>(eps.size()) != n)
        throw std::invalid_argument("chase_target: tolerance schedule size mismatch");
    for (int k = 0; k < n; ++k) {
        if (!(eps[static_cast<size_t>(k)] > 0.0))
            throw std::invalid_argument("chase_target: tolerances must be positive");
        if (k > 0 && eps[static_cast<size_t>(k)] > eps[static_cast<size_t>(k - 1)])
            throw std::invalid_argument("chase_target: tolerances must be nonincreasing");
    }
    auto bm = ball_membership(target, e);
    if (!(bm.form_value < 1.0 - 1e-12))
        throw std::invalid_argument(
            "chase_target: target must lie strictly inside the ball (limit points do "
            "not exist outside it)");
    if (!(budget > 0.0) || !std::isfinite(budget))
        throw std::invalid_argument("chase_target: budget must be finite and positive");

    TargetChaseResult res;
    res.target.assign(target.begin(), target.end());
    res.tolerances.assign(eps.begin(), eps.end());
    res.budget = budget;
    res.best_errors.assign(static_cast<size_t>(n), std::numeric_limits<double>::infinity());

    int stage = 0;  // next k to satisfy is stage+1
    for (const auto& cp : checkpoints) {
        if (cp.t > budget) break;
        if (stage >= n) break;
        if (!res.achieved_times.empty() && cp.t <= res.achieved_times.back()) continue;
        double err2 = 0.0;
        for (int k = 0; k <= stage; ++k) {
            double d = cp.mu[static_cast<size_t>(k)] - target[static_cast<size_t>(k)];
            err2 += d * d;
        }
        double err = std::sqrt(err2);
        res.best_errors[static_cast<size_t>(stage)] =
            std::min(res.best_errors[static_cast<size_t>(stage)], err);
        if (err < eps[static_cast<size_t>(stage)]) {
            res.achieved_times.push_back(cp.t);
            res.achieved_errors.push_back(err);
            ++stage;
        }
    }
    res.success = (stage == n);
    return res;
}

UniformBoundReport uniform_bound_check(const std::vector<Checkpoint>& checkpoints,
                                       const std::vector<double>& lambdas,
                                       double alpha,
                                       const std::vector<SpectralFunction>& test_functions,
                                       int manifold_dim, double tol) {
    const double floor_alpha = std::max(manifold_dim - 1.5, manifold_dim / 2.0);
    if (!(alpha > floor_alpha))
        throw std::invalid_argument("uniform_bound_check: alpha must exceed max(d-3/2, d/2)");

    UniformBoundReport rep;
    rep.surrogate_ok = true;
    const size_t n_modes = lambdas.size();  // lambdas[k] = lambda_{k+1}
    for (const auto& cp : checkpoints) {
        if (cp.mu.size() < n_modes)
            throw std::invalid_argument("uniform_bound_check: checkpoint missing mode observables");
        double dual2 = 0.0;
        for (size_t k = 0; k < n_modes; ++k)
            dual2 += std::pow(lambdas[k], -alpha) * cp.mu[k] * cp.mu[k];
        const double dual = std::sqrt(dual2);
        rep.empirical_C = std::max(rep.empirical_C, dual);
        for (const auto& f : test_functions) {
            double mu_f = 0.0;
            double norm2 = 0.0;
            for (size_t n = 1; n < f.coeffs.size() && n <= n_modes; ++n) {
                mu_f += f.coeffs[n] * cp.mu[n - 1];
                norm2 += std::pow(lambdas[n - 1], alpha) * f.coeffs[n] * f.coeffs[n];
            }
            const double lhs = std::abs(mu_f);
            const double rhs = std::sqrt(norm2) * dual;
            const double violation = lhs - rhs;
            rep.max_violation = std::max(rep.max_violation, violation);
            if (violation > tol * std::max(1.0, rhs)) rep.surrogate_ok = false;
        }
    }
    return rep;
}

}  // namespace lil
