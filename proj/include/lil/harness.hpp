#ifndef LIL_HARNESS_HPP
#define LIL_HARNESS_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lil/simulate.hpp"
#include "lil/spectral.hpp"

namespace lil {

/// f_k = sqrt(lambda_k / 2) phi_k, k = 1..n: orthonormal under the Green
/// form, (f_i, G f_j)_{L2} = delta_ij.
struct ObservableBasis {
    int n = 0;
    std::vector<SpectralFunction> functions;
};

ObservableBasis make_basis(const ManifoldSpec& m, int n);

/// Membership region { z : z^T a z <= 1 } with a = (m0/2) B^{-1}, B the
/// Green-Gram matrix of the generating functions. For the default basis this
/// is the ball of radius sqrt(2/m0).
struct EllipsoidSpec {
    Eigen::MatrixXd a;
    int dim() const { return static_cast<int>(a.rows()); }
};

EllipsoidSpec ellipsoid_from(const std::vector<SpectralFunction>& functions,
                             const ManifoldSpec& m);

struct BallMembership {
    double form_value = 0.0;
    bool member = false;  // form_value <= 1 (1e-12 boundary tolerance)
};

BallMembership ball_membership(std::span<const double> v, const EllipsoidSpec& e);

/// Checkpointed vectors v_{n,t} = (mu_t(f_1), ..., mu_t(f_n)).
struct ClusterCloud {
    std::vector<double> times;
    std::vector<std::vector<double>> v;
};

ClusterCloud cluster_cloud(const std::vector<Checkpoint>& checkpoints, int n);

struct CloudReport {
    int points_considered = 0;
    int points_inside = 0;
    double containment_fraction = 1.0;
    double max_form_value = 0.0;
    double max_radius = 0.0;
    // angular coverage (n = 2 only): bins of atan2(v2, v1) holding a point
    // with |v| >= radial_fraction * sqrt(2/m0)
    int angular_bins_total = 0;
    int angular_bins_covered = 0;
};

CloudReport analyze_cloud(const ClusterCloud& cloud, const EllipsoidSpec& e,
                          double inflation, double t_min, double m0,
                          double radial_fraction = 0.2, int angular_bins = 16);

struct RunningLimsupRow {
    double t = 0.0;
    double running_max = 0.0;
    double ratio_to_sigma = 0.0;
};

/// Running maximum of mu_t(f_k) over geometric checkpoints in [t0, T],
/// with the ratio to the predicted limit sigma_f.
std::vector<RunningLimsupRow> running_limsup(const std::vector<Checkpoint>& checkpoints,
                                             int k, double sigma, double t0);

struct TargetChaseResult {
    std::vector<double> target;
    std::vector<double> tolerances;     // eps_k, k = 1..n
    std::vector<double> achieved_times; // t_1 < t_2 < ... (size = progress)
    std::vector<double> achieved_errors;
    std::vector<double> best_errors;    // best |v_{k,t} - target_{1..k}| seen per stage
    double budget = 0.0;
    bool success = false;               // all n stages achieved within budget
};

/// Diagonal time selection: scan checkpoints for strictly increasing times
/// t_k with |v_{k,t} - target_{1..k}| < eps_k for k = 1..n. A budget
/// exhausted result is a finite-horizon report, not a wrong answer: the
/// recorded errors are verbatim.
TargetChaseResult chase_target(const std::vector<Checkpoint>& checkpoints,
                               std::span<const double> target,
                               std::span<const double> eps,
                               const EllipsoidSpec& e, double budget);

struct UniformBoundReport {
    bool surrogate_ok = false;
    double max_violation = 0.0;  // worst lhs - rhs over all (f, checkpoint)
    double empirical_C = 0.0;    // sup_t sqrt(sum lambda_n^-alpha mu_t(phi_n)^2)
};

/// Checkpoints must carry the raw modes phi_1..phi_N as observables (mu[k]
/// is mu_t(phi_{k+1})). Checks |mu_t(f)| <= ||f||_{H0^alpha} *
/// sqrt(sum_n lambda_n^-alpha mu_t(phi_n)^2) for every test function
/// (exact coefficient Cauchy-Schwarz) and records the path's empirical
/// constant. Admissible range: alpha > max(d - 3/2, d/2).
UniformBoundReport uniform_bound_check(const std::vector<Checkpoint>& checkpoints,
                                       const std::vector<double>& lambdas,
                                       double alpha,
                                       const std::vector<SpectralFunction>& test_functions,
                                       int manifold_dim, double tol = 1e-10);

}  // namespace lil

#endif  // LIL_HARNESS_HPP
