#ifndef LIL_SPECTRAL_HPP
#define LIL_SPECTRAL_HPP

#include <vector>

#include "lil/manifold.hpp"

namespace lil {

/// A function on the manifold given by finitely many eigenbasis
/// coefficients: f = sum_n coeffs[n] phi_n. Mean-zero means coeffs[0] == 0.
struct SpectralFunction {
    ManifoldSpec manifold;
    std::vector<double> coeffs;

    bool mean_zero() const { return coeffs.empty() || coeffs[0] == 0.0; }
    int max_mode() const { return static_cast<int>(coeffs.size()) - 1; }

    static SpectralFunction basis_mode(const ManifoldSpec& m, int n, double c = 1.0);
};

/// Eigenvalues lambda_0..lambda_{max_mode} for the function's manifold.
std::vector<double> eigenvalues_for(const SpectralFunction& f);

/// G_alpha = (-Laplacian/2)^{-alpha}: multiplier 2^alpha lambda_n^{-alpha}
/// on nonconstant modes, zero on the constant mode.
SpectralFunction apply_G_alpha(const SpectralFunction& f, double alpha);

/// Inverse square-root Green operator: multiplier sqrt(lambda_n / 2).
/// Requires a mean-zero input; round-trips exactly with apply_G_alpha(., 1/2).
SpectralFunction apply_G_half_inverse(const SpectralFunction& g);

/// sum lambda_n g_n^2, the H^1-type energy callers can monitor for blow-up
/// under refinement when deciding domain membership of G_{1/2}^{-1}.
double g_half_inverse_domain_energy(const SpectralFunction& g);

/// sqrt(sum_{n>=1} lambda_n^alpha f_n^2); requires mean-zero f.
double sobolev_norm(const SpectralFunction& f, double alpha);

/// Polarized Sobolev inner product sum lambda_n^alpha u_n v_n.
double sobolev_inner_product(const SpectralFunction& u, const SpectralFunction& v,
                             double alpha);

double inner_product_L2(const SpectralFunction& f, const SpectralFunction& g);

/// (G f, f)_{L2} = sum_{n>=1} 2 lambda_n^{-1} f_n^2.
double green_quadratic_form(const SpectralFunction& f);

/// sigma_f = sqrt((2/m0) (G f, f)), the almost-sure running-max limit of
/// the normalized occupation functional mu_t(f).
double lil_sigma(const SpectralFunction& f);

struct KernelValue {
    double value = 0.0;
    bool diagonal_flagged = false;  // x == y: value is truncation-dependent
};

/// g_alpha(x,y) as the truncated spectral sum
/// sum_{n=1..N} 2^alpha lambda_n^{-alpha} phi_n(x) phi_n(y).
KernelValue kernel_g_alpha_spectral(const ManifoldSpec& m, double alpha,
                                    const Point& x, const Point& y,
                                    SpectralTruncation trunc);

struct TimeIntConfig {
    double split_time = 1.0;  // quadrature split between [0,T0] and [T0,T1]
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_depth = 15;
};

struct TimeIntResult {
    double value = 0.0;
    double quadrature_error = 0.0;  // achieved error estimate
    bool converged = false;
    bool diagonal_flagged = false;
};

/// g_alpha(x,y) by numerical quadrature of
/// Gamma(alpha)^{-1} integral_0^inf t^{alpha-1} (p_N(t,x,y) - 1/m0) dt.
/// The endpoint singularity is removed by the substitution t = u^{1/alpha}
/// on [0, T0]; [T0, T1] is adaptive Gauss-Kronrod with T1 chosen so
/// e^{-lambda_1 T1/2} < 1e-14, and the lambda_1 block beyond T1 is added in
/// closed form via the upper incomplete gamma function.
TimeIntResult kernel_g_alpha_timeint(const ManifoldSpec& m, double alpha,
                                     const Point& x, const Point& y,
                                     SpectralTruncation trunc,
                                     const TimeIntConfig& cfg = {});

struct SemigroupReport {
    double max_rel_error = 0.0;
    bool pass = false;
};

/// Verifies G_beta(G_alpha f) = G_{alpha+beta} f coefficientwise.
SemigroupReport semigroup_check(double alpha, double beta, const SpectralFunction& f,
                                double tol = 1e-12);

}  // namespace lil

#endif  // LIL_SPECTRAL_HPP
