#include "lil/characterize.hpp"

#include <cmath>
#include <stdexcept>

namespace lil {

CheckReport check(const CandidateDensity& cand, const ManifoldSpec& m) {
    if (!(cand.g.manifold == m))
        throw std::invalid_argument("check: density lives on a different manifold");
    const auto& c = cand.g.coeffs;
    CheckReport rep;
    rep.cond_a = true;  // the representation is an L2 density by construction
    rep.cond_b = c.empty() || c[0] == 0.0;
    double l2 = 0.0;
    for (double x : c) l2 += x * x;
    rep.l2_norm = std::sqrt(l2);
    rep.cond_c = true;  // finitely many finite coefficients

    auto lam = eigenvalues_for(cand.g);
    double d2 = 0.0;
    for (size_t n = 1; n < c.size(); ++n) d2 += lam[n] / 2.0 * c[n] * c[n];
    rep.g_half_inv_norm = std::sqrt(d2);
    rep.threshold = std::sqrt(2.0 / m.volume());
    rep.cond_d = rep.g_half_inv_norm <= rep.threshold + 1e-12;
    rep.member = rep.cond_a && rep.cond_b && rep.cond_c && rep.cond_d;
    return rep;
}

double mu_of(const CandidateDensity& g, const SpectralFunction& f) {
    return inner_product_L2(g.g, f);
}

BallEquivalenceReport ball_equivalence_check(const CandidateDensity& cand,
                                             const ManifoldSpec& m, int n_max) {
    if (!cand.g.mean_zero())
        throw std::invalid_argument("ball_equivalence_check: density must be mean-zero");
    if (cand.g.max_mode() > n_max)
        throw std::invalid_argument("ball_equivalence_check: density has modes beyond n_max");

    CheckReport rep = check(cand, m);

    auto lam = eigenvalues_for(cand.g);
    double v2 = 0.0;
    for (size_t k = 1; k < cand.g.coeffs.size(); ++k) {
        // mu(f_k) with f_k = sqrt(lambda_k/2) phi_k
        double mu_k = std::sqrt(lam[k] / 2.0) * cand.g.coeffs[k];
        v2 += mu_k * mu_k;
    }
    const double d2 = rep.g_half_inv_norm * rep.g_half_inv_norm;

    BallEquivalenceReport out;
    out.cond_d = rep.cond_d;
    out.ball_member = std::sqrt(v2) <= rep.threshold + 1e-12;
    out.equivalent = (out.cond_d == out.ball_member);
    out.quad_discrepancy = std::abs(d2 - v2);
    return out;
}

}  // namespace lil
