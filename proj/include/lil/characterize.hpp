#ifndef LIL_CHARACTERIZE_HPP
#define LIL_CHARACTERIZE_HPP

#include "lil/spectral.hpp"

namespace lil {

/// A candidate signed measure mu = g dm given by the spectral coefficients
/// of its density g.
struct CandidateDensity {
    SpectralFunction g;
};

/// Verdict on the four membership conditions for the limit set:
/// (a) identifiable as a signed measure — structural for an L2 density,
/// (b) mu(M) = 0, (c) L2 density, (d) ||G_{1/2}^{-1} g||_{L2} <= sqrt(2/m0).
/// The set is closed, so an exact boundary value counts as a member
/// (1e-12 comparison tolerance).
struct CheckReport {
    bool cond_a = true;
    bool cond_b = false;
    bool cond_c = true;
    bool cond_d = false;
    double l2_norm = 0.0;
    double g_half_inv_norm = 0.0;  // sqrt(sum (lambda_n/2) g_n^2)
    double threshold = 0.0;        // sqrt(2/m0)
    bool member = false;
};

CheckReport check(const CandidateDensity& g, const ManifoldSpec& m);

/// mu(f) = (g, f)_{L2}.
double mu_of(const CandidateDensity& g, const SpectralFunction& f);

struct BallEquivalenceReport {
    bool cond_d = false;
    bool ball_member = false;
    bool equivalent = false;
    double quad_discrepancy = 0.0;  // |sum (lambda/2) g^2 - sum mu(f_k)^2|
};

/// For a truncated density the condition-(d) sum and the squared norm of
/// (mu(f_1), ..., mu(f_N)) are termwise identical: mu(f_k) = sqrt(lambda_k/2) g_k.
/// Verifies both predicates agree and reports the discrepancy of the sums.
BallEquivalenceReport ball_equivalence_check(const CandidateDensity& g,
                                             const ManifoldSpec& m, int n_max);

}  // namespace lil

#endif  // LIL_CHARACTERIZE_HPP
