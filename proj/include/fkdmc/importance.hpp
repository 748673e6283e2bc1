#pragma once

// Conditional-free-evolution importance sampling: blocks of k elementary
// steps of the updated (hat) model are collapsed into a single selection /
// mutation round. The resulting walker system tracks the updated measures
// eta_hat_{nk} exactly in the Gaussian case (the exact k-step flow below is
// the Kalman recursion of the k-step triple), and is uniformly convergent as
// soon as A_k' S_k A_k < S_k holds for the triple being run.

#include "fkdmc/exact_gaussian.hpp"
#include "fkdmc/fk_model.hpp"

namespace fkdmc {

struct KStepModel {
    int k = 1;
    GaussianModel base;          // original (A, B, S)
    GaussianModel hat;           // updated-model triple the blocks are built from
    PropagatorPowers powers;     // (A_k, B_k, S_k) of the hat triple
    GaussianMeasure eta0_updated;  // psi_{G_S}(eta0), the system's initial law

    // The triple (A_k, B_k, S_k) as a plain model, for exact-flow oracles.
    GaussianModel gaussian() const;

    // Walker-engine instance: potential exp(-x'S_k x/2) (sup 1 at the origin),
    // kernel N(A_k x, B_k), initial sampler psi_{G_S}(eta0).
    GaussianFkModel fk_model() const;

    // Exact flow of the k-step system; step n equals the base updated flow at
    // time n*k.
    std::vector<GaussianMeasure> exact_kstep_flow(int n) const;
};

// Requires a non-degenerate updated potential (S_hat > 0, i.e. A non-singular).
KStepModel build_k_step(const GaussianModel& base, const GaussianMeasure& eta0, int k);

// Smallest k <= k_max with A_k' S_k A_k < S_k for the given model's own
// k-step triple; throws NoStableKError (with the min-eigenvalue trace of
// S_k - A_k'S_k A_k per k) when none qualifies.
int min_stable_k(const GaussianModel& model, int k_max);

// The eigenvalue trace itself, for monotone-tail diagnostics.
std::vector<double> stability_gap_sequence(const GaussianModel& model, int k_max);

}  // namespace fkdmc
