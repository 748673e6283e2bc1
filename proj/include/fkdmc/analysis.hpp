#pragma once

// Stability certification, TV-stability bounds, asymptotic (CLT) variance,
// and the replicated Monte Carlo experiments: convergence sweeps, CLT
// comparison, divergence growth reports. Replications are independent jobs
// parallel across an OpenMP pool; per-rep seeds come from the master seed, so
// results do not depend on the pool size.

#include <optional>

#include "fkdmc/engine.hpp"
#include "fkdmc/exact_gaussian.hpp"
#include "fkdmc/importance.hpp"

namespace fkdmc {

struct StabilityReport {
    bool holds = false;
    double rho = 0.0;          // spectral norm of S^{1/2} A S^{-1/2}
    double min_eig_gap = 0.0;  // smallest eigenvalue of S - A'SA
    std::optional<double> alpha_bar;  // largest feasible Lyapunov exponent
    std::optional<Matrix> H;          // Riccati solution, same equation as S_inf
    std::optional<double> chi;        // sup_x P(G_S)(x); diagnostic only
};

// The two equivalent stability tests (eigen-gap and spectral norm), asserted
// consistent against each other.
StabilityReport contraction_check(const Matrix& A, const Matrix& S, double tol = 1e-10);

struct LyapunovAlpha {
    double alpha_bar;
    Vector certificate_b;  // eigenvalues of B^{-1} - alpha S at alpha_bar/2
    Vector certificate_s;  // eigenvalues of S - A'(I - alpha S B)^{-1} S A at alpha_bar/2
};

// Bisection for the largest alpha with both certificate matrices positive
// definite; requires contraction_check to hold.
LyapunovAlpha lyapunov_alpha(const GaussianModel& model, double bisect_tol = 1e-10);

// contraction_check plus alpha_bar (when it holds), the Riccati solution H
// and the constant chi = det(I+BS)^{-1/2}.
StabilityReport stability_report(const GaussianModel& model);

struct TvBoundStep {
    double kl = 0.0;       // Ent(flow1_n | flow2_n), exact Gaussian formula
    double pinsker = 0.0;  // sqrt(kl / 2)
    std::optional<double> tv = {};  // true total variation by quadrature (d = 1)
};

std::vector<TvBoundStep> tv_stability_bound(const GaussianModel& model,
                                            const GaussianMeasure& nu1,
                                            const GaussianMeasure& nu2, int n);

// CLT variance sigma_j^2, j = 0..n, for the stationary start eta_0 = eta_inf
// (d = 1). Terms use the closed-form recursions with the identity-based index.
std::vector<double> asymptotic_variance_1d(const GaussianModel& model, int n);

// --- replicated experiments -------------------------------------------------

// L2 error over replications of the mean estimator against the exact flow,
// per step 0..n_steps.
std::vector<double> replicated_l2_mean_error(const GaussianFkModel& fk,
                                             const std::vector<GaussianMeasure>& exact,
                                             int n_steps, std::size_t n_walkers, int reps,
                                             std::uint64_t seed, SelectionPolicy policy,
                                             const ExecPolicy& pool = {});

struct CltComparison {
    double n_var;     // N * Var over reps of eta_n^N(I)
    double sigma_n2;  // closed-form reference
    int reps;
};

// Proportional-selection runs from the stationary start (d = 1).
CltComparison clt_empirical(const GaussianModel& model, int n, std::size_t n_walkers,
                            int reps, std::uint64_t seed, const ExecPolicy& pool = {});

struct GrowthReport {
    std::vector<double> mean_abs_error;  // per step 0..n_max
    double slope = 0.0;                  // LS slope of log error over [n_max/2, n_max]
    double slope_ci_lo = 0.0;            // bootstrap 95% interval over replications
    double slope_ci_hi = 0.0;
    bool growth = false;                 // slope significantly positive
    int extinctions = 0;                 // reps that hit the extinction error
};

GrowthReport divergence_experiment(const GaussianModel& model, const GaussianMeasure& eta0,
                                   std::size_t n_walkers, int n_max, int reps,
                                   std::uint64_t seed, const ExecPolicy& pool = {},
                                   int bootstrap_rounds = 400);

struct SweepPoint {
    std::size_t n_walkers;
    double sup_l2_error;      // sup over steps of the replicated L2 mean error
    double energy;            // time-averaged eta^N(G) of a single run
    double energy_std_error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double slope;  // log sup-error vs log N
};

SweepResult convergence_sweep(const GaussianModel& model, const GaussianMeasure& eta0,
                              const std::vector<std::size_t>& walker_counts, int n_steps,
                              int reps, std::uint64_t seed, SelectionPolicy policy,
                              const BurnInRule& burn_in, const ExecPolicy& pool = {});

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fkdmc
