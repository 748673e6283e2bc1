#include "fkdmc/analysis.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fkdmc/errors.hpp"

namespace fkdmc {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("fit_slope: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NumericError("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

StabilityReport contraction_check(const Matrix& A, const Matrix& S, double tol) {
    if (!is_symmetric(S) || !is_positive_definite(S))
        throw ConfigError("contraction_check: S must be SPD");
    StabilityReport rep;
    const Matrix s_half = sqrt_spd(S);
    const Matrix s_half_inv = inv_sqrt_spd(S);
    rep.rho = spectral_norm(s_half * A * s_half_inv);
    rep.min_eig_gap = min_eigenvalue(symmetrized(S - A.transpose() * S * A));
    rep.holds = rep.rho < 1.0 - tol;
    const bool holds_gap = rep.min_eig_gap > tol;
    if (rep.holds != holds_gap && std::abs(rep.rho - 1.0) > 64 * tol)
        throw NumericError("contraction_check: spectral-norm and eigen-gap tests disagree");
    return rep;
}

namespace {

bool lyapunov_feasible(const GaussianModel& model, double alpha) {
    const int d = model.d;
    const Matrix b_inv = Eigen::LLT<Matrix>(model.B).solve(Matrix::Identity(d, d));
    if (min_eigenvalue(symmetrized(b_inv - alpha * model.S)) <= kPdTolerance) return false;
    // S - A'(I - alpha S B)^{-1} S A
    Matrix inner;
    try {
        inner = solve_shifted(-alpha * model.S * model.B, model.S);
    } catch (const NumericError&) {
        return false;
    }
    const Matrix gap = symmetrized(model.S - model.A.transpose() * inner * model.A);
    return min_eigenvalue(gap) > kPdTolerance;
}

}  // namespace

LyapunovAlpha lyapunov_alpha(const GaussianModel& model, double bisect_tol) {
    const StabilityReport base = contraction_check(model.A, model.S);
    if (!base.holds)
        throw NumericError("lyapunov_alpha: infeasible, A'SA < S does not hold");

    const double lam_b =
        Eigen::SelfAdjointEigenSolver<Matrix>(model.B, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    const double lam_s =
        Eigen::SelfAdjointEigenSolver<Matrix>(model.S, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    double lo = 0.0;
    double hi = 1.0 / (lam_b * lam_s);
    // alpha near 0 is always feasible under the contraction hypothesis
    for (double probe = hi / 2; probe > 1e-300 && lo == 0.0; probe /= 2)
        if (lyapunov_feasible(model, probe)) lo = probe;
    if (lo == 0.0)
        throw NumericError("lyapunov_alpha: no feasible alpha found");
    while (hi - lo > bisect_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (lyapunov_feasible(model, mid))
            lo = mid;
        else
            hi = mid;
    }

    LyapunovAlpha out;
    out.alpha_bar = lo;
    const double alpha = 0.5 * lo;
    const int d = model.d;
    const Matrix b_inv = Eigen::LLT<Matrix>(model.B).solve(Matrix::Identity(d, d));
    out.certificate_b =
        Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(b_inv - alpha * model.S))
            .eigenvalues();
    const Matrix inner = solve_shifted(-alpha * model.S * model.B, model.S);
    out.certificate_s = Eigen::SelfAdjointEigenSolver<Matrix>(
                            symmetrized(model.S - model.A.transpose() * inner * model.A))
                            .eigenvalues();
    return out;
}

StabilityReport stability_report(const GaussianModel& model) {
    StabilityReport rep = contraction_check(model.A, model.S);
    try {
        rep.H = ground_state(model).S_inf;
    } catch (const NonConvergenceError&) {
        rep.H.reset();
    }
    const Matrix bh = sqrt_spd(model.B);
    rep.chi = std::exp(-0.5 * log_det_spd(Matrix::Identity(model.d, model.d) +
                                          bh * model.S * bh));
    if (rep.holds) rep.alpha_bar = lyapunov_alpha(model).alpha_bar;
    return rep;
}

namespace {

// Total variation between two 1-d Gaussians by Simpson quadrature of |p - q|/2.
double tv_quadrature_1d(const GaussianMeasure& p, const GaussianMeasure& q) {
    const double mp = p.mean(0), vq = q.cov(0, 0), vp = p.cov(0, 0), mq = q.mean(0);
    if (!(vp > 0.0) || !(vq > 0.0))
        throw NumericError("tv quadrature: degenerate covariance");
    const double sp = std::sqrt(vp), sq = std::sqrt(vq);
    const double lo = std::min(mp - 10 * sp, mq - 10 * sq);
    const double hi = std::max(mp + 10 * sp, mq + 10 * sq);
    const int n = 20000;  // even
    const double h = (hi - lo) / n;
    auto dens = [](double x, double m, double v) {
        const double dx = x - m;
        return std::exp(-0.5 * dx * dx / v) / std::sqrt(2.0 * M_PI * v);
    };
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double f = std::abs(dens(x, mp, vp) - dens(x, mq, vq));
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * f;
    }
    return 0.5 * acc * h / 3.0;
}

}  // namespace

std::vector<TvBoundStep> tv_stability_bound(const GaussianModel& model,
                                            const GaussianMeasure& nu1,
                                            const GaussianMeasure& nu2, int n) {
    const auto flow1 = exact_flow(model, nu1, n);
    const auto flow2 = exact_flow(model, nu2, n);
    std::vector<TvBoundStep> out;
    out.reserve(flow1.size());
    for (std::size_t i = 0; i < flow1.size(); ++i) {
        TvBoundStep step;
        step.kl = gaussian_kl(flow1[i], flow2[i]);
        step.pinsker = std::sqrt(std::max(0.0, step.kl) / 2.0);
        if (model.d == 1) step.tv = tv_quadrature_1d(flow1[i], flow2[i]);
        out.push_back(step);
    }
    return out;
}

std::vector<double> asymptotic_variance_1d(const GaussianModel& model, int n) {
    if (model.d != 1) throw ConfigError("asymptotic_variance_1d: model must be 1-d");
    if (n < 0) throw ConfigError("asymptotic_variance_1d: n must be >= 0");
    const double s2 = ground_state(model).P_inf(0, 0);
    const ClosedForm1D cf = closed_form_1d(model, n);
    std::vector<double> sigma2(static_cast<std::size_t>(n) + 1, 0.0);
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double ratio = cf.mu[j] / cf.lambda[j];
        const double a1 = 1.0 + cf.q[j] * s2;
        const double a2 = 1.0 + 2.0 * cf.q[j] * s2;
        acc += ratio * ratio * a1 / (a2 * std::sqrt(a2));
        sigma2[j] = s2 * acc;
    }
    return sigma2;
}

// --- replicated experiments --------------------------------------------------

namespace {

// Mean-estimate series for each replication, parallel across a job pool.
// errors[rep] holds eta_n^N(I) per step; extinct[rep] is the step the rep
// died at (-1 when it survived), with the last mean carried forward.
struct RepRuns {
    std::vector<std::vector<Vector>> means;
    std::vector<int> extinct_at;
};

Vector ensemble_mean(const WalkerEnsemble& ens) {
    Vector mean = Vector::Zero(ens.dim);
    for (std::size_t i = 0; i < ens.n_walkers; ++i) {
        const double* x = ens.walker(i);
        for (int k = 0; k < ens.dim; ++k) mean[k] += x[k];
    }
    return mean / static_cast<double>(ens.n_walkers);
}

RepRuns run_replications(const GaussianFkModel& fk, int n_steps, std::size_t n_walkers,
                         int reps, std::uint64_t seed, SelectionPolicy policy,
                         const ExecPolicy& pool) {
    RepRuns out;
    out.means.assign(reps, {});
    out.extinct_at.assign(reps, -1);
#ifdef _OPENMP
    const int jobs = pool.threads == 0 ? omp_get_max_threads() : pool.threads;
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs != 1)
#endif
    for (int rep = 0; rep < reps; ++rep) {
        const ExecPolicy inner{1};  // replications are the parallel axis
        std::vector<Vector> series;
        series.reserve(n_steps + 1);
        try {
            WalkerEnsemble ens = init_ensemble(
                fk, n_walkers, replication_seed(seed, static_cast<std::uint64_t>(rep)),
                inner);
            series.push_back(ensemble_mean(ens));
            for (int step = 0; step < n_steps; ++step) {
                const auto lw = eval_log_potentials(fk, ens, inner);
                selection_step(ens, lw, policy, fk.log_g_max());
                mutation_step(ens, fk, inner);
                series.push_back(ensemble_mean(ens));
            }
        } catch (const ExtinctionError& e) {
            // dead ensemble: freeze its last recorded estimate
            out.extinct_at[rep] = e.step;
            while (static_cast<int>(series.size()) < n_steps + 1)
                series.push_back(series.empty() ? Vector::Zero(fk.dim()) : series.back());
        }
        out.means[rep] = std::move(series);
    }
    return out;
}

}  // namespace

std::vector<double> replicated_l2_mean_error(const GaussianFkModel& fk,
                                             const std::vector<GaussianMeasure>& exact,
                                             int n_steps, std::size_t n_walkers, int reps,
                                             std::uint64_t seed, SelectionPolicy policy,
                                             const ExecPolicy& pool) {
    if (reps < 1) throw ConfigError("replicated_l2_mean_error: reps must be >= 1");
    if (static_cast<int>(exact.size()) < n_steps + 1)
        throw ConfigError("replicated_l2_mean_error: exact flow too short");
    const RepRuns runs = run_replications(fk, n_steps, n_walkers, reps, seed, policy, pool);
    std::vector<double> l2(static_cast<std::size_t>(n_steps) + 1, 0.0);
    for (int rep = 0; rep < reps; ++rep)
        for (int n = 0; n <= n_steps; ++n)
            l2[n] += (runs.means[rep][n] - exact[n].mean).squaredNorm();
    for (auto& v : l2) v = std::sqrt(v / reps);
    return l2;
}

CltComparison clt_empirical(const GaussianModel& model, int n, std::size_t n_walkers,
                            int reps, std::uint64_t seed, const ExecPolicy& pool) {
    if (model.d != 1) throw ConfigError("clt_empirical: model must be 1-d");
    if (reps < 2) throw ConfigError("clt_empirical: need reps >= 2 for a variance");
    const GroundStateTriple gs = ground_state(model);
    const GaussianMeasure eta_inf(Vector::Zero(1), gs.P_inf);
    const GaussianFkModel fk(model, eta_inf);

    const RepRuns runs = run_replications(fk, n, n_walkers, reps, seed,
                                          SelectionPolicy::proportional, pool);
    double mean = 0.0;
    for (int rep = 0; rep < reps; ++rep) mean += runs.means[rep][n][0];
    mean /= reps;
    double var = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const double d = runs.means[rep][n][0] - mean;
        var += d * d;
    }
    var /= (reps - 1);

    CltComparison out;
    out.n_var = static_cast<double>(n_walkers) * var;
    out.sigma_n2 = asymptotic_variance_1d(model, n).back();
    out.reps = reps;
    return out;
}

GrowthReport divergence_experiment(const GaussianModel& model, const GaussianMeasure& eta0,
                                   std::size_t n_walkers, int n_max, int reps,
                                   std::uint64_t seed, const ExecPolicy& pool,
                                   int bootstrap_rounds) {
    if (model.d != 1) throw ConfigError("divergence_experiment: model must be 1-d");
    if (n_max < 4) throw ConfigError("divergence_experiment: n_max too small");
    const auto flow = exact_flow(model, eta0, n_max);
    const GaussianFkModel fk(model, eta0);
    const RepRuns runs = run_replications(fk, n_max, n_walkers, reps, seed,
                                          SelectionPolicy::proportional, pool);

    // |error| per rep and step
    std::vector<std::vector<double>> abs_err(reps,
                                             std::vector<double>(n_max + 1, 0.0));
    for (int rep = 0; rep < reps; ++rep)
        for (int n = 0; n <= n_max; ++n)
            abs_err[rep][n] = std::abs(runs.means[rep][n][0] - flow[n].mean(0));

    GrowthReport report;
    report.mean_abs_error.assign(n_max + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        for (int rep = 0; rep < reps; ++rep) report.mean_abs_error[n] += abs_err[rep][n];
        report.mean_abs_error[n] /= reps;
    }
    for (int rep = 0; rep < reps; ++rep)
        if (runs.extinct_at[rep] >= 0) ++report.extinctions;

    const int lo = n_max / 2;
    auto slope_of = [&](const std::vector<double>& series) {
        std::vector<double> xs, ys;
        for (int n = lo; n <= n_max; ++n) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(std::max(series[n], 1e-300)));
        }
        return fit_slope(xs, ys);
    };
    report.slope = slope_of(report.mean_abs_error);

    // bootstrap over replications
    std::vector<double> slopes;
    slopes.reserve(bootstrap_rounds);
    Substream rng(splitmix64(seed ^ 0xB00157u), 0, 0, StreamClass::experiment);
    std::vector<double> resampled(n_max + 1);
    for (int b = 0; b < bootstrap_rounds; ++b) {
        std::fill(resampled.begin(), resampled.end(), 0.0);
        for (int r = 0; r < reps; ++r) {
            const int pick = std::min<int>(reps - 1,
                                           static_cast<int>(rng.uniform() * reps));
            for (int n = 0; n <= n_max; ++n) resampled[n] += abs_err[pick][n];
        }
        for (auto& v : resampled) v /= reps;
        slopes.push_back(slope_of(resampled));
    }
    std::sort(slopes.begin(), slopes.end());
    const auto quantile = [&](double q) {
        const double pos = q * (slopes.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - i;
        return i + 1 < slopes.size() ? slopes[i] * (1 - frac) + slopes[i + 1] * frac
                                     : slopes.back();
    };
    report.slope_ci_lo = quantile(0.025);
    report.slope_ci_hi = quantile(0.975);
    report.growth = report.slope_ci_lo > 0.0;
    return report;
}

SweepResult convergence_sweep(const GaussianModel& model, const GaussianMeasure& eta0,
                              const std::vector<std::size_t>& walker_counts, int n_steps,
                              int reps, std::uint64_t seed, SelectionPolicy policy,
                              const BurnInRule& burn_in, const ExecPolicy& pool) {
    if (walker_counts.empty()) throw ConfigError("convergence_sweep: empty N list");
    const auto flow = exact_flow(model, eta0, n_steps);
    const GaussianFkModel fk(model, eta0);

    SweepResult out;
    std::vector<double> log_n, log_err;
    for (std::size_t idx = 0; idx < walker_counts.size(); ++idx) {
        const std::size_t n_walkers = walker_counts[idx];
        const std::uint64_t sweep_seed = splitmix64(seed ^ (0x5EEDull + idx));
        const auto l2 = replicated_l2_mean_error(fk, flow, n_steps, n_walkers, reps,
                                                 sweep_seed, policy, pool);
        SweepPoint point;
        point.n_walkers = n_walkers;
        point.sup_l2_error = *std::max_element(l2.begin(), l2.end());

        RunSpec spec;
        spec.n_walkers = n_walkers;
        spec.n_steps = n_steps;
        spec.seed = replication_seed(sweep_seed, 0xE0ull);
        spec.policy = policy;
        spec.exec = pool;
        const EstimatorSeries series = run(fk, spec);
        const EnergyEstimate est = energy_estimate(series, burn_in, model.delta);
        point.energy = est.value;
        point.energy_std_error = est.std_error;
        out.points.push_back(point);

        log_n.push_back(std::log(static_cast<double>(n_walkers)));
        log_err.push_back(std::log(point.sup_l2_error));
    }
    out.slope = fit_slope(log_n, log_err);
    return out;
}

}  // namespace fkdmc
