#include "fkdmc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fkdmc/errors.hpp"

namespace fkdmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// --- data-parallel kernels, serial reference + OpenMP variant ---------------
//
// The two variants must stay element-wise identical: each walker's result is
// a pure function of (model, seed, step, walker), so the split is only about
// who executes which index.

namespace kernels {

int resolved_threads(const ExecPolicy& exec) {
#ifdef _OPENMP
    return exec.threads == 0 ? omp_get_max_threads() : exec.threads;
#else
    (void)exec;
    return 1;
#endif
}

void log_potentials_serial(const FkModel& model, int step, const double* pos, int dim,
                           std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = model.log_potential(step, pos + i * dim);
}

void log_potentials_omp(const FkModel& model, int step, const double* pos, int dim,
                        std::size_t n, double* out, int threads) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        out[i] = model.log_potential(step, pos + i * dim);
}

void shifted_exp_serial(const double* lw, std::size_t n, double shift, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(lw[i] - shift);
}

void shifted_exp_omp(const double* lw, std::size_t n, double shift, double* out,
                     int threads) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        out[i] = std::exp(lw[i] - shift);
}

void mutate_serial(const FkModel& model, int step_to, const double* in, double* out,
                   int dim, std::size_t n, std::uint64_t seed) {
    for (std::size_t i = 0; i < n; ++i)
        model.sample_kernel(step_to, in + i * dim, out + i * dim, seed,
                            static_cast<std::uint32_t>(i));
}

void mutate_omp(const FkModel& model, int step_to, const double* in, double* out,
                int dim, std::size_t n, std::uint64_t seed, int threads) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        model.sample_kernel(step_to, in + i * dim, out + i * dim, seed,
                            static_cast<std::uint32_t>(i));
}

// All observables of one walker in one pass; out[k] is the buffer of f_k.
void observables_serial(const std::vector<Observable>& obs, const double* pos, int dim,
                        std::size_t n, std::vector<std::vector<double>>& out) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < obs.size(); ++k)
            out[k][i] = obs[k].f(pos + i * dim, dim);
}

void observables_omp(const std::vector<Observable>& obs, const double* pos, int dim,
                     std::size_t n, std::vector<std::vector<double>>& out, int threads) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        for (std::size_t k = 0; k < obs.size(); ++k)
            out[k][i] = obs[k].f(pos + i * dim, dim);
}

}  // namespace kernels

// Per-run scratch: one set of buffers reused across steps so the hot loop
// does not allocate.
struct Workspace {
    std::vector<double> weights;     // exp(lw - lw_max)
    std::vector<double> cumulative;  // running sums of weights
    std::vector<double> buffer;      // position double-buffer
    std::vector<std::vector<double>> obs_values;
};

struct StepWeights {
    double lw_max = kNegInf;
    double wsum = 0.0;  // sum of exp(lw - lw_max), fixed index order
};

// Serial max + parallel exponentials + serial sum; NaN potentials rejected.
StepWeights compute_weights(const std::vector<double>& lw, const ExecPolicy& exec,
                            std::vector<double>& weights) {
    StepWeights sw;
    for (std::size_t i = 0; i < lw.size(); ++i) {
        if (std::isnan(lw[i]))
            throw NumericError("potential returned NaN for walker " + std::to_string(i));
        sw.lw_max = std::max(sw.lw_max, lw[i]);
    }
    weights.resize(lw.size());
    if (!std::isfinite(sw.lw_max)) {
        std::fill(weights.begin(), weights.end(), 0.0);
        return sw;
    }
    if (exec.serial())
        kernels::shifted_exp_serial(lw.data(), lw.size(), sw.lw_max, weights.data());
    else
        kernels::shifted_exp_omp(lw.data(), lw.size(), sw.lw_max, weights.data(),
                                 kernels::resolved_threads(exec));
    for (double w : weights) sw.wsum += w;
    return sw;
}

SelectionOutcome selection_core(WalkerEnsemble& ens, const std::vector<double>& lw,
                                SelectionPolicy policy, double log_g_max,
                                const StepWeights& sw, Workspace& ws) {
    const std::size_t n = ens.n_walkers;
    if (lw.size() != n)
        throw ConfigError("selection_step: potential array size mismatch");
    if (!std::isfinite(sw.lw_max)) throw ExtinctionError(ens.step);
    if (policy == SelectionPolicy::unit && log_g_max > 1e-12)
        throw ConfigError("selection policy 'unit' requires g_max <= 1");

    // Max-normalized weights keep the replacement table invariant under
    // positive rescaling of G and immune to underflow of raw potentials.
    ws.cumulative.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += ws.weights[i];
        ws.cumulative[i] = acc;
    }
    const double total = ws.cumulative[n - 1];

    SelectionOutcome out;
    out.parents.resize(n);
    switch (policy) {
        case SelectionPolicy::proportional: out.epsilon = 0.0; break;
        case SelectionPolicy::unit: out.epsilon = 1.0; break;
        case SelectionPolicy::essential_sup: out.epsilon = std::exp(-sw.lw_max); break;
    }

    for (std::size_t i = 0; i < n; ++i) {
        Substream rng(ens.seed, static_cast<std::uint32_t>(ens.step),
                      static_cast<std::uint32_t>(i), StreamClass::selection);
        const double u = rng.uniform();
        double survive_p = 0.0;
        if (policy == SelectionPolicy::unit) survive_p = std::exp(lw[i]);
        else if (policy == SelectionPolicy::essential_sup) survive_p = ws.weights[i];
        if (u < survive_p) {
            out.parents[i] = static_cast<std::uint32_t>(i);
        } else {
            const double v = rng.uniform() * total;
            auto it = std::upper_bound(ws.cumulative.begin(), ws.cumulative.end(), v);
            if (it == ws.cumulative.end()) --it;
            out.parents[i] = static_cast<std::uint32_t>(it - ws.cumulative.begin());
        }
    }

    // Gather after all draws so in-place selection cannot read moved data.
    ws.buffer.resize(ens.positions.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = ens.walker(out.parents[i]);
        std::copy(src, src + ens.dim, ws.buffer.data() + i * ens.dim);
    }
    ens.positions.swap(ws.buffer);
    return out;
}

void mutation_core(WalkerEnsemble& ens, const FkModel& model, const ExecPolicy& exec,
                   Workspace& ws) {
    const int step_to = ens.step + 1;
    ws.buffer.resize(ens.positions.size());
    if (exec.serial())
        kernels::mutate_serial(model, step_to, ens.positions.data(), ws.buffer.data(),
                               ens.dim, ens.n_walkers, ens.seed);
    else
        kernels::mutate_omp(model, step_to, ens.positions.data(), ws.buffer.data(),
                            ens.dim, ens.n_walkers, ens.seed,
                            kernels::resolved_threads(exec));
    for (std::size_t i = 0; i < ws.buffer.size(); ++i)
        if (!std::isfinite(ws.buffer[i]))
            throw PropagationError(step_to, i / static_cast<std::size_t>(ens.dim));
    ens.positions.swap(ws.buffer);
    ens.step = step_to;
}

EstimatorRow record_core(const WalkerEnsemble& ens, const StepWeights& sw,
                         const std::vector<Observable>& observables,
                         const ExecPolicy& exec, Workspace& ws) {
    const std::size_t n = ens.n_walkers;
    EstimatorRow row;
    row.step = ens.step;

    // Empirical mean, fixed summation order.
    row.mean.assign(ens.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = ens.walker(i);
        for (int k = 0; k < ens.dim; ++k) row.mean[k] += x[k];
    }
    for (int k = 0; k < ens.dim; ++k) row.mean[k] /= static_cast<double>(n);

    // eta^N(G) via log-sum-exp.
    row.log_eta_g = std::isfinite(sw.lw_max)
                        ? sw.lw_max + std::log(sw.wsum / static_cast<double>(n))
                        : kNegInf;
    row.eta_g = std::exp(row.log_eta_g);

    // psi_G(eta^N)(f) = sum w_i f_i / sum w_i; one fused evaluation pass.
    ws.obs_values.resize(observables.size());
    for (auto& buf : ws.obs_values) buf.resize(n);
    if (exec.serial())
        kernels::observables_serial(observables, ens.positions.data(), ens.dim, n,
                                    ws.obs_values);
    else
        kernels::observables_omp(observables, ens.positions.data(), ens.dim, n,
                                 ws.obs_values, kernels::resolved_threads(exec));
    row.psi.reserve(observables.size());
    for (std::size_t k = 0; k < observables.size(); ++k) {
        if (!std::isfinite(sw.lw_max)) {
            row.psi.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) num += ws.weights[i] * ws.obs_values[k][i];
        row.psi.push_back(num / sw.wsum);
    }
    return row;
}

}  // namespace

const char* to_string(SelectionPolicy policy) {
    switch (policy) {
        case SelectionPolicy::proportional: return "proportional";
        case SelectionPolicy::unit: return "unit";
        case SelectionPolicy::essential_sup: return "essential_sup";
    }
    return "?";
}

SelectionPolicy selection_policy_from_string(const std::string& name) {
    if (name == "proportional") return SelectionPolicy::proportional;
    if (name == "unit") return SelectionPolicy::unit;
    if (name == "essential_sup") return SelectionPolicy::essential_sup;
    throw ConfigError("unknown selection policy '" + name +
                      "' (expected proportional | unit | essential_sup)");
}

WalkerEnsemble init_ensemble(const FkModel& model, std::size_t n_walkers,
                             std::uint64_t seed, const ExecPolicy& exec) {
    if (n_walkers < 2) throw ConfigError("init_ensemble: need at least 2 walkers");
    WalkerEnsemble ens;
    ens.step = 0;
    ens.dim = model.dim();
    ens.n_walkers = n_walkers;
    ens.seed = seed;
    ens.positions.resize(n_walkers * static_cast<std::size_t>(ens.dim));

    const auto n = static_cast<std::ptrdiff_t>(n_walkers);
    double* pos = ens.positions.data();
    if (exec.serial()) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            model.sample_initial(pos + i * ens.dim, seed, static_cast<std::uint32_t>(i));
    } else {
        const int threads = kernels::resolved_threads(exec);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
        for (std::ptrdiff_t i = 0; i < n; ++i)
            model.sample_initial(pos + i * ens.dim, seed, static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i < ens.positions.size(); ++i)
        if (!std::isfinite(ens.positions[i]))
            throw PropagationError(0, i / static_cast<std::size_t>(ens.dim));
    return ens;
}

namespace {

void eval_log_potentials_into(const FkModel& model, const WalkerEnsemble& ens,
                              const ExecPolicy& exec, std::vector<double>& lw) {
    lw.resize(ens.n_walkers);
    if (exec.serial())
        kernels::log_potentials_serial(model, ens.step, ens.positions.data(), ens.dim,
                                       ens.n_walkers, lw.data());
    else
        kernels::log_potentials_omp(model, ens.step, ens.positions.data(), ens.dim,
                                    ens.n_walkers, lw.data(),
                                    kernels::resolved_threads(exec));
    for (std::size_t i = 0; i < lw.size(); ++i)
        if (std::isnan(lw[i]))
            throw NumericError("potential returned NaN for walker " + std::to_string(i) +
                               " at step " + std::to_string(ens.step));
}

}  // namespace

std::vector<double> eval_log_potentials(const FkModel& model, const WalkerEnsemble& ens,
                                        const ExecPolicy& exec) {
    std::vector<double> lw(ens.n_walkers);
    if (exec.serial())
        kernels::log_potentials_serial(model, ens.step, ens.positions.data(), ens.dim,
                                       ens.n_walkers, lw.data());
    else
        kernels::log_potentials_omp(model, ens.step, ens.positions.data(), ens.dim,
                                    ens.n_walkers, lw.data(),
                                    kernels::resolved_threads(exec));
    for (std::size_t i = 0; i < lw.size(); ++i)
        if (std::isnan(lw[i]))
            throw NumericError("potential returned NaN for walker " + std::to_string(i) +
                               " at step " + std::to_string(ens.step));
    return lw;
}

SelectionOutcome selection_step(WalkerEnsemble& ens, const std::vector<double>& lw,
                                SelectionPolicy policy, double log_g_max) {
    Workspace ws;
    const StepWeights sw = compute_weights(lw, ExecPolicy{1}, ws.weights);
    return selection_core(ens, lw, policy, log_g_max, sw, ws);
}

void mutation_step(WalkerEnsemble& ens, const FkModel& model, const ExecPolicy& exec) {
    Workspace ws;
    mutation_core(ens, model, exec, ws);
}

std::vector<Observable> default_observables(int dim) {
    std::vector<Observable> obs;
    for (int k = 0; k < dim; ++k) {
        obs.push_back({"psi_x" + std::to_string(k),
                       [k](const double* x, int) { return x[k]; }});
    }
    obs.push_back({"psi_xsq", [](const double* x, int d) {
                       double s = 0.0;
                       for (int j = 0; j < d; ++j) s += x[j] * x[j];
                       return s;
                   }});
    return obs;
}

EstimatorSeries run(const FkModel& model, const RunSpec& spec) {
    if (spec.n_steps < 0) throw ConfigError("run: n_steps must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<Observable> observables =
        spec.observables.empty() ? default_observables(model.dim()) : spec.observables;

    EstimatorSeries series;
    series.dim = model.dim();
    series.seed = spec.seed;
    series.n_walkers = spec.n_walkers;
    for (const auto& o : observables) series.observable_names.push_back(o.name);
    series.rows.reserve(static_cast<std::size_t>(spec.n_steps) + 1);

    WalkerEnsemble ens = init_ensemble(model, spec.n_walkers, spec.seed, spec.exec);
    Workspace ws;
    std::vector<double> lw;
    eval_log_potentials_into(model, ens, spec.exec, lw);
    StepWeights sw = compute_weights(lw, spec.exec, ws.weights);
    series.rows.push_back(record_core(ens, sw, observables, spec.exec, ws));

    for (int step = 0; step < spec.n_steps; ++step) {
        selection_core(ens, lw, spec.policy, model.log_g_max(), sw, ws);
        mutation_core(ens, model, spec.exec, ws);
        eval_log_potentials_into(model, ens, spec.exec, lw);
        sw = compute_weights(lw, spec.exec, ws.weights);
        series.rows.push_back(record_core(ens, sw, observables, spec.exec, ws));
    }

    series.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return series;
}

int BurnInRule::first_step(std::size_t n_walkers) const {
    if (explicit_steps) return *explicit_steps;
    const double raw = a + b * std::log(static_cast<double>(n_walkers));
    return static_cast<int>(std::ceil(raw));
}

EnergyEstimate energy_estimate(const EstimatorSeries& series, const BurnInRule& rule,
                               std::optional<double> delta) {
    if (series.rows.empty()) throw ConfigError("energy_estimate: empty series");
    const int burn_in = rule.first_step(series.n_walkers);
    const int last = series.rows.back().step;
    if (burn_in > last)
        throw ConfigError("energy_estimate: burn-in " + std::to_string(burn_in) +
                          " exceeds series length " + std::to_string(last));

    double sum = 0.0;
    int count = 0;
    for (const auto& row : series.rows) {
        if (row.step < burn_in) continue;
        sum += row.eta_g;
        ++count;
    }
    EnergyEstimate est;
    est.burn_in = burn_in;
    est.samples = count;
    est.value = sum / count;
    double ss = 0.0;
    for (const auto& row : series.rows) {
        if (row.step < burn_in) continue;
        const double dd = row.eta_g - est.value;
        ss += dd * dd;
    }
    est.std_error = count > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
    if (delta) est.lambda0 = -std::log(est.value) / *delta;
    return est;
}

}  // namespace fkdmc
