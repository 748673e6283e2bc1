#pragma once

// N-walker DMC engine: selection with epsilon-policies, kernel mutation, and
// per-step estimator recording. Potential evaluation, mutation and observable
// evaluation are data-parallel across walkers (OpenMP kernels with a serial
// reference); weight normalization, replacement draws and all estimator
// reductions are serial so results are bit-identical for any thread count.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fkdmc/fk_model.hpp"

namespace fkdmc {

enum class SelectionPolicy { proportional, unit, essential_sup };

const char* to_string(SelectionPolicy policy);
SelectionPolicy selection_policy_from_string(const std::string& name);

// threads == 1 selects the serial reference kernels; 0 means "all available".
struct ExecPolicy {
    int threads = 1;
    bool serial() const { return threads == 1; }
};

struct WalkerEnsemble {
    int step = 0;
    int dim = 0;
    std::size_t n_walkers = 0;
    std::uint64_t seed = 0;
    std::vector<double> positions;  // n_walkers x dim, row-major

    const double* walker(std::size_t i) const { return positions.data() + i * dim; }
    double* walker(std::size_t i) { return positions.data() + i * dim; }
};

WalkerEnsemble init_ensemble(const FkModel& model, std::size_t n_walkers,
                             std::uint64_t seed, const ExecPolicy& exec = {});

// log G evaluated at every walker. NaN potentials raise NumericError.
std::vector<double> eval_log_potentials(const FkModel& model, const WalkerEnsemble& ens,
                                        const ExecPolicy& exec = {});

struct SelectionOutcome {
    std::vector<std::uint32_t> parents;  // parents[i] = index walker i was copied from
    double epsilon;                      // the policy's tuning parameter value
};

// In-place selection: walker i survives with probability epsilon*G(x_i), else
// is replaced by a draw proportional to G. Throws ExtinctionError when no
// walker carries a finite log-potential.
SelectionOutcome selection_step(WalkerEnsemble& ens,
                                const std::vector<double>& log_potentials,
                                SelectionPolicy policy,
                                double log_g_max = 0.0);

// In-place mutation by one kernel draw per walker; advances the step index.
// Non-finite coordinates raise PropagationError with the walker index.
void mutation_step(WalkerEnsemble& ens, const FkModel& model, const ExecPolicy& exec = {});

struct Observable {
    std::string name;
    std::function<double(const double* x, int dim)> f;
};

// psi_x0..psi_x{d-1} (coordinates) and psi_xsq (squared norm).
std::vector<Observable> default_observables(int dim);

struct EstimatorRow {
    int step = 0;
    std::vector<double> mean;  // empirical mean of eta_n^N
    double eta_g = 0.0;        // eta_n^N(G); may underflow to 0 in divergent regimes
    double log_eta_g = 0.0;    // log-sum-exp form of the same quantity
    std::vector<double> psi;   // psi_{G_n}(eta_n^N)(f) per registered observable
};

struct EstimatorSeries {
    int dim = 0;
    std::uint64_t seed = 0;
    std::size_t n_walkers = 0;
    std::vector<std::string> observable_names;
    std::vector<EstimatorRow> rows;
    double wall_ms = 0.0;
};

struct RunSpec {
    std::size_t n_walkers = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    SelectionPolicy policy = SelectionPolicy::proportional;
    ExecPolicy exec = {};
    std::vector<Observable> observables;  // empty -> default_observables(dim)
};

// Alternating selection/mutation from an i.i.d. start; estimators recorded at
// every step 0..n_steps inclusive.
EstimatorSeries run(const FkModel& model, const RunSpec& spec);

struct BurnInRule {
    double a = 10.0;
    double b = 2.0;
    std::optional<int> explicit_steps;  // overrides a + b ln N when set

    int first_step(std::size_t n_walkers) const;
};

struct EnergyEstimate {
    double value = 0.0;
    double std_error = 0.0;  // naive i.i.d.-style, no autocorrelation correction
    int burn_in = 0;
    int samples = 0;
    std::optional<double> lambda0;  // -log(value)/delta when a time step is known
};

EnergyEstimate energy_estimate(const EstimatorSeries& series, const BurnInRule& rule,
                               std::optional<double> delta = {});

}  // namespace fkdmc
