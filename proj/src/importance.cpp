#include "fkdmc/importance.hpp"

#include "fkdmc/errors.hpp"

namespace fkdmc {

GaussianModel KStepModel::gaussian() const {
    GaussianModel m;
    m.d = base.d;
    m.A = powers.A_k;
    m.B = powers.B_k;
    m.S = powers.S_k;
    m.validate();
    return m;
}

GaussianFkModel KStepModel::fk_model() const {
    return GaussianFkModel(gaussian(), eta0_updated);
}

std::vector<GaussianMeasure> KStepModel::exact_kstep_flow(int n) const {
    return exact_flow(gaussian(), eta0_updated, n);
}

KStepModel build_k_step(const GaussianModel& base, const GaussianMeasure& eta0, int k) {
    if (k < 1) throw ConfigError("build_k_step: k must be >= 1");
    const HatModel hat = hat_model(base);
    if (hat.degenerate)
        throw ConfigError("build_k_step: updated potential is degenerate (S_hat is "
                          "singular; A must be non-singular)");
    KStepModel out;
    out.k = k;
    out.base = base;
    out.hat = hat.model;
    out.powers = propagator_powers(hat.model, k);
    out.eta0_updated = bg_update(eta0, base.S);
    return out;
}

std::vector<double> stability_gap_sequence(const GaussianModel& model, int k_max) {
    if (k_max < 1) throw ConfigError("min_stable_k: k_max must be >= 1");
    std::vector<double> gaps;
    gaps.reserve(k_max);
    for (int k = 1; k <= k_max; ++k) {
        const PropagatorPowers p = propagator_powers(model, k);
        const Matrix diff = p.S_k - p.A_k.transpose() * p.S_k * p.A_k;
        gaps.push_back(min_eigenvalue(diff));
    }
    return gaps;
}

int min_stable_k(const GaussianModel& model, int k_max) {
    const std::vector<double> gaps = stability_gap_sequence(model, k_max);
    for (int k = 1; k <= k_max; ++k)
        if (gaps[k - 1] > kPdTolerance) return k;
    throw NoStableKError(k_max, gaps);
}

}  // namespace fkdmc
