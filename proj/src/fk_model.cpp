#include "fkdmc/fk_model.hpp"

#include "fkdmc/errors.hpp"

namespace fkdmc {

GaussianFkModel::GaussianFkModel(GaussianModel model, GaussianMeasure eta0,
                                 double log_scale)
    : model_(std::move(model)), eta0_(std::move(eta0)), log_scale_(log_scale) {
    model_.validate();
    eta0_.validate();
    if (eta0_.dim() != model_.d)
        throw ConfigError("fk model: initial measure dimension does not match model");
    chol_b_ = cholesky_psd(model_.B);
    chol_omega_ = cholesky_psd(eta0_.cov);
}

double GaussianFkModel::log_potential(int /*step*/, const double* x) const {
    const int d = model_.d;
    double quad = 0.0;
    for (int i = 0; i < d; ++i) {
        double sx = 0.0;
        for (int j = 0; j < d; ++j) sx += model_.S(i, j) * x[j];
        quad += x[i] * sx;
    }
    return log_scale_ - 0.5 * quad;
}

void GaussianFkModel::sample_kernel(int step, const double* x, double* y,
                                    std::uint64_t seed, std::uint32_t walker) const {
    const int d = model_.d;
    for (int i = 0; i < d; ++i) {
        double v = 0.0;
        for (int j = 0; j < d; ++j) v += model_.A(i, j) * x[j];
        y[i] = v;
    }
    // y += L z with L the Cholesky factor of B
    Substream rng(seed, static_cast<std::uint32_t>(step), walker, StreamClass::mutation);
    for (int i = 0; i < d; ++i) {
        const double zi = rng.normal();
        for (int j = i; j < d; ++j) y[j] += chol_b_(j, i) * zi;
    }
}

void GaussianFkModel::sample_initial(double* x, std::uint64_t seed,
                                     std::uint32_t walker) const {
    const int d = model_.d;
    Substream rng(seed, 0, walker, StreamClass::init);
    for (int i = 0; i < d; ++i) x[i] = eta0_.mean(i);
    for (int i = 0; i < d; ++i) {
        const double zi = rng.normal();
        for (int j = i; j < d; ++j) x[j] += chol_omega_(j, i) * zi;
    }
}

}  // namespace fkdmc
