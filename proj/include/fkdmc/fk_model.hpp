#pragma once

// The abstract Feynman-Kac model driving the walker engine: a per-step
// positive potential (exposed in log form so selection survives extreme
// regimes), a per-step stochastic kernel, and an initial sampler. Kernel and
// initial draws pull from counter-based substreams keyed by (step, walker),
// never from shared state.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>

#include "fkdmc/gaussian_model.hpp"
#include "fkdmc/rng.hpp"

namespace fkdmc {

class FkModel {
  public:
    virtual ~FkModel() = default;

    virtual int dim() const = 0;

    // log G_n(x); -inf encodes a numerically dead weight, NaN is an error.
    virtual double log_potential(int step, const double* x) const = 0;

    // log of the declared essential bound g_max; +inf for unnormalized potentials.
    virtual double log_g_max() const = 0;

    // One draw of P_{step}(x, .) into y, using substream (step, walker, mutation).
    virtual void sample_kernel(int step, const double* x, double* y,
                               std::uint64_t seed, std::uint32_t walker) const = 0;

    // One draw of eta_0 into x, using substream (0, walker, init).
    virtual void sample_initial(double* x, std::uint64_t seed,
                                std::uint32_t walker) const = 0;
};

// Time-homogeneous Gaussian instance: kernel N(Ax, B), potential
// G(x) = exp(log_scale - x'Sx/2), initial measure N(m0, Omega0).
class GaussianFkModel final : public FkModel {
  public:
    GaussianFkModel(GaussianModel model, GaussianMeasure eta0, double log_scale = 0.0);

    int dim() const override { return model_.d; }
    double log_potential(int step, const double* x) const override;
    double log_g_max() const override { return log_scale_; }  // sup at the origin
    void sample_kernel(int step, const double* x, double* y, std::uint64_t seed,
                       std::uint32_t walker) const override;
    void sample_initial(double* x, std::uint64_t seed, std::uint32_t walker) const override;

    const GaussianModel& model() const { return model_; }
    const GaussianMeasure& initial() const { return eta0_; }
    double log_scale() const { return log_scale_; }

    // Same model with the potential multiplied by exp(log_c); selection
    // estimates are unchanged by construction (scale invariance).
    GaussianFkModel rescaled(double log_c) const {
        return GaussianFkModel(model_, eta0_, log_scale_ + log_c);
    }

  private:
    GaussianModel model_;
    GaussianMeasure eta0_;
    double log_scale_;
    Matrix chol_b_;     // L with L L' = B
    Matrix chol_omega_; // factor of Omega0 (PSD allowed)
};

// Arbitrary callbacks; test scaffolding and non-Gaussian toy models.
class CallbackFkModel final : public FkModel {
  public:
    using LogPotentialFn = std::function<double(int step, const double* x)>;
    using KernelFn =
        std::function<void(int step, const double* x, double* y, Substream& rng)>;
    using InitialFn = std::function<void(double* x, Substream& rng)>;

    CallbackFkModel(int d, LogPotentialFn g, KernelFn p, InitialFn init,
                    double log_g_max = std::numeric_limits<double>::infinity())
        : d_(d), log_g_(std::move(g)), kernel_(std::move(p)), init_(std::move(init)),
          log_g_max_(log_g_max) {}

    int dim() const override { return d_; }
    double log_potential(int step, const double* x) const override { return log_g_(step, x); }
    double log_g_max() const override { return log_g_max_; }
    void sample_kernel(int step, const double* x, double* y, std::uint64_t seed,
                       std::uint32_t walker) const override {
        Substream rng(seed, static_cast<std::uint32_t>(step), walker, StreamClass::mutation);
        kernel_(step, x, y, rng);
    }
    void sample_initial(double* x, std::uint64_t seed, std::uint32_t walker) const override {
        Substream rng(seed, 0, walker, StreamClass::init);
        init_(x, rng);
    }

  private:
    int d_;
    LogPotentialFn log_g_;
    KernelFn kernel_;
    InitialFn init_;
    double log_g_max_;
};

}  // namespace fkdmc
