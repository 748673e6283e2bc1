#pragma once

// The linear-Gaussian model triple and Gaussian measures. The kernel is
// P(x,.) = N(A x, B) and the potential is G(x) = exp(-x'Sx/2); together they
// make the one Feynman-Kac model whose flow stays Gaussian, which is what
// every closed-form oracle in this project is built on.

#include <optional>

#include "fkdmc/matrix_ops.hpp"

namespace fkdmc {

struct GaussianModel {
    int d = 0;
    Matrix A;  // drift, unrestricted (may be unstable / non-symmetric)
    Matrix B;  // mutation covariance, SPD
    Matrix S;  // potential quadratic form, SPD

    // Optional time step carried over from a continuous-model discretization;
    // used to report lambda0 = -log(E0)/delta.
    std::optional<double> delta;

    GaussianModel() = default;
    GaussianModel(Matrix a, Matrix b, Matrix s);

    static GaussianModel scalar(double a, double b, double s);

    // Throws ConfigError when shapes disagree or B, S fail the SPD check.
    void validate() const;
};

struct GaussianMeasure {
    Vector mean;
    Matrix cov;  // PSD; a zero matrix encodes a point mass

    GaussianMeasure() = default;
    GaussianMeasure(Vector m, Matrix omega) : mean(std::move(m)), cov(std::move(omega)) {}

    static GaussianMeasure scalar(double m, double var);
    static GaussianMeasure standard(int d);
    static GaussianMeasure point_mass(Vector x);

    int dim() const { return static_cast<int>(mean.size()); }
    void validate() const;
};

// Boltzmann-Gibbs update psi_{G_S}(eta) of a Gaussian measure: reweighting
// N(m, Omega) by exp(-x'Sx/2) gives N((I+Omega S)^{-1} m, (I+Omega S)^{-1} Omega).
GaussianMeasure bg_update(const GaussianMeasure& eta, const Matrix& S);

// KL divergence Ent(p | q) between non-degenerate Gaussians.
double gaussian_kl(const GaussianMeasure& p, const GaussianMeasure& q);

// Integral of exp(-x'Sx/2) against N(m, Omega): det(I+Omega S)^{-1/2} *
// exp(-m'(Omega + S^{-1})^{-1} m / 2).
double gaussian_potential_mass(const GaussianMeasure& eta, const Matrix& S);

}  // namespace fkdmc
