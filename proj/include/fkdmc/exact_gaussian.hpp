#pragma once

// Closed-form solutions for the linear-Gaussian Feynman-Kac model: the exact
// measure flow, Riccati fixed points and the ground-state triple, semigroup
// powers, the updated-model (hat) transform, 1-d closed-form recursions, and
// exact discretization of the continuous model. All pure functions.

#include <vector>

#include "fkdmc/gaussian_model.hpp"

namespace fkdmc {

// Phi(Omega) = A (I + Omega S)^{-1} Omega A' + B, the covariance map of the flow.
Matrix phi_map(const Matrix& omega, const GaussianModel& model);

// E(Omega) = A (I + Omega S)^{-1}, the mean map of the flow.
Matrix e_map(const Matrix& omega, const GaussianModel& model);

// eta_0, eta_1, ..., eta_n with m_k = E(Omega_{k-1}) m_{k-1}, Omega_k = Phi(Omega_{k-1}).
std::vector<GaussianMeasure> exact_flow(const GaussianModel& model,
                                        const GaussianMeasure& eta0, int n);

struct GroundStateTriple {
    Matrix S_inf;   // ground-state quadratic form, h(x) ~ exp(-x'S_inf x/2)
    double E0;      // leading eigenvalue det(I + B S_inf)^{-1/2}
    Matrix P_inf;   // covariance of eta_inf = N(0, P_inf)
    double riccati_residual;
    int iterations;
};

// Fixed-point iteration X <- A'(X B + I)^{-1} X A + S from X = S for S_inf,
// and Omega <- Phi(Omega) from 0 for P_inf. Throws NonConvergenceError.
GroundStateTriple ground_state(const GaussianModel& model, double tol = 1e-12,
                               int max_iter = 100000);

// Q^n(1)(x) = lambda_n exp(-x^2 q_n / 2), Q^n(I)(x) = mu_n x exp(-x^2 q_n / 2).
// Index counts applications of Q, so (q_0, lambda_0, mu_0) = (0, 1, 1) is the
// identity operator and index 1 carries (S, 1, A).
struct ClosedForm1D {
    std::vector<double> q;
    std::vector<double> lambda;
    std::vector<double> mu;
};

ClosedForm1D closed_form_1d(const GaussianModel& model, int n);

struct QuadraticPush {
    double factor;  // det(I - B F)^{-1/2}
    Matrix F_out;   // -A'(F B - I)^{-1} F A
};

// P_{A,B}(exp(x'Fx/2)) = factor * exp(x'F_out x/2); requires I - B F positive
// definite, otherwise the integral diverges and NonIntegrableError is thrown.
QuadraticPush quadratic_push(const GaussianModel& model, const Matrix& F);

// The k-step factorization Q^k = G_k P_k: kernel P_k(x,.) = N(A_k x, B_k) and
// potential G_k(x) ~ exp(-x'S_k x/2), built by iterating the mean/covariance
// maps from the zero matrix and accumulating S_k = sum_l E_l' (S^{-1}+Phi^l(0))^{-1} E_l.
struct PropagatorPowers {
    int k;
    Matrix A_k;
    Matrix B_k;
    Matrix S_k;
};

PropagatorPowers propagator_powers(const GaussianModel& model, int k);

// Updated-measure evolution operators: B_hat = (B^{-1}+S)^{-1},
// A_hat = B_hat B^{-1} A, S_hat = A'(S - S(B^{-1}+S)^{-1}S)A. S_hat is only
// PSD when A is singular; `degenerate` flags that case and consumers that
// need S_hat > 0 (Lyapunov construction, k-step importance sampling) refuse it.
struct HatModel {
    GaussianModel model;  // (A_hat, B_hat, S_hat); S_hat may fail the SPD check
    double log_factor;    // log of the constant in G_hat = P(G_S): -log det(I+BS)/2
    bool degenerate;
};

HatModel hat_model(const GaussianModel& model);

enum class DiscretizationScheme { exact, euler };

// Discrete model for dX = C X dt + sqrt(2D) dW observed on a delta-mesh with
// quadratic potential U(x) = x'Fx/2: exact uses A = e^{C delta} and the Van
// Loan block exponential for B = int_0^delta e^{Cs} 2D e^{C's} ds; euler uses
// A = I + C delta, B = 2 D delta. Either way S = F delta.
GaussianModel discretize_continuous(const Matrix& C, const Matrix& D, const Matrix& F,
                                    double delta, DiscretizationScheme scheme);

}  // namespace fkdmc
