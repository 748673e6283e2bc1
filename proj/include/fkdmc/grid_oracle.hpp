#pragma once

// Brute-force grid discretization of the 1-d integral operator
// Q(f)(x) = G(x) int p(x,y) f(y) dy on [-L, L] with trapezoid quadrature.
// Deliberately independent of the closed-form code paths: this is the oracle
// the exact solutions and the walker engine are tested against.

#include <vector>

#include "fkdmc/exact_gaussian.hpp"
#include "fkdmc/gaussian_model.hpp"

namespace fkdmc {

struct GridOperator {
    double L = 0.0;
    int M = 0;
    Vector nodes;    // M points on [-L, L]
    Vector weights;  // trapezoid weights
    Matrix kernel;   // K(i,j) = G(x_i) p(x_i, x_j), quadrature weight not folded in
    bool unit_potential = false;
};

// L > 0, M >= 3 and odd. unit_potential replaces G by 1 (Markov-kernel checks).
GridOperator build_grid(const GaussianModel& model, double L, int M,
                        bool unit_potential = false);

// Convention for choosing L: 8 standard deviations of max(B, P_inf).
double suggested_half_width(const GaussianModel& model);

// Right action (Q f)(x_i) = sum_j K(i,j) w_j f(x_j).
Vector apply_right(const GridOperator& op, const Vector& f);

// Left action on densities: (rho Q)(y_j) = sum_i rho(x_i) w_i K(i,j).
Vector apply_left(const GridOperator& op, const Vector& rho);

struct PowerIterationResult {
    double eigenvalue;
    Vector eigenvector;  // positive, unit quadrature-L2 norm
    int iterations;
};

// Plain normalized power iteration; converged when the eigenvalue has drifted
// by less than `drift_tol` over a 10-iteration window.
PowerIterationResult power_iteration(const GridOperator& op, double drift_tol = 1e-12,
                                     int max_iter = 200000);

struct GridFlowStep {
    Vector density;  // normalized to unit quadrature mass
    double mean;
    double variance;
};

// Repeated apply-and-normalize of the left action; step 0 is eta0 itself.
std::vector<GridFlowStep> grid_flow(const GridOperator& op, const Vector& eta0_density,
                                    int n);

// Density samples of a Gaussian measure on the grid nodes.
Vector gaussian_density_on_grid(const GridOperator& op, const GaussianMeasure& eta);

}  // namespace fkdmc
