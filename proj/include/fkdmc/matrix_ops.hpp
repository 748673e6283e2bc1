#pragma once

// Small dense-matrix helpers shared across the exact-solution and analysis
// code. Everything here operates on Eigen dynamic matrices; dimensions in
// this project are tiny (d <= ~10), so clarity wins over blocking tricks.

#include <Eigen/Dense>

namespace fkdmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kPdTolerance = 1e-10;  // smallest-eigenvalue threshold for SPD checks

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& sym);

bool is_symmetric(const Matrix& m, double tol = 1e-9);

// SPD/PSD predicates via symmetric eigen-decomposition.
bool is_positive_definite(const Matrix& sym, double tol = kPdTolerance);
bool is_positive_semidefinite(const Matrix& sym, double tol = kPdTolerance);

// Symmetric square root (and inverse square root) of an SPD matrix.
Matrix sqrt_spd(const Matrix& sym);
Matrix inv_sqrt_spd(const Matrix& sym);

// Largest singular value.
double spectral_norm(const Matrix& m);

// log det of an SPD matrix via Cholesky.
double log_det_spd(const Matrix& sym);

// Cholesky factor L with L L' = sym; PSD inputs allowed (eigen clip at 0).
Matrix cholesky_psd(const Matrix& sym);

// Entry-wise max-abs difference, the stopping metric for fixed-point loops.
double max_abs_diff(const Matrix& a, const Matrix& b);

// Solves (I + M) X = R without assuming symmetry of M; throws NumericError
// when the system is numerically singular.
Matrix solve_shifted(const Matrix& m, const Matrix& rhs);

}  // namespace fkdmc
