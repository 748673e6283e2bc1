#include "fkdmc/matrix_ops.hpp"

#include "fkdmc/errors.hpp"

namespace fkdmc {

double min_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Matrix& m, double tol) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

bool is_positive_definite(const Matrix& sym, double tol) {
    return min_eigenvalue(sym) > tol;
}

bool is_positive_semidefinite(const Matrix& sym, double tol) {
    return min_eigenvalue(sym) > -tol;
}

Matrix sqrt_spd(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("sqrt_spd: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

Matrix inv_sqrt_spd(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("inv_sqrt_spd: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

double spectral_norm(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m.transpose() * m),
                                             Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double log_det_spd(const Matrix& sym) {
    Eigen::LLT<Matrix> llt(symmetrized(sym));
    if (llt.info() != Eigen::Success)
        throw NumericError("log_det_spd: Cholesky failed, matrix not SPD");
    return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

Matrix cholesky_psd(const Matrix& sym) {
    Eigen::LLT<Matrix> llt(symmetrized(sym));
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // PSD fallback: eigen-decompose and clip tiny negative modes.
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    if (es.eigenvalues().minCoeff() < -kPdTolerance)
        throw NumericError("cholesky_psd: matrix has a negative eigenvalue");
    Matrix half = es.eigenvectors() *
                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    // Re-triangularize so downstream code sees a lower factor.
    Eigen::HouseholderQR<Matrix> qr(half.transpose());
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    Matrix l = r.transpose();
    for (int j = 0; j < l.cols(); ++j)
        if (l(j, j) < 0.0) l.col(j) = -l.col(j);
    return l;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

Matrix solve_shifted(const Matrix& m, const Matrix& rhs) {
    const auto n = m.rows();
    Matrix sys = Matrix::Identity(n, n) + m;
    Eigen::PartialPivLU<Matrix> lu(sys);
    if (lu.rcond() < 1e-14)
        throw NumericError("solve_shifted: (I + M) numerically singular");
    return lu.solve(rhs);
}

}  // namespace fkdmc
