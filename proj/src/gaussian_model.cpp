#include "fkdmc/gaussian_model.hpp"

#include "fkdmc/errors.hpp"

namespace fkdmc {

GaussianModel::GaussianModel(Matrix a, Matrix b, Matrix s)
    : d(static_cast<int>(a.rows())), A(std::move(a)), B(std::move(b)), S(std::move(s)) {
    validate();
}

GaussianModel GaussianModel::scalar(double a, double b, double s) {
    GaussianModel m;
    m.d = 1;
    m.A = Matrix::Constant(1, 1, a);
    m.B = Matrix::Constant(1, 1, b);
    m.S = Matrix::Constant(1, 1, s);
    m.validate();
    return m;
}

void GaussianModel::validate() const {
    if (d <= 0) throw ConfigError("model: dimension must be positive");
    auto check_shape = [&](const Matrix& m, const char* name) {
        if (m.rows() != d || m.cols() != d)
            throw ConfigError(std::string("model: matrix ") + name + " must be " +
                              std::to_string(d) + "x" + std::to_string(d));
    };
    check_shape(A, "A");
    check_shape(B, "B");
    check_shape(S, "S");
    if (!is_symmetric(B)) throw ConfigError("model: B must be symmetric");
    if (!is_symmetric(S)) throw ConfigError("model: S must be symmetric");
    if (!is_positive_definite(B)) throw ConfigError("model: B must be positive definite");
    if (!is_positive_definite(S)) throw ConfigError("model: S must be positive definite");
    if (delta && *delta <= 0.0) throw ConfigError("model: delta must be positive");
}

GaussianMeasure GaussianMeasure::scalar(double m, double var) {
    return GaussianMeasure(Vector::Constant(1, m), Matrix::Constant(1, 1, var));
}

GaussianMeasure GaussianMeasure::standard(int d) {
    return GaussianMeasure(Vector::Zero(d), Matrix::Identity(d, d));
}

GaussianMeasure GaussianMeasure::point_mass(Vector x) {
    const auto d = x.size();
    return GaussianMeasure(std::move(x), Matrix::Zero(d, d));
}

void GaussianMeasure::validate() const {
    if (mean.size() == 0) throw ConfigError("measure: empty mean");
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw ConfigError("measure: covariance shape does not match mean");
    if (!is_symmetric(cov)) throw ConfigError("measure: covariance must be symmetric");
    if (!is_positive_semidefinite(cov))
        throw ConfigError("measure: covariance must be positive semi-definite");
}

GaussianMeasure bg_update(const GaussianMeasure& eta, const Matrix& S) {
    // (I + Omega S)^{-1} applied to both moments; valid for singular Omega.
    const Matrix resolvent_target = eta.cov;  // (I+Omega S)^{-1} Omega
    const Matrix omega_hat = symmetrized(solve_shifted(eta.cov * S, resolvent_target));
    const Vector m_hat = solve_shifted(eta.cov * S, Matrix(eta.mean));
    return GaussianMeasure(m_hat, omega_hat);
}

double gaussian_kl(const GaussianMeasure& p, const GaussianMeasure& q) {
    // Standard formula rearranged for nearly identical inputs: with E :=
    // Sigma_q^{-1/2} (Sigma_p - Sigma_q) Sigma_q^{-1/2} and eigenvalues l_i,
    //   KL = [ sum_i (l_i - log(1+l_i)) + dm' Sigma_q^{-1} dm ] / 2,
    // which avoids the trace/log-det cancellation and is non-negative term by
    // term.
    if (!is_positive_definite(q.cov))
        throw NumericError("gaussian_kl: second covariance is degenerate");
    if (!is_positive_definite(p.cov))
        throw NumericError("gaussian_kl: first covariance is degenerate");
    const Matrix w = inv_sqrt_spd(q.cov);
    const Matrix e = symmetrized(w * (p.cov - q.cov) * w);
    Eigen::SelfAdjointEigenSolver<Matrix> es(e, Eigen::EigenvaluesOnly);
    double acc = 0.0;
    for (int i = 0; i < e.rows(); ++i) {
        const double l = es.eigenvalues()(i);
        if (l <= -1.0) throw NumericError("gaussian_kl: first covariance is degenerate");
        acc += l - std::log1p(l);
    }
    const Vector dm_scaled = w * (p.mean - q.mean);
    return 0.5 * (acc + dm_scaled.squaredNorm());
}

double gaussian_potential_mass(const GaussianMeasure& eta, const Matrix& S) {
    const int d = eta.dim();
    // det(I + Omega S) = det(I + S^{1/2} Omega S^{1/2}) keeps the determinant SPD.
    const Matrix sh = sqrt_spd(S);
    const Matrix inner = Matrix::Identity(d, d) + sh * eta.cov * sh;
    const double logdet = log_det_spd(inner);
    // Mean term: -m' S (I + Omega S)^{-1} m / 2.
    const Vector w = solve_shifted(eta.cov * S, Matrix(eta.mean));
    const double quad = eta.mean.dot(S * w);
    return std::exp(-0.5 * logdet - 0.5 * quad);
}

}  // namespace fkdmc
