#include "fkdmc/exact_gaussian.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "fkdmc/errors.hpp"

namespace fkdmc {

Matrix phi_map(const Matrix& omega, const GaussianModel& model) {
    // (I + Omega S)^{-1} Omega equals (Omega^{-1} + S)^{-1}, hence symmetric.
    const Matrix resolvent = symmetrized(solve_shifted(omega * model.S, omega));
    return symmetrized(model.A * resolvent * model.A.transpose() + model.B);
}

Matrix e_map(const Matrix& omega, const GaussianModel& model) {
    const int d = model.d;
    return model.A * solve_shifted(omega * model.S, Matrix(Matrix::Identity(d, d)));
}

std::vector<GaussianMeasure> exact_flow(const GaussianModel& model,
                                        const GaussianMeasure& eta0, int n) {
    if (n < 0) throw ConfigError("exact_flow: n must be >= 0");
    std::vector<GaussianMeasure> flow;
    flow.reserve(static_cast<std::size_t>(n) + 1);
    flow.push_back(eta0);
    for (int k = 0; k < n; ++k) {
        const GaussianMeasure& prev = flow.back();
        GaussianMeasure next;
        next.mean = e_map(prev.cov, model) * prev.mean;
        next.cov = phi_map(prev.cov, model);
        flow.push_back(std::move(next));
    }
    return flow;
}

namespace {

// X <- A'(X B + I)^{-1} X A + S; (X B + I)^{-1} X = (B + X^{-1})^{-1} is symmetric.
Matrix riccati_map(const Matrix& x, const GaussianModel& model) {
    const Matrix inner = symmetrized(solve_shifted(x * model.B, x));
    return symmetrized(model.A.transpose() * inner * model.A + model.S);
}

}  // namespace

GroundStateTriple ground_state(const GaussianModel& model, double tol, int max_iter) {
    if (tol <= 0.0) throw ConfigError("ground_state: tol must be positive");
    GroundStateTriple out;

    Matrix x = model.S;
    double residual = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        const Matrix next = riccati_map(x, model);
        residual = max_abs_diff(next, x);
        x = next;
        if (residual < tol) break;
    }
    if (residual >= tol) throw NonConvergenceError("ground_state: S_inf iteration", residual);
    out.S_inf = x;
    out.riccati_residual = max_abs_diff(riccati_map(x, model), x);
    out.iterations = it + 1;

    // E0 = det(I + B S_inf)^{-1/2}, evaluated through the SPD-similar form.
    const Matrix bh = sqrt_spd(model.B);
    out.E0 = std::exp(-0.5 * log_det_spd(Matrix::Identity(model.d, model.d) +
                                         bh * out.S_inf * bh));

    Matrix omega = Matrix::Zero(model.d, model.d);
    residual = 0.0;
    for (it = 0; it < max_iter; ++it) {
        const Matrix next = phi_map(omega, model);
        residual = max_abs_diff(next, omega);
        omega = next;
        if (residual < tol) break;
    }
    if (residual >= tol) throw NonConvergenceError("ground_state: P_inf iteration", residual);
    out.P_inf = omega;
    return out;
}

ClosedForm1D closed_form_1d(const GaussianModel& model, int n) {
    if (model.d != 1) throw ConfigError("closed_form_1d: model must be one-dimensional");
    if (n < 0) throw ConfigError("closed_form_1d: n must be >= 0");
    const double a = model.A(0, 0), b = model.B(0, 0), s = model.S(0, 0);
    ClosedForm1D cf;
    cf.q.assign(1, 0.0);
    cf.lambda.assign(1, 1.0);
    cf.mu.assign(1, 1.0);
    for (int j = 0; j < n; ++j) {
        const double qj = cf.q[j];
        const double denom = 1.0 + qj * b;
        cf.q.push_back(a * a * qj / denom + s);
        cf.lambda.push_back(cf.lambda[j] / std::sqrt(denom));
        cf.mu.push_back(a * cf.mu[j] / (denom * std::sqrt(denom)));
    }
    return cf;
}

QuadraticPush quadratic_push(const GaussianModel& model, const Matrix& F) {
    const int d = model.d;
    if (F.rows() != d || F.cols() != d || !is_symmetric(F))
        throw ConfigError("quadratic_push: F must be symmetric d x d");

    // Integrability: I - B F must be positive definite; test on the SPD-similar
    // matrix I - B^{1/2} F B^{1/2}.
    const Matrix bh = sqrt_spd(model.B);
    const Matrix gauge = Matrix::Identity(d, d) - bh * F * bh;
    if (!is_positive_definite(gauge))
        throw NonIntegrableError("quadratic_push: I - B F is not positive definite, "
                                 "exp(x'Fx/2) is not P-integrable");

    QuadraticPush out;
    out.factor = std::exp(-0.5 * log_det_spd(gauge));
    // -(F B - I)^{-1} F = (I - F B)^{-1} F, symmetric.
    const Matrix w = symmetrized(solve_shifted(-F * model.B, F));
    out.F_out = symmetrized(model.A.transpose() * w * model.A);
    return out;
}

PropagatorPowers propagator_powers(const GaussianModel& model, int k) {
    if (k < 1) throw ConfigError("propagator_powers: k must be >= 1");
    const int d = model.d;
    const Matrix s_inv = Eigen::LLT<Matrix>(model.S).solve(Matrix::Identity(d, d));

    PropagatorPowers out;
    out.k = k;
    Matrix product = Matrix::Identity(d, d);  // E_l(0), starting from E_0 = I
    Matrix omega = Matrix::Zero(d, d);        // Phi^l(0)
    Matrix s_k = Matrix::Zero(d, d);
    for (int l = 0; l < k; ++l) {
        const Matrix w = symmetrized(s_inv + omega);
        s_k += product.transpose() * Eigen::LLT<Matrix>(w).solve(product);
        product = e_map(omega, model) * product;
        omega = phi_map(omega, model);
    }
    out.A_k = product;
    out.B_k = omega;
    out.S_k = symmetrized(s_k);
    return out;
}

HatModel hat_model(const GaussianModel& model) {
    const int d = model.d;
    const Matrix b_inv = Eigen::LLT<Matrix>(model.B).solve(Matrix::Identity(d, d));
    const Matrix b_hat = symmetrized(Eigen::LLT<Matrix>(symmetrized(b_inv + model.S))
                                         .solve(Matrix::Identity(d, d)));
    const Matrix a_hat = b_hat * b_inv * model.A;
    const Matrix s_hat = symmetrized(
        model.A.transpose() * (model.S - model.S * b_hat * model.S) * model.A);

    HatModel out;
    out.model.d = d;
    out.model.A = a_hat;
    out.model.B = b_hat;
    out.model.S = s_hat;
    const Matrix bh = sqrt_spd(model.B);
    out.log_factor = -0.5 * log_det_spd(Matrix::Identity(d, d) + bh * model.S * bh);
    out.degenerate = !is_positive_definite(s_hat);
    return out;
}

GaussianModel discretize_continuous(const Matrix& C, const Matrix& D, const Matrix& F,
                                    double delta, DiscretizationScheme scheme) {
    if (delta <= 0.0) throw ConfigError("discretize_continuous: delta must be positive");
    const int d = static_cast<int>(C.rows());
    if (C.cols() != d || D.rows() != d || D.cols() != d || F.rows() != d || F.cols() != d)
        throw ConfigError("discretize_continuous: C, D, F must be square of equal size");
    if (!is_symmetric(D) || !is_positive_definite(D))
        throw ConfigError("discretize_continuous: D must be SPD");
    if (!is_symmetric(F) || !is_positive_definite(F))
        throw ConfigError("discretize_continuous: F must be SPD");

    GaussianModel out;
    out.d = d;
    out.S = F * delta;
    out.delta = delta;

    if (scheme == DiscretizationScheme::euler) {
        out.A = Matrix::Identity(d, d) + C * delta;
        out.B = 2.0 * D * delta;
    } else {
        // Van Loan block exponential: with M = [[C, 2D], [0, -C']], the noise
        // integral int_0^delta e^{Cs} 2D e^{C's} ds equals F12 F11'.
        Matrix m = Matrix::Zero(2 * d, 2 * d);
        m.topLeftCorner(d, d) = C;
        m.topRightCorner(d, d) = 2.0 * D;
        m.bottomRightCorner(d, d) = -C.transpose();
        const Matrix e = (m * delta).exp();
        out.A = e.topLeftCorner(d, d);
        out.B = symmetrized(e.topRightCorner(d, d) * out.A.transpose());
    }
    out.validate();
    return out;
}

}  // namespace fkdmc
