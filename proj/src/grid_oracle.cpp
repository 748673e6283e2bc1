#include "fkdmc/grid_oracle.hpp"

#include <cmath>

#include "fkdmc/errors.hpp"

namespace fkdmc {

GridOperator build_grid(const GaussianModel& model, double L, int M, bool unit_potential) {
    if (model.d != 1) throw ConfigError("build_grid: model must be one-dimensional");
    if (L <= 0.0) throw ConfigError("build_grid: L must be positive");
    if (M < 3 || M % 2 == 0) throw ConfigError("build_grid: M must be odd and >= 3");

    GridOperator op;
    op.L = L;
    op.M = M;
    op.unit_potential = unit_potential;
    op.nodes.resize(M);
    op.weights.resize(M);
    const double h = 2.0 * L / (M - 1);
    for (int i = 0; i < M; ++i) {
        op.nodes[i] = -L + h * i;
        op.weights[i] = (i == 0 || i == M - 1) ? 0.5 * h : h;
    }

    const double a = model.A(0, 0), b = model.B(0, 0), s = model.S(0, 0);
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * b);
    op.kernel.resize(M, M);
    for (int i = 0; i < M; ++i) {
        const double x = op.nodes[i];
        const double g = unit_potential ? 1.0 : std::exp(-0.5 * s * x * x);
        for (int j = 0; j < M; ++j) {
            const double dy = op.nodes[j] - a * x;
            op.kernel(i, j) = g * norm * std::exp(-0.5 * dy * dy / b);
        }
    }
    return op;
}

double suggested_half_width(const GaussianModel& model) {
    const double b = model.B(0, 0);
    const double p_inf = ground_state(model).P_inf(0, 0);
    return 8.0 * std::sqrt(std::max(b, p_inf));
}

Vector apply_right(const GridOperator& op, const Vector& f) {
    return op.kernel * op.weights.cwiseProduct(f);
}

Vector apply_left(const GridOperator& op, const Vector& rho) {
    return op.kernel.transpose() * op.weights.cwiseProduct(rho);
}

PowerIterationResult power_iteration(const GridOperator& op, double drift_tol,
                                     int max_iter) {
    const int M = op.M;
    Vector f = Vector::Ones(M);
    auto quad_norm = [&](const Vector& v) {
        return std::sqrt(op.weights.dot(v.cwiseProduct(v)));
    };
    f /= quad_norm(f);

    std::vector<double> history;
    history.reserve(64);
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector next = apply_right(op, f);
        const double nrm = quad_norm(next);
        if (!(nrm > 0.0))
            throw NumericError("power_iteration: iterate collapsed to zero mass");
        lambda = nrm;  // ||Q f|| with ||f|| = 1
        f = next / nrm;
        history.push_back(lambda);
        const std::size_t lag = 10;
        if (history.size() > lag &&
            std::abs(lambda - history[history.size() - 1 - lag]) < drift_tol) {
            return {lambda, f, it + 1};
        }
    }
    throw NonConvergenceError("power_iteration", lambda);
}

std::vector<GridFlowStep> grid_flow(const GridOperator& op, const Vector& eta0_density,
                                    int n) {
    if (n < 0) throw ConfigError("grid_flow: n must be >= 0");
    if (eta0_density.size() != op.M)
        throw ConfigError("grid_flow: density length must match grid size");
    if (eta0_density.minCoeff() < 0.0)
        throw ConfigError("grid_flow: density must be non-negative");

    auto normalize = [&](Vector rho) {
        const double mass = op.weights.dot(rho);
        if (!(mass > 1e-300))
            throw NumericError("grid_flow: density mass underflow");
        rho /= mass;
        return rho;
    };
    auto moments = [&](const Vector& rho) {
        const double mean = op.weights.dot(op.nodes.cwiseProduct(rho));
        const Vector centered = op.nodes.array() - mean;
        const double var = op.weights.dot(centered.cwiseProduct(centered).cwiseProduct(rho));
        return std::pair{mean, var};
    };

    std::vector<GridFlowStep> steps;
    steps.reserve(static_cast<std::size_t>(n) + 1);
    Vector rho = normalize(eta0_density);
    for (int k = 0;; ++k) {
        auto [mean, var] = moments(rho);
        steps.push_back({rho, mean, var});
        if (k == n) break;
        rho = normalize(apply_left(op, rho));
    }
    return steps;
}

Vector gaussian_density_on_grid(const GridOperator& op, const GaussianMeasure& eta) {
    if (eta.dim() != 1) throw ConfigError("gaussian_density_on_grid: need d = 1");
    const double m = eta.mean(0);
    const double v = eta.cov(0, 0);
    if (!(v > 0.0)) throw ConfigError("gaussian_density_on_grid: variance must be positive");
    Vector rho(op.M);
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * v);
    for (int i = 0; i < op.M; ++i) {
        const double dx = op.nodes[i] - m;
        rho[i] = norm * std::exp(-0.5 * dx * dx / v);
    }
    return rho;
}

}  // namespace fkdmc
