#include <doctest.h>

#include <cmath>

#include "fkdmc/errors.hpp"
#include "fkdmc/grid_oracle.hpp"

using namespace fkdmc;

namespace {

const GaussianModel kDesk = GaussianModel::scalar(0.5, 1.0, 1.0);

double rel_sup_error(const Vector& got, const Vector& want) {
    const double scale = want.cwiseAbs().maxCoeff();
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("unit-potential rows integrate to one") {
    const auto op = build_grid(kDesk, 10.0, 801, /*unit_potential=*/true);
    const Vector sums = apply_right(op, Vector::Ones(op.M));
    // interior rows: the kernel mass inside [-L, L]
    for (int i = op.M / 4; i < 3 * op.M / 4; ++i)
        CHECK(std::abs(sums[i] - 1.0) < 1e-8);
}

TEST_CASE("grid powers match the closed-form recursions") {
    const auto op = build_grid(kDesk, 10.0, 2001);
    const auto cf = closed_form_1d(kDesk, 10);

    Vector f_one = Vector::Ones(op.M);
    Vector f_id = op.nodes;
    for (int n = 1; n <= 10; ++n) {
        f_one = apply_right(op, f_one);
        f_id = apply_right(op, f_id);
        Vector want_one(op.M), want_id(op.M);
        for (int i = 0; i < op.M; ++i) {
            const double x = op.nodes[i];
            const double e = std::exp(-0.5 * cf.q[n] * x * x);
            want_one[i] = cf.lambda[n] * e;
            want_id[i] = cf.mu[n] * x * e;
        }
        CHECK(rel_sup_error(f_one, want_one) < 1e-6);
        CHECK(rel_sup_error(f_id, want_id) < 1e-6);
    }
}

TEST_CASE("power iteration finds the ground-state pair") {
    const auto op = build_grid(kDesk, 10.0, 2001);
    const auto pi = power_iteration(op);
    const auto gs = ground_state(kDesk);
    CHECK(std::abs(pi.eigenvalue - gs.E0) < 1e-6);

    Vector h(op.M);
    for (int i = 0; i < op.M; ++i)
        h[i] = std::exp(-0.5 * gs.S_inf(0, 0) * op.nodes[i] * op.nodes[i]);
    const double cos_sim = pi.eigenvector.dot(h) / (pi.eigenvector.norm() * h.norm());
    CHECK(cos_sim > 1.0 - 1e-8);
}

TEST_CASE("grid flow reproduces the exact flow moments") {
    const auto op = build_grid(kDesk, 10.0, 2001);
    const GaussianMeasure eta0 = GaussianMeasure::scalar(1.0, 0.7);
    const auto flow = exact_flow(kDesk, eta0, 50);
    const auto grid = grid_flow(op, gaussian_density_on_grid(op, eta0), 50);
    REQUIRE(grid.size() == 51);
    for (int n = 0; n <= 50; ++n) {
        CHECK(std::abs(grid[n].mean - flow[n].mean(0)) < 1e-6);
        CHECK(std::abs(grid[n].variance - flow[n].cov(0, 0)) < 1e-6);
    }
    // n = 0 returns the moments of eta0 itself
    CHECK(grid[0].mean == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("two initial densities forget each other geometrically") {
    const auto op = build_grid(kDesk, 10.0, 1201);
    const auto a = grid_flow(op, gaussian_density_on_grid(op, GaussianMeasure::scalar(2.0, 1.0)), 30);
    const auto b = grid_flow(op, gaussian_density_on_grid(op, GaussianMeasure::scalar(-2.0, 0.5)), 30);
    double prev = std::abs(a[2].mean - b[2].mean);
    for (int n = 6; n <= 30; n += 4) {
        const double cur = std::abs(a[n].mean - b[n].mean);
        CHECK(cur < 0.6 * prev);
        prev = cur;
    }
}

TEST_CASE("reversible weighting symmetrizes the operator when it exists") {
    // sigma_mu^2 = 1 / ((1 - A^2)/B - S) exists iff A^2 + B S < 1
    const auto reversible = GaussianModel::scalar(0.5, 0.5, 0.5);
    const double a = 0.5, b = 0.5, s = 0.5;
    const double inv_var = (1.0 - a * a) / b - s;
    REQUIRE(inv_var > 0.0);
    const auto op = build_grid(reversible, 12.0, 601);
    Matrix weighted(op.M, op.M);
    for (int i = 0; i < op.M; ++i) {
        const double mu = std::exp(-0.5 * inv_var * op.nodes[i] * op.nodes[i]);
        for (int j = 0; j < op.M; ++j) weighted(i, j) = mu * op.kernel(i, j);
    }
    const double asym = (weighted - weighted.transpose()).cwiseAbs().maxCoeff() /
                        weighted.cwiseAbs().maxCoeff();
    CHECK(asym < 1e-12);

    // the desk model admits no Gaussian reversible weight; the raw kernel is skew
    const auto op2 = build_grid(kDesk, 10.0, 401);
    const Matrix k2 = op2.kernel;
    const double asym2 =
        (k2 - k2.transpose()).cwiseAbs().maxCoeff() / k2.cwiseAbs().maxCoeff();
    CHECK(asym2 > 1e-3);
}

TEST_CASE("truncation robustness: doubling L or M moves the eigenvalue < 1e-8") {
    const auto base = power_iteration(build_grid(kDesk, 10.0, 2001)).eigenvalue;
    const auto wide = power_iteration(build_grid(kDesk, 20.0, 4001)).eigenvalue;
    const auto fine = power_iteration(build_grid(kDesk, 10.0, 4001)).eigenvalue;
    CHECK(std::abs(base - wide) < 1e-8);
    CHECK(std::abs(base - fine) < 1e-8);
}

TEST_CASE("grid validation errors") {
    CHECK_THROWS_AS(build_grid(kDesk, -1.0, 101), ConfigError);
    CHECK_THROWS_AS(build_grid(kDesk, 10.0, 100), ConfigError);
    const auto op = build_grid(kDesk, 10.0, 101);
    CHECK_THROWS_AS(grid_flow(op, -Vector::Ones(op.M), 2), ConfigError);
    CHECK(suggested_half_width(kDesk) > 8.0 * std::sqrt(1.0));
}
