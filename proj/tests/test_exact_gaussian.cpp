#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "fkdmc/errors.hpp"
#include "fkdmc/exact_gaussian.hpp"
#include "fkdmc/rng.hpp"

using namespace fkdmc;

namespace {

Matrix random_spd(Substream& rng, int d, double lo, double hi) {
    Matrix q(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) q(i, j) = rng.normal();
    const Eigen::HouseholderQR<Matrix> qr(q);
    const Matrix orth = qr.householderQ();
    Vector eigs(d);
    for (int i = 0; i < d; ++i) eigs(i) = lo + (hi - lo) * rng.uniform();
    return symmetrized(orth * eigs.asDiagonal() * orth.transpose());
}

// Random model with a prescribed contraction factor rho of S^{1/2} A S^{-1/2}.
GaussianModel random_stable_model(Substream& rng, int d, double rho) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    const Matrix s = random_spd(rng, d, 0.4, 2.5);
    const Matrix b = random_spd(rng, d, 0.4, 2.5);
    const Matrix abar = sqrt_spd(s) * a * inv_sqrt_spd(s);
    a *= rho / spectral_norm(abar);
    return GaussianModel(a, b, s);
}

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

}  // namespace

TEST_CASE("phi map: zero covariance, substitution, fixed point") {
    const auto m = GaussianModel::scalar(0.7, 2.0, 0.3);
    CHECK(max_abs_diff(phi_map(Matrix::Zero(1, 1), m), m.B) < 1e-15);

    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    CHECK(phi_map(Matrix::Constant(1, 1, 1.0), unit)(0, 0) ==
          doctest::Approx(1.5).epsilon(1e-15));

    // the positive root of x^2 = x + 1 is a fixed point
    const Matrix fp = Matrix::Constant(1, 1, kGolden);
    CHECK(max_abs_diff(phi_map(fp, unit), fp) < 1e-12);
}

TEST_CASE("e map: resolvent at zero, substitution, zero drift") {
    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    CHECK(e_map(Matrix::Zero(1, 1), unit)(0, 0) == doctest::Approx(1.0));
    CHECK(e_map(Matrix::Constant(1, 1, 1.0), unit)(0, 0) == doctest::Approx(0.5));

    const auto zero_drift = GaussianModel::scalar(0.0, 1.0, 1.0);
    CHECK(e_map(Matrix::Constant(1, 1, 2.0), zero_drift).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact flow: one-step values and geometric mean decay") {
    // A = 0 kills mean and memory in one step
    const auto memoryless = GaussianModel::scalar(0.0, 1.0, 1.0);
    auto flow = exact_flow(memoryless, GaussianMeasure::scalar(5.0, 2.0), 1);
    CHECK(flow[1].mean(0) == doctest::Approx(0.0));
    CHECK(flow[1].cov(0, 0) == doctest::Approx(1.0));

    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    flow = exact_flow(unit, GaussianMeasure::scalar(1.0, 1.0), 1);
    CHECK(flow[1].mean(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flow[1].cov(0, 0) == doctest::Approx(1.5).epsilon(1e-15));

    // |m_n| <= rho^{n-k} |m_k| for the scalar stable model (rho = |A|)
    const auto stable = GaussianModel::scalar(0.5, 1.0, 1.0);
    flow = exact_flow(stable, GaussianMeasure::scalar(3.0, 2.0), 60);
    for (int n = 1; n <= 60; ++n)
        CHECK(std::abs(flow[n].mean(0)) <=
              0.5 * std::abs(flow[n - 1].mean(0)) + 1e-14);
    CHECK(std::abs(flow[60].mean(0)) < 1e-15);
}

TEST_CASE("ground state: closed forms at A=0 and the golden-ratio fixed point") {
    const auto memoryless = GaussianModel::scalar(0.0, 1.0, 1.0);
    const auto gs = ground_state(memoryless);
    CHECK(gs.S_inf(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(gs.E0 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(gs.P_inf(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    CHECK(ground_state(unit).P_inf(0, 0) == doctest::Approx(kGolden).epsilon(1e-10));
}

TEST_CASE("ground state: fixed points reproduce themselves on random models") {
    Substream rng(2024, 0, 0, StreamClass::experiment);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform() * 4);
        const auto model = random_stable_model(rng, d, 0.2 + 0.7 * rng.uniform());
        const auto gs = ground_state(model, 1e-13);

        // S_inf back through the Riccati map
        const Matrix lhs = symmetrized(
            model.A.transpose() *
                solve_shifted(gs.S_inf * model.B, gs.S_inf) * model.A +
            model.S);
        CHECK(max_abs_diff(lhs, gs.S_inf) < 1e-10);
        // P_inf back through phi
        CHECK(max_abs_diff(phi_map(gs.P_inf, model), gs.P_inf) < 1e-10);
        CHECK(gs.riccati_residual < 1e-10);
    }
}

TEST_CASE("ground state: non-convergence is an explicit error") {
    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(ground_state(unit, 1e-12, 3), NonConvergenceError);
}

TEST_CASE("closed form 1d: base, one recursion step, eigenvalue ratio") {
    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    auto cf = closed_form_1d(unit, 2);
    CHECK(cf.q[0] == 0.0);
    CHECK(cf.lambda[0] == 1.0);
    CHECK(cf.mu[0] == 1.0);
    CHECK(cf.q[1] == doctest::Approx(1.0));     // S
    CHECK(cf.lambda[1] == doctest::Approx(1.0));
    CHECK(cf.mu[1] == doctest::Approx(1.0));    // A
    CHECK(cf.q[2] == doctest::Approx(1.5));
    CHECK(cf.lambda[2] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(cf.mu[2] == doctest::Approx(std::pow(2.0, -1.5)));

    // lambda_{n+1} / lambda_n converges to E0
    const auto stable = GaussianModel::scalar(0.5, 1.0, 1.0);
    cf = closed_form_1d(stable, 200);
    const double e0 = ground_state(stable).E0;
    CHECK(std::abs(cf.lambda[200] / cf.lambda[199] - e0) < 1e-8);
}

TEST_CASE("quadratic push: constants, scalar substitution, integrability edge") {
    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    auto push = quadratic_push(unit, Matrix::Zero(1, 1));
    CHECK(push.factor == doctest::Approx(1.0));
    CHECK(push.F_out.cwiseAbs().maxCoeff() < 1e-15);

    push = quadratic_push(unit, Matrix::Constant(1, 1, -1.0));
    CHECK(push.factor == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(push.F_out(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));

    CHECK_THROWS_AS(quadratic_push(unit, Matrix::Constant(1, 1, 1.0)),
                    NonIntegrableError);
}

TEST_CASE("quadratic push matches a piecewise Gaussian integral in 2d") {
    Substream rng(7, 0, 0, StreamClass::experiment);
    const auto model = random_stable_model(rng, 2, 0.8);
    const Matrix f = -random_spd(rng, 2, 0.2, 0.8);
    const auto push = quadratic_push(model, f);
    // evaluate P(exp(x'Fx/2)) at a point by 2-d quadrature
    const Vector x = Vector::Constant(2, 0.7);
    const Vector mu = model.A * x;
    const int n = 400;
    const double half = 8.0;
    const double h = 2.0 * half / n;
    const Matrix binv = model.B.inverse();
    const double norm = 1.0 / (2.0 * M_PI * std::sqrt(model.B.determinant()));
    double acc = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Vector y(2);
            y << mu(0) - half + i * h, mu(1) - half + j * h;
            const Vector dy = y - mu;
            const double kern = norm * std::exp(-0.5 * dy.dot(binv * dy));
            acc += kern * std::exp(0.5 * y.dot(f * y)) * h * h;
        }
    const double closed = push.factor * std::exp(0.5 * x.dot(push.F_out * x));
    CHECK(acc == doctest::Approx(closed).epsilon(1e-6));
}

TEST_CASE("propagator powers: k=1, k=2 substitution, zero drift") {
    const auto unit = GaussianModel::scalar(1.0, 1.0, 1.0);
    auto p = propagator_powers(unit, 1);
    CHECK(p.A_k(0, 0) == doctest::Approx(1.0));
    CHECK(p.B_k(0, 0) == doctest::Approx(1.0));
    CHECK(p.S_k(0, 0) == doctest::Approx(1.0));

    p = propagator_powers(unit, 2);
    CHECK(p.A_k(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.B_k(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(p.S_k(0, 0) == doctest::Approx(1.5).epsilon(1e-15));

    const auto memoryless = GaussianModel::scalar(0.0, 1.0, 1.0);
    for (int k : {1, 2, 5}) {
        p = propagator_powers(memoryless, k);
        CHECK(p.A_k.cwiseAbs().maxCoeff() == 0.0);
        CHECK(p.S_k(0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("propagator powers: S_1 is a lower bound of S_k") {
    Substream rng(99, 0, 0, StreamClass::experiment);
    const auto model = random_stable_model(rng, 3, 0.85);
    const Matrix s1 = propagator_powers(model, 1).S_k;
    for (int k : {2, 4, 8}) {
        const Matrix sk = propagator_powers(model, k).S_k;
        CHECK(min_eigenvalue(sk - s1) > -1e-12);
    }
}

TEST_CASE("semigroup identity: two pushes equal the k=2 factorization") {
    Substream rng(31, 0, 0, StreamClass::experiment);
    const auto model = random_stable_model(rng, 2, 0.75);
    const Matrix f = -random_spd(rng, 2, 0.3, 0.9);

    // route 1: Q(Q(f-gauss)) via quadratic_push, tracking (factor, exponent)
    // Q(e^{xFx/2}) = G_S * P(e^{xFx/2}) = factor * e^{x(F_out - S)x/2}
    const auto push1 = quadratic_push(model, f);
    const Matrix f1 = push1.F_out - model.S;
    const auto push2 = quadratic_push(model, f1);
    const Matrix f2 = push2.F_out - model.S;
    const double c2 = push1.factor * push2.factor;

    // route 2: Q_{0,2}(f-gauss) = G^(2) * P^(2)(f-gauss)
    const auto p = propagator_powers(model, 2);
    GaussianModel two_step;
    two_step.d = model.d;
    two_step.A = p.A_k;
    two_step.B = p.B_k;
    two_step.S = p.S_k;
    const auto push_k = quadratic_push(two_step, f);
    const Matrix f2_alt = push_k.F_out - p.S_k;
    // G^(2) carries the constant Q_{0,2}(1)(0) = c2 at f = 0; check exponents
    // and the f-dependent factor ratio.
    CHECK(max_abs_diff(f2, f2_alt) < 1e-11);
    const auto pushS = quadratic_push(model, -model.S);
    const double g2_const = pushS.factor;  // Q_{0,2}(1)(0) = P(G_S)(0)
    CHECK(c2 / push_k.factor == doctest::Approx(g2_const).epsilon(1e-12));
}

TEST_CASE("hat model: scalar form, degeneracy flag, updated-flow identity") {
    for (double a : {0.8, -1.3, 2.0}) {
        const auto model = GaussianModel::scalar(a, 1.0, 1.0);
        const auto hat = hat_model(model);
        CHECK(hat.model.B(0, 0) == doctest::Approx(0.5));
        CHECK(hat.model.A(0, 0) == doctest::Approx(a / 2.0));
        CHECK(hat.model.S(0, 0) == doctest::Approx(a * a / 2.0));
        CHECK(!hat.degenerate);
    }
    const auto memoryless = GaussianModel::scalar(0.0, 1.0, 1.0);
    CHECK(hat_model(memoryless).degenerate);

    // exact updated flow via (G_hat, P_hat) equals psi_{G_S} of the exact flow
    Substream rng(225, 0, 0, StreamClass::experiment);
    for (int trial = 0; trial < 4; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        const auto model = random_stable_model(rng, d, 0.3 + 0.6 * rng.uniform());
        const auto hat = hat_model(model);
        REQUIRE(!hat.degenerate);

        Vector m0(d);
        for (int i = 0; i < d; ++i) m0(i) = 2.0 * rng.normal();
        const GaussianMeasure eta0(m0, random_spd(rng, d, 0.5, 2.0));

        const auto base = exact_flow(model, eta0, 50);
        const auto updated = exact_flow(hat.model, bg_update(eta0, model.S), 50);
        for (int n = 0; n <= 50; ++n) {
            const GaussianMeasure want = bg_update(base[n], model.S);
            CHECK((updated[n].mean - want.mean).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(max_abs_diff(updated[n].cov, want.cov) < 1e-10);
        }
    }
}

TEST_CASE("discretize: Brownian limit, scalar euler and exact OU") {
    const Matrix zero = Matrix::Zero(2, 2);
    const Matrix half_eye = 0.5 * Matrix::Identity(2, 2);
    const auto brownian = discretize_continuous(zero, half_eye, half_eye, 0.3,
                                                DiscretizationScheme::exact);
    CHECK(max_abs_diff(brownian.A, Matrix::Identity(2, 2)) < 1e-12);
    CHECK(max_abs_diff(brownian.B, 0.3 * Matrix::Identity(2, 2)) < 1e-12);

    const Matrix c = Matrix::Constant(1, 1, -1.0);
    const Matrix d = Matrix::Constant(1, 1, 0.5);
    const Matrix f = Matrix::Constant(1, 1, 1.0);
    const auto euler = discretize_continuous(c, d, f, 0.1, DiscretizationScheme::euler);
    CHECK(euler.A(0, 0) == doctest::Approx(0.9));
    CHECK(euler.B(0, 0) == doctest::Approx(0.1));
    CHECK(euler.S(0, 0) == doctest::Approx(0.1));

    const auto exact = discretize_continuous(c, d, f, 0.1, DiscretizationScheme::exact);
    CHECK(exact.A(0, 0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
    CHECK(exact.B(0, 0) ==
          doctest::Approx(0.5 * (1.0 - std::exp(-0.2))).epsilon(1e-12));
    CHECK(exact.delta.has_value());

    CHECK_THROWS_AS(discretize_continuous(c, d, f, 0.0, DiscretizationScheme::exact),
                    ConfigError);
}

TEST_CASE("discretize: Van Loan integral matches sub-stepped quadrature") {
    // non-commuting C so the integral has no elementwise closed form
    Matrix c(2, 2);
    c << -0.5, 0.8, -0.3, -1.2;
    Matrix d(2, 2);
    d << 0.6, 0.1, 0.1, 0.4;
    const Matrix f = Matrix::Identity(2, 2);
    const double delta = 0.37;
    const auto exact = discretize_continuous(c, d, f, delta, DiscretizationScheme::exact);

    // midpoint rule on int_0^delta e^{Cs} 2D e^{C's} ds
    const int steps = 20000;
    const double h = delta / steps;
    Matrix acc = Matrix::Zero(2, 2);
    for (int i = 0; i < steps; ++i) {
        const double s = (i + 0.5) * h;
        const Matrix e = (c * s).exp();
        acc += e * (2.0 * d) * e.transpose() * h;
    }
    CHECK(max_abs_diff(exact.B, acc) < 1e-8);
}

TEST_CASE("discretized OU: -log(E0)/delta approaches the continuum rate") {
    // dX = -X dt + dW with U(x) = x^2/2; the continuum Riccati limit gives
    // lambda_0 = (sqrt(2) - 1)/2, approached linearly in delta
    const Matrix c = Matrix::Constant(1, 1, -1.0);
    const Matrix d = Matrix::Constant(1, 1, 0.5);
    const Matrix f = Matrix::Constant(1, 1, 1.0);
    const double limit = 0.5 * (std::sqrt(2.0) - 1.0);
    auto lambda0 = [&](double delta) {
        const auto model = discretize_continuous(c, d, f, delta,
                                                 DiscretizationScheme::exact);
        return -std::log(ground_state(model, 1e-14).E0) / delta;
    };
    const double coarse = lambda0(0.1);
    const double fine = lambda0(0.01);
    CHECK(std::abs(fine - limit) < std::abs(coarse - limit));
    CHECK(std::abs(fine - limit) < 2e-6);
    CHECK(std::abs(coarse - limit) < 2e-4);
}

TEST_CASE("normalization identity: eta_inf(G) equals E0") {
    Substream rng(555, 0, 0, StreamClass::experiment);
    for (int trial = 0; trial < 8; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform() * 4);
        const auto model = random_stable_model(rng, d, 0.2 + 0.7 * rng.uniform());
        const auto gs = ground_state(model, 1e-13);
        const GaussianMeasure eta_inf(Vector::Zero(d), gs.P_inf);
        CHECK(std::abs(gaussian_potential_mass(eta_inf, model.S) - gs.E0) < 1e-8);
    }
}
