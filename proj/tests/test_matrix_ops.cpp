#include <doctest.h>

#include "fkdmc/errors.hpp"
#include "fkdmc/matrix_ops.hpp"

using namespace fkdmc;

TEST_CASE("spd predicates and square roots") {
    Matrix s(2, 2);
    s << 4.0, 1.0, 1.0, 3.0;
    CHECK(is_positive_definite(s));
    CHECK(is_positive_semidefinite(Matrix::Zero(2, 2)));
    CHECK(!is_positive_definite(Matrix::Zero(2, 2)));

    const Matrix r = sqrt_spd(s);
    CHECK(max_abs_diff(r * r, s) < 1e-12);
    const Matrix ri = inv_sqrt_spd(s);
    CHECK(max_abs_diff(r * ri, Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("spectral norm matches hand values") {
    Matrix m(2, 2);
    m << 3.0, 0.0, 0.0, -5.0;
    CHECK(spectral_norm(m) == doctest::Approx(5.0).epsilon(1e-12));
    // rank-one: norm is the vector product of the factors
    Matrix r1 = Vector::Constant(2, 1.0) * Vector::Constant(2, 2.0).transpose();
    CHECK(spectral_norm(r1) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("log det agrees with direct determinant") {
    Matrix s(3, 3);
    s << 2.0, 0.3, 0.0, 0.3, 1.5, 0.1, 0.0, 0.1, 1.0;
    CHECK(std::exp(log_det_spd(s)) == doctest::Approx(s.determinant()).epsilon(1e-12));
}

TEST_CASE("cholesky_psd factors singular covariances") {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = 4.0;  // rank one
    const Matrix l = cholesky_psd(s);
    CHECK(max_abs_diff(l * l.transpose(), s) < 1e-12);
    CHECK(max_abs_diff(cholesky_psd(Matrix::Zero(3, 3)), Matrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("solve_shifted rejects singular systems") {
    const Matrix m = -Matrix::Identity(2, 2);  // I + M = 0
    CHECK_THROWS_AS(solve_shifted(m, Matrix(Matrix::Identity(2, 2))), NumericError);
}
