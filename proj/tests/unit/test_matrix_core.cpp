#include <cmath>
#include <filesystem>

#include "disscalc/matrix_core.hpp"
#include "support.hpp"

using namespace disscalc;
using disscalc::test::check_close;

namespace {

Matrix m2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("dissipativity examples") {
    CHECK(is_dissipative(m2(1.0, {0.0, 2.0}, {0.0, -2.0}, 3.0)));
    CHECK(is_dissipative(m2(kI, 1.0, 0.0, kI)));
    // K = [[1, -i/2], [i/2, 1]] has eigenvalues 1/2 and 3/2.
    CHECK(std::abs(min_imaginary_eigenvalue(m2(kI, 1.0, 0.0, kI)) - 0.5) <= 1e-15);
    CHECK_FALSE(is_dissipative(m2(-kI, 0.0, 0.0, 0.0)));
    disscalc::test::check_throws_kind([] { DissipativeMatrix(m2(-kI, 0.0, 0.0, 0.0)); }, ErrorKind::NotDissipative);
    disscalc::test::check_throws_kind([] { DissipativeMatrix(Matrix::Zero(2, 3)); }, ErrorKind::InvalidInput);
    const Matrix k = hermitian_imaginary_part(m2(kI, 1.0, 0.0, kI));
    CHECK(k == k.adjoint());
}

TEST_CASE("random dissipative matrices") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto l = random_dissipative(1 + static_cast<int>(seed % 8), seed, 1.5);
        CHECK(is_dissipative(l.matrix(), 1e-12));
        CHECK(std::abs(operator_norm(l.matrix()) - 1.5) <= 1e-12);
    }
    const auto a = random_dissipative(5, 11, 1.0);
    const auto b = random_dissipative(5, 11, 1.0);
    CHECK(a.matrix() == b.matrix());
    CHECK(a.matrix() != random_dissipative(5, 11, 1.0, 1).matrix());
    const auto one = random_dissipative(1, 3, 2.0);
    CHECK(one.matrix()(0, 0).imag() >= 0.0);
}

TEST_CASE("resolvent and regularization examples") {
    const Matrix id = Matrix::Identity(3, 3);
    check_close(resolvent_reg(DissipativeMatrix(kI * id), 1.0).value, 0.5 * id, 1e-15);
    check_close(resolvent_reg(DissipativeMatrix::zero(3), 0.3).value, id, 0.0);
    check_close(resolvent_reg(DissipativeMatrix(Matrix(2.0 * kI * id)), 0.5).value, 0.5 * id, 1e-15);
    for (double eps : {0.5, 0.1, 1e-3}) {
        check_close(regularize(DissipativeMatrix(kI * id), eps).matrix(), kI / (1.0 + eps) * id, 1e-15);
    }
    Matrix h = Matrix::Zero(3, 3);
    h.diagonal() << -2.0, 0.5, 3.0;
    const auto hr = regularize(DissipativeMatrix(h), 0.2);
    for (int i = 0; i < 3; ++i) {
        const double lam = h(i, i).real();
        check_close(hr.matrix()(i, i), lam / (1.0 - kI * 0.2 * lam), 1e-15);
        CHECK(hr.matrix()(i, i).imag() >= 0.0);
    }
    CHECK(resolvent_reg(DissipativeMatrix(kI * id), 1.0).rcond > 0.0);
    disscalc::test::check_throws_kind([&] { resolvent_reg(DissipativeMatrix(kI * id), 0.0); }, ErrorKind::InvalidInput);
}

TEST_CASE("regularization keeps dissipativity and norm control") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto l = random_dissipative(5, seed, 2.0);
        for (double eps : {0.2, 0.1, 0.01}) {
            const auto r = regularize(l, eps);
            CHECK(is_dissipative(r.matrix(), 1e-9));
            const double nl = operator_norm(l.matrix());
            if (eps * nl < 0.5) CHECK(operator_norm(r.matrix()) <= nl / (1.0 - eps * nl) + 1e-12);
        }
    }
}

TEST_CASE("schatten norm examples") {
    CHECK(std::abs(schatten_norm(Matrix::Identity(2, 2), SchattenP(2.0)) - std::sqrt(2.0)) <= 1e-15);
    Matrix d = Matrix::Zero(2, 2);
    d.diagonal() << 3.0, 4.0;
    CHECK(schatten_norm(d, SchattenP::infinity()) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(std::abs(schatten_norm(m2(0.0, 1.0, 0.0, 0.0), SchattenP(1.0)) - 1.0) <= 1e-15);
    CHECK_THROWS_AS(SchattenP(0.5), Error);
}

TEST_CASE("schatten norm properties") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Matrix a = random_gaussian(4, 4, seed);
        const Matrix b = random_gaussian(4, 4, seed, 1);
        const double n1 = schatten_norm(a, SchattenP(1.0));
        const double n2 = schatten_norm(a, SchattenP(2.0));
        const double n3 = schatten_norm(a, SchattenP(3.0));
        const double ninf = schatten_norm(a, SchattenP::infinity());
        CHECK(n1 >= n2 - 1e-12);
        CHECK(n2 >= n3 - 1e-12);
        CHECK(n3 >= ninf - 1e-12);
        // Trace identities as independent oracles.
        CHECK(std::abs(n2 - std::sqrt((a.adjoint() * a).trace().real())) <= 1e-10);
        CHECK(std::abs(n2 - frobenius_norm(a)) <= 1e-10);
        for (double p : {1.0, 2.0, 4.0}) {
            const SchattenP sp(p);
            CHECK(schatten_norm(a + b, sp) <= schatten_norm(a, sp) + schatten_norm(b, sp) + 1e-10);
            const Matrix u = random_unitary(4, seed, 2);
            const Matrix v = random_unitary(4, seed, 3);
            CHECK(std::abs(schatten_norm(u * a * v, sp) - schatten_norm(a, sp)) <= 1e-10);
        }
    }
}

TEST_CASE("random unitaries are unitary") {
    const Matrix u = random_unitary(6, 4);
    check_close(u.adjoint() * u, Matrix::Identity(6, 6), 1e-13);
}

TEST_CASE("cayley transform contracts") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto l = random_dissipative(1 + static_cast<int>(seed % 8), seed, 0.1 + 0.05 * static_cast<double>(seed));
        const Matrix id = Matrix::Identity(l.dim(), l.dim());
        const Matrix cay = (l.matrix() - kI * id) * (l.matrix() + kI * id).inverse();
        CHECK(operator_norm(cay) <= 1.0 + 1e-10);
    }
}

TEST_CASE("matrix JSON round trip is bit exact") {
    const Matrix a = random_gaussian(3, 3, 77) * 1e-3 + Matrix::Constant(3, 3, Complex{1.0 / 3.0, -2.0 / 7.0});
    CHECK(matrix_from_json(matrix_to_json(a)) == a);
    const auto path = std::filesystem::temp_directory_path() / "disscalc_matrix_roundtrip.json";
    save_matrix(path, a);
    CHECK(load_matrix(path) == a);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse(R"({"n":2,"re":[[1,2]],"im":[[0,0]]})")), Error);
}
