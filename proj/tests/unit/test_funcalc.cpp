#include <cmath>
#include <vector>

#include "disscalc/funcalc.hpp"
#include "disscalc/matrix_core.hpp"
#include "support.hpp"

using namespace disscalc;
using disscalc::test::check_close;

namespace {

Matrix jordan_i() {
    Matrix l(2, 2);
    l << kI, 1.0, 0.0, kI;
    return l;
}

// e^A through an eigendecomposition; generic (diagonalizable) inputs only.
Matrix expm_eigen(const Matrix& a) {
    Eigen::ComplexEigenSolver<Matrix> es(a);
    const Matrix v = es.eigenvectors();
    Vector d = es.eigenvalues();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(d(i));
    return v * d.asDiagonal() * v.inverse();
}

Matrix real_diagonal(std::initializer_list<double> values) {
    Matrix d = Matrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) d(i, i) = v, ++i;
    return d;
}

const ExpSum2D kF({{{0.5, 0.2}, 0.6, 0.2}, {{-0.3, 0.1}, 0.1, 0.8}, {0.2, 0.0, 0.3}});

}  // namespace

TEST_CASE("matrix exponential against independent oracles") {
    check_close(expm(Matrix::Zero(3, 3)), Matrix::Identity(3, 3), 1e-15);
    // Jordan block: e^{i(iI + N)} = e^{-1}(I + iN).
    Matrix want(2, 2);
    want << 1.0, kI, 0.0, 1.0;
    check_close(expm(kI * jordan_i()), std::exp(-1.0) * want, 1e-15);
    check_close(expm(kI * jordan_i()), expm_taylor(kI * jordan_i()), 1e-15);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Matrix a = random_gaussian(5, 5, seed) * 0.7;
        check_close(expm(a), expm_taylor(a, 80), 1e-12);
        check_close(expm(a), expm_eigen(a), 1e-9);
    }
    // Large norms go through squaring; compare with the eigen oracle on a normal matrix.
    const Matrix u = random_unitary(4, 3);
    const Matrix big = u * real_diagonal({-30.0, 5.0, 12.0, 40.0}) * u.adjoint() * kI;
    check_close(expm(big), expm_eigen(big), 1e-8);
}

TEST_CASE("atom examples") {
    const auto zero = DissipativeMatrix::zero(3);
    check_close(apply_atom(ExpAtom{2.5}, zero), Matrix::Identity(3, 3), 1e-15);
    check_close(apply_atom(ExpAtom{kPi}, DissipativeMatrix(real_diagonal({1.0}))), Matrix::Constant(1, 1, -1.0), 1e-15);
    Matrix want(2, 2);
    want << 1.0, kI, 0.0, 1.0;
    check_close(apply_atom(ExpAtom{1.0}, DissipativeMatrix(jordan_i())), std::exp(-1.0) * want, 1e-15);
    check_close(apply_atom(ConstAtom{{2.0, 1.0}}, zero), Complex{2.0, 1.0} * Matrix::Identity(3, 3), 1e-15);
}

TEST_CASE("one-variable examples") {
    const Matrix id = Matrix::Identity(3, 3);
    const OneVarFunction two = OneVarFunction(ConstAtom{2.0}) * OneVarFunction(ExpAtom{0.0});
    check_close(apply_one_var(two, random_dissipative(3, 1, 1.0)), 2.0 * id, 1e-15);
    check_close(apply_one_var(OneVarFunction(CayleyInvAtom{}), DissipativeMatrix(Matrix(kI * id))), 0.5 * id, 1e-15);
    const auto d = real_diagonal({-1.5, 0.2, 3.0});
    const auto phi = OneVarFunction(ExpAtom{1.0}) * OneVarFunction(CayleyInvAtom{});
    const Matrix got = apply_one_var(phi, DissipativeMatrix(d));
    for (int i = 0; i < 3; ++i) {
        const double lam = d(i, i).real();
        check_close(got(i, i), std::exp(kI * lam) / (1.0 - kI * lam), 1e-15);
    }
}

TEST_CASE("cardinal atom: two paths agree and the diagonal case matches the scalar") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto l = random_dissipative(4, seed, 3.0);
        for (std::int64_t j : {-2, -1, 0, 1, 3}) {
            for (double s : {0.5, 1.0}) {
                const auto inv = cardinal_inverse_form(l.matrix(), j, s);
                REQUIRE(inv.has_value());
                check_close(*inv, cardinal_quadrature_form(l.matrix(), j, s), 1e-8);
                check_close(apply_atom(CardinalAtom{j, s}, l), *inv, 1e-12);
            }
        }
    }
    // Real eigenvalue on a grid point 2 pi j / s: only the quadrature form applies.
    const auto d = real_diagonal({kTwoPi, 0.3, -1.0});
    CHECK_FALSE(cardinal_inverse_form(d, 1, 1.0).has_value());
    const Matrix got = apply_atom(CardinalAtom{1, 1.0}, DissipativeMatrix(d));
    for (int i = 0; i < 3; ++i) check_close(got(i, i), cardinal_eval(1, 1.0, d(i, i).real()), 1e-10);
}

TEST_CASE("pair calculus examples") {
    const auto l = random_dissipative(3, 2, 1.0);
    const auto m = random_dissipative(3, 3, 1.0);
    check_close(apply_pair(ExpSum2D::constant(1.0), l, m), Matrix::Identity(3, 3), 1e-15);
    const auto dl = real_diagonal({-1.0, 0.5, 2.0});
    const auto dm = real_diagonal({0.7, -3.0, 1.1});
    const Matrix got = apply_pair(kF, DissipativeMatrix(dl), DissipativeMatrix(dm));
    for (int i = 0; i < 3; ++i) {
        check_close(got(i, i), eval2d(kF, dl(i, i).real(), dm(i, i).real()), 1e-12);
        for (int k = 0; k < 3; ++k) {
            if (k != i) CHECK(std::abs(got(i, k)) <= 1e-15);
        }
    }
    Matrix want(2, 2);
    want << 1.0, kI, 0.0, 1.0;
    const Matrix id2 = Matrix::Identity(2, 2);
    check_close(apply_pair(ExpSum2D::exponential(1.0, 1.0, 1.0), DissipativeMatrix(jordan_i()), DissipativeMatrix(id2)),
                std::exp(-1.0) * want * std::exp(kI), 1e-15);
    disscalc::test::check_throws_kind([&] { apply_pair(ExpSum2D::exponential(1.0, -1.0, 0.0), l, m); },
                                      ErrorKind::NotAnalytic);
    disscalc::test::check_throws_kind([&] { apply_pair(kF, l, random_dissipative(2, 1, 1.0)); },
                                      ErrorKind::DimensionMismatch);
}

TEST_CASE("contractive calculus and the boundedness estimate") {
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        const auto n = 1 + static_cast<Eigen::Index>(seed % 8);
        const auto l = random_dissipative(n, seed, 0.5 + static_cast<double>(seed % 5));
        const MatrixCalculus calc(l.matrix());
        for (double omega : {0.0, 0.5, 1.0, 5.0, 10.0}) CHECK(operator_norm(calc.exp_i(omega)) <= 1.0 + 1e-10);
        if (seed % 10 == 0) {
            const auto m = random_dissipative(n, seed, 1.0, 1);
            CHECK(operator_norm(apply_pair(kF, l, m)) <= kF.coefficient_l1() + 1e-12);
        }
    }
}

TEST_CASE("sharp calculus") {
    const auto l = random_dissipative(4, 8, 1.0);
    const auto m = random_dissipative(4, 9, 1.0);
    const Matrix id = Matrix::Identity(4, 4);
    check_close(apply_pair_sharp(ExpSum2D::constant(1.0), l, m), (id - kI * m.matrix()).inverse(), 1e-14);
    check_close(apply_pair_sharp(kF, l, DissipativeMatrix::zero(4)), apply_pair(kF, l, DissipativeMatrix::zero(4)), 1e-15);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto a = random_dissipative(4, seed, 2.0, 1);
        const auto b = random_dissipative(4, seed, 2.0, 2);
        const Matrix f = apply_pair(kF, a, b);
        const Matrix lhs = apply_pair_sharp(kF, a, b) * (id - kI * b.matrix());
        CHECK(operator_norm(lhs - f) <= 1e-10 * operator_norm(f));
    }
}

TEST_CASE("remark identity residual") {
    const auto l = random_dissipative(5, 20, 1.0);
    const auto m = random_dissipative(5, 21, 1.0);
    CHECK(sharp_remark_identity(kF, l, m, m) <= 1e-12);
    CHECK(sharp_remark_identity(ExpSum2D::constant(1.0), l, m, random_dissipative(5, 22, 1.0)) <= 1e-12);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CHECK(sharp_remark_identity(kF, random_dissipative(5, seed, 2.0), random_dissipative(5, seed, 2.0, 1),
                                    random_dissipative(5, seed, 2.0, 2)) <= 1e-9);
    }
}

TEST_CASE("pairwise summation") {
    std::vector<Matrix> terms;
    Matrix want = Matrix::Zero(2, 2);
    for (int i = 0; i < 7; ++i) {
        terms.push_back(Matrix::Constant(2, 2, Complex{static_cast<double>(i), 1.0}));
        want += terms.back();
    }
    check_close(pairwise_sum(terms, 2, 2), want, 1e-15);
    check_close(pairwise_sum({}, 2, 3), Matrix::Zero(2, 3), 0.0);
}
