#pragma once

// Holomorphic functional calculus for dissipative matrices: phi(L) for
// one-variable analytic functions and f(L, M) for pairs, with L acting on
// the left and M on the right.

#include <map>
#include <mutex>
#include <optional>

#include "disscalc/matrix_core.hpp"
#include "disscalc/scalar_functions.hpp"

namespace disscalc {

/// e^A by scaling and squaring with the degree-13 diagonal Pade approximant.
Matrix expm(const Matrix& a);

/// sum_k a^k / k! to `terms` terms; a test oracle for small ||a||.
Matrix expm_taylor(const Matrix& a, int terms = 60);

/// Relative tolerance of the adaptive Gauss-Legendre rule for cardinal atoms.
inline constexpr double kCardinalQuadratureTol = 1e-10;

/// (e^{isL} - I)(sL - 2 pi j I)^{-1}, or nullopt when the shifted matrix is
/// too close to singular (sigma_min < 1e-6 (1 + ||sL||)).
std::optional<Matrix> cardinal_inverse_form(const Matrix& l, std::int64_t j, double s);
/// i int_0^1 e^{itsL} e^{-2 pi i j t} dt, valid for every L.
Matrix cardinal_quadrature_form(const Matrix& l, std::int64_t j, double s, double tol = kCardinalQuadratureTol);

/// Functional calculus bound to one matrix. Caches e^{i omega L} per omega,
/// so evaluating many atoms that share frequencies is cheap. Safe to share
/// across threads.
class MatrixCalculus {
public:
    explicit MatrixCalculus(const Matrix& l);

    const Matrix& matrix() const noexcept { return l_; }
    Eigen::Index dim() const noexcept { return l_.rows(); }

    Matrix exp_i(double omega) const;
    Matrix apply(const OneVarAtom& atom) const;
    Matrix apply(const OneVarFunction& phi) const;
    /// (I - iL)^{-1}.
    const Matrix& cayley_inverse() const;

private:
    Matrix l_;
    double norm_ = 0.0;
    mutable std::mutex mutex_;
    mutable std::map<double, Matrix> exp_cache_;
    mutable std::optional<Matrix> cayley_inv_;
    struct Schur {
        Matrix q;
        Matrix u;
    };
    mutable std::optional<Schur> schur_;
    mutable std::map<double, Matrix> exp_schur_cache_;  ///< Q* e^{i omega L} Q

    const Schur& schur() const;
    Matrix exp_i_schur(double omega) const;

    Matrix cardinal(std::int64_t j, double s) const;
};

Matrix apply_atom(const OneVarAtom& atom, const DissipativeMatrix& l);
Matrix apply_one_var(const OneVarFunction& phi, const DissipativeMatrix& l);

/// f(L, M) = sum_m c_m e^{i a_m L} e^{i b_m M}. Throws NotAnalytic.
Matrix apply_pair(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m);
Matrix apply_pair(const ExpSum2D& f, const MatrixCalculus& l, const MatrixCalculus& m);

/// f_sharp(L, M) for f_sharp(s, t) = f(s, t) / (1 - it):
/// sum_m c_m e^{i a_m L} e^{i b_m M} (I - iM)^{-1}. Throws NotAnalytic.
Matrix apply_pair_sharp(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m);

/// || f(L,M)(I - iM0)^{-1} - [ i f_sharp(L,M)(M0 - M)(I - iM0)^{-1} + f_sharp(L,M) ] ||_inf
double sharp_remark_identity(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m,
                             const DissipativeMatrix& m0);

/// Deterministic pairwise (tree) summation.
Matrix pairwise_sum(std::span<const Matrix> terms, Eigen::Index rows, Eigen::Index cols);

}  // namespace disscalc
