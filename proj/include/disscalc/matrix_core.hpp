#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>

#include <nlohmann/json_fwd.hpp>

#include "disscalc/common.hpp"

namespace disscalc {

/// Default lower bound for the smallest eigenvalue of the imaginary part.
inline constexpr double kDissipativeTolerance = 1e-10;

/// Square complex matrix L whose imaginary part K = (L - L*) / (2i) is
/// positive semidefinite (smallest eigenvalue >= -tol). At finite dimension
/// every such matrix is a bounded maximal dissipative operator.
class DissipativeMatrix {
public:
    /// Validates; throws NotDissipative (or InvalidInput if not square).
    explicit DissipativeMatrix(Matrix value, double tol = kDissipativeTolerance);

    static DissipativeMatrix zero(Eigen::Index n) { return DissipativeMatrix(Matrix::Zero(n, n)); }

    const Matrix& matrix() const noexcept { return value_; }
    /// Hermitian imaginary part (L - L*) / (2i).
    const Matrix& imaginary_part() const noexcept { return imag_; }
    Eigen::Index dim() const noexcept { return value_.rows(); }
    double min_imaginary_eigenvalue() const noexcept { return min_eig_; }
    double tolerance() const noexcept { return tol_; }

    operator const Matrix&() const noexcept { return value_; }  // NOLINT

private:
    Matrix value_;
    Matrix imag_;
    double min_eig_ = 0.0;
    double tol_ = kDissipativeTolerance;
};

Matrix hermitian_imaginary_part(const Matrix& a);
double min_imaginary_eigenvalue(const Matrix& a);
bool is_dissipative(const Matrix& a, double tol = kDissipativeTolerance);

/// L = H + iG, H = (A + A*)/2, G = B B* / n with A, B standard complex
/// Gaussian from the Philox stream (seed, stream), rescaled to ||L||_inf = scale.
DissipativeMatrix random_dissipative(Eigen::Index n, std::uint64_t seed, double scale, std::uint64_t stream = 0);
/// Haar-like unitary from the QR factorization of a complex Gaussian matrix.
Matrix random_unitary(Eigen::Index n, std::uint64_t seed, std::uint64_t stream = 0);
/// Standard complex Gaussian matrix.
Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream = 0);

struct ResolventResult {
    Matrix value;
    double rcond = 0.0;  ///< reciprocal 1-norm condition estimate
};

/// (I - i eps L)^{-1}. Its eigenvalues have real part >= 1 for dissipative L.
ResolventResult resolvent_reg(const DissipativeMatrix& l, double eps);
/// L(eps) = L (I - i eps L)^{-1}; dissipative for eps > 0.
DissipativeMatrix regularize(const DissipativeMatrix& l, double eps);

/// Schatten exponent p in [1, inf]; infinity means the operator norm.
class SchattenP {
public:
    explicit SchattenP(double p);
    static SchattenP infinity() { return SchattenP(std::numeric_limits<double>::infinity()); }

    double value() const noexcept { return p_; }
    bool is_infinity() const noexcept { return p_ == std::numeric_limits<double>::infinity(); }

private:
    double p_;
};

Eigen::VectorXd singular_values(const Matrix& a);
double schatten_norm(const Matrix& a, SchattenP p);
double operator_norm(const Matrix& a);
double frobenius_norm(const Matrix& a);

/// Matrix JSON: {"n":..,"re":[[..]],"im":[[..]]}, row-major. Doubles are
/// written in shortest round-trip form, so reading back is bit-exact.
nlohmann::json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const nlohmann::json& j);
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& a);

}  // namespace disscalc
