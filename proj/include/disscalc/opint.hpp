#pragma once

// Triple operator integrals with integrands given by truncated Haagerup and
// Haagerup-like representations, evaluated through the functional calculus
// of each factor.
//
// All families are indexed by j, k in [-N, N]. A matrix family {psi_jk} is
// stored as a short sum  psi_jk(x) = sum_m G_m(j, k) phi_m(x)  of basis
// functions phi_m times coefficient kernels G_m, which keeps the divided
// difference families (dense in j, k) cheap at N in the thousands.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "disscalc/funcalc.hpp"
#include "disscalc/matrix_core.hpp"
#include "disscalc/scalar_functions.hpp"

namespace disscalc {

class ToeplitzHilbert;

/// {alpha_j}, j in [-N, N].
struct ListFamily {
    std::int64_t truncation = 0;
    std::vector<OneVarFunction> members;  ///< members[j + N]

    static ListFamily ones();
    /// alpha_j = CardinalAtom{j, s}.
    static ListFamily cardinal(std::int64_t truncation, double s);

    std::size_t size() const noexcept { return members.size(); }
    const OneVarFunction& at(std::int64_t j) const { return members.at(static_cast<std::size_t>(j + truncation)); }
    /// Values of every member at z.
    Vector values(Complex z) const;
    /// Every member applied to the matrix of `calc`.
    std::vector<Matrix> apply(const MatrixCalculus& calc) const;
};

/// Explicit (2N+1) x (2N+1) coefficient matrix.
struct DenseKernel {
    Matrix values;
};

/// G(j, k) = -(s / 2 pi) sum_m c_m (u_m(j) - u_m(k)) / (j - k) for j != k,
/// G(j, j) = -sum_m i omega_m c_m u_m(j),  with u_m(j) = e^{i omega_m 2 pi j / s}.
///
/// These are the cardinal-series coefficients of the divided difference of
/// g(x) = sum_m c_m e^{i omega_m x}. The kernel is symmetric, and
/// matrix-vector products go through an FFT Toeplitz product.
class DividedDifferenceKernel {
public:
    DividedDifferenceKernel(std::int64_t truncation, double s, std::vector<std::pair<Complex, double>> terms);

    std::int64_t truncation() const noexcept { return truncation_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(2 * truncation_ + 1); }
    double scale() const noexcept { return s_; }
    const std::vector<std::pair<Complex, double>>& terms() const noexcept { return terms_; }

    Complex at(std::int64_t j, std::int64_t k) const;
    Matrix dense() const;
    /// G * v for a (2N+1) x c block of columns.
    Matrix apply(const Matrix& v) const;
    /// G^* v.
    Matrix apply_adjoint(const Matrix& v) const;

private:
    std::int64_t truncation_;
    double s_;
    std::vector<std::pair<Complex, double>> terms_;
    std::vector<Vector> phases_;  ///< u_m(j), one vector per term
    Vector diagonal_;
    std::shared_ptr<const ToeplitzHilbert> hilbert_;

    Matrix apply_impl(const Matrix& v, bool adjoint) const;
};

using CoefficientKernel = std::variant<DenseKernel, DividedDifferenceKernel>;

struct KernelComponent {
    OneVarFunction basis;
    CoefficientKernel kernel;
    bool transposed = false;  ///< use G(k, j) in place of G(j, k)
};

/// {psi_jk}, j, k in [-N, N], psi_jk = sum_m G_m(j, k) basis_m.
struct MatrixFamily {
    std::int64_t truncation = 0;
    std::vector<KernelComponent> components;

    static MatrixFamily ones();
    /// One basis function per distinct psi, dense coefficients.
    static MatrixFamily from_dense(std::int64_t truncation, std::vector<std::pair<OneVarFunction, Matrix>> parts);

    std::size_t size() const noexcept { return static_cast<std::size_t>(2 * truncation + 1); }
    bool empty() const noexcept { return components.empty(); }
    Complex value(std::int64_t j, std::int64_t k, Complex z) const;
    /// The scalar matrix [psi_jk(z)].
    Matrix values(Complex z) const;
    MatrixFamily transposed() const;
};

/// Psi(x1,x2,x3) = sum_{j,k} alpha_j(x1) beta_jk(x2) gamma_k(x3).
struct HaagerupRep3 {
    ListFamily alpha;
    MatrixFamily beta;
    ListFamily gamma;
};

/// First kind: Psi = sum_{j,k} alpha_j(x1) beta_k(x2) gamma_jk(x3).
struct HaagerupLikeRep1 {
    ListFamily alpha;
    ListFamily beta;
    MatrixFamily gamma;
};

/// Second kind: Psi = sum_{j,k} alpha_jk(x1) beta_j(x2) gamma_k(x3).
struct HaagerupLikeRep2 {
    MatrixFamily alpha;
    ListFamily beta;
    ListFamily gamma;
};

Complex evaluate_scalar(const HaagerupRep3& rep, Complex x1, Complex x2, Complex x3);
Complex evaluate_scalar(const HaagerupLikeRep1& rep, Complex x1, Complex x2, Complex x3);
Complex evaluate_scalar(const HaagerupLikeRep2& rep, Complex x1, Complex x2, Complex x3);

/// sum_{j,k} alpha_j(A) T beta_jk(B) R gamma_k(C).
Matrix evaluate_triple_h(const HaagerupRep3& rep, const Matrix& a, const Matrix& t, const Matrix& b, const Matrix& r,
                         const Matrix& c);
/// sum_{j,k} alpha_j(A) T beta_k(B) R gamma_jk(C).
Matrix evaluate_triple_like1(const HaagerupLikeRep1& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                             const Matrix& r, const Matrix& c);
/// sum_{j,k} alpha_jk(A) T beta_j(B) R gamma_k(C).
Matrix evaluate_triple_like2(const HaagerupLikeRep2& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                             const Matrix& r, const Matrix& c);

/// Q -> trace((iiint Psi dE2 R dE3 Q dE1) T), the defining functional of the
/// first-kind integral, evaluated through the rearranged Haagerup integrand
/// (x2, x3, x1) -> Psi(x1, x2, x3). Equals trace(W Q).
Complex like1_functional(const HaagerupLikeRep1& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                         const Matrix& r, const Matrix& c, const Matrix& q);
/// Q -> trace((iiint Psi dE3 Q dE1 T dE2) R) for the second kind.
Complex like2_functional(const HaagerupLikeRep2& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                         const Matrix& r, const Matrix& c, const Matrix& q);

/// The rearranged integrand of `like1_functional` as a Haagerup element.
HaagerupRep3 rearrange_like1(const HaagerupLikeRep1& rep);
HaagerupRep3 rearrange_like2(const HaagerupLikeRep2& rep);

struct DividedDifferenceOptions {
    /// Flip the overall sign of the cardinal double series.
    bool flip_sign = false;
};

/// Representation of (f(x1,y) - f(x2,y)) / (x1 - x2) from the cardinal
/// double series at scale s = band_radius(f). Empty for s = 0.
HaagerupLikeRep1 build_dd1_rep(const ExpSum2D& f, std::int64_t truncation, DividedDifferenceOptions options = {});
/// Mirror image for (f(x,y1) - f(x,y2)) / (y1 - y2).
HaagerupLikeRep2 build_dd2_rep(const ExpSum2D& f, std::int64_t truncation, DividedDifferenceOptions options = {});

/// Default real-axis grid: 4096 points on [-h, h], h = 4 pi N / (64 s)
/// clipped to [1, 50].
std::vector<double> rep_norm_grid(std::int64_t truncation, double s, int points = 4096);

struct RepNormBound {
    double value = 0.0;
    double first = 0.0;  ///< family norms in storage order
    double second = 0.0;
    double third = 0.0;
    std::string matrix_method;  ///< how the matrix family norm was obtained
};

/// sup_x (sum_j |alpha_j(x)|^2)^{1/2} over the grid.
double list_family_norm(const ListFamily& family, std::span<const double> grid);
/// sup_x ||[psi_jk(x)]|| over the grid. Exact grid sup for one component or
/// small N; otherwise the triangle bound sum_m sup|phi_m| ||G_m||.
double matrix_family_norm(const MatrixFamily& family, std::span<const double> grid, std::string* method = nullptr);
/// Operator norm of one coefficient kernel: SVD when small, Lanczos (ARPACK) on G*G otherwise.
double kernel_norm(const CoefficientKernel& kernel);

/// Product of the three family norms; an upper-bound certificate for the
/// truncated representation, not the infimal tensor norm.
RepNormBound rep_norm_bound(const HaagerupRep3& rep, std::span<const double> grid);
RepNormBound rep_norm_bound(const HaagerupLikeRep1& rep, std::span<const double> grid);
RepNormBound rep_norm_bound(const HaagerupLikeRep2& rep, std::span<const double> grid);

}  // namespace disscalc
