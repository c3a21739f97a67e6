#include "disscalc/funcalc.hpp"

#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace disscalc {

Matrix expm(const Matrix& a) {
    // Higham (2005), degree-13 diagonal Pade approximant.
    static constexpr std::array<double, 14> b{64764752532480000.0,
                                              32382376266240000.0,
                                              7771770303897600.0,
                                              1187353796428800.0,
                                              129060195264000.0,
                                              10559470521600.0,
                                              670442572800.0,
                                              33522128640.0,
                                              1323241920.0,
                                              40840800.0,
                                              960960.0,
                                              16380.0,
                                              182.0,
                                              1.0};
    constexpr double theta13 = 5.371920351148152;

    const auto n = a.rows();
    if (n == 0) return a;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Matrix x = a * std::ldexp(1.0, -squarings);

    const Matrix id = Matrix::Identity(n, n);
    const Matrix x2 = x * x;
    const Matrix x4 = x2 * x2;
    const Matrix x6 = x4 * x2;
    const Matrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
    const Matrix u = x * u_inner;
    const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

Matrix expm_taylor(const Matrix& a, int terms) {
    const auto n = a.rows();
    Matrix sum = Matrix::Identity(n, n);
    Matrix power = Matrix::Identity(n, n);
    for (int k = 1; k < terms; ++k) {
        power = power * a / static_cast<double>(k);
        sum += power;
    }
    return sum;
}

std::optional<Matrix> cardinal_inverse_form(const Matrix& l, std::int64_t j, double s) {
    const auto n = l.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix shifted = s * l - kTwoPi * static_cast<double>(j) * id;
    const double threshold = 1e-6 * (1.0 + operator_norm(s * l));
    const Eigen::VectorXd sv = singular_values(shifted);
    if (sv.size() > 0 && sv.minCoeff() < threshold) return std::nullopt;
    const Matrix numerator = expm(kI * s * l) - id;
    return numerator * shifted.partialPivLu().inverse();
}

namespace {

using GaussRule = boost::math::quadrature::gauss<double, 15>;

template <class F>
Matrix gauss_panel(F&& integrand, double lo, double hi) {
    const auto& x = GaussRule::abscissa();
    const auto& w = GaussRule::weights();
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    Matrix sum = w[0] * integrand(mid);  // 15 is odd, abscissa[0] == 0
    for (std::size_t k = 1; k < x.size(); ++k) {
        sum += w[k] * (integrand(mid - half * x[k]) + integrand(mid + half * x[k]));
    }
    return half * sum;
}

template <class F>
Matrix adaptive_gauss(F&& integrand, double lo, double hi, const Matrix& whole, double abs_tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const Matrix left = gauss_panel(integrand, lo, mid);
    const Matrix right = gauss_panel(integrand, mid, hi);
    const Matrix refined = left + right;
    if (depth >= 40 || (refined - whole).cwiseAbs().maxCoeff() <= abs_tol) return refined;
    return adaptive_gauss(integrand, lo, mid, left, 0.5 * abs_tol, depth + 1) +
           adaptive_gauss(integrand, mid, hi, right, 0.5 * abs_tol, depth + 1);
}

}  // namespace

Matrix cardinal_quadrature_form(const Matrix& l, std::int64_t j, double s, double tol) {
    const Matrix generator = kI * s * l;
    const double freq = -kTwoPi * static_cast<double>(j);
    const auto integrand = [&](double t) -> Matrix {
        return expm(t * generator) * std::exp(Complex{0.0, freq * t});
    };
    // |integrand| <= 1 for dissipative L, so an absolute tolerance is relative to O(1).
    const int panels = std::max<std::int64_t>(1, std::abs(j));
    Matrix total = Matrix::Zero(l.rows(), l.cols());
    for (int p = 0; p < panels; ++p) {
        const double lo = static_cast<double>(p) / panels;
        const double hi = static_cast<double>(p + 1) / panels;
        const Matrix whole = gauss_panel(integrand, lo, hi);
        total += adaptive_gauss(integrand, lo, hi, whole, tol / panels, 0);
    }
    return kI * total;
}

// ---------------------------------------------------------------------------

MatrixCalculus::MatrixCalculus(const Matrix& l) : l_(l) {
    if (l.rows() != l.cols()) throw Error(ErrorKind::InvalidInput, "MatrixCalculus: matrix is not square");
    norm_ = l_.size() == 0 ? 0.0 : operator_norm(l_);
}

Matrix MatrixCalculus::exp_i(double omega) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = exp_cache_.find(omega); it != exp_cache_.end()) return it->second;
    }
    Matrix value = expm(kI * omega * l_);
    std::lock_guard lock(mutex_);
    return exp_cache_.emplace(omega, std::move(value)).first->second;
}

const Matrix& MatrixCalculus::cayley_inverse() const {
    std::lock_guard lock(mutex_);
    if (!cayley_inv_) {
        const auto n = dim();
        cayley_inv_ = (Matrix::Identity(n, n) - kI * l_).partialPivLu().inverse();
    }
    return *cayley_inv_;
}

const MatrixCalculus::Schur& MatrixCalculus::schur() const {
    std::lock_guard lock(mutex_);
    if (!schur_) {
        const Eigen::ComplexSchur<Matrix> decomposition(l_);
        schur_ = Schur{decomposition.matrixU(), decomposition.matrixT()};
    }
    return *schur_;
}

Matrix MatrixCalculus::exp_i_schur(double omega) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = exp_schur_cache_.find(omega); it != exp_schur_cache_.end()) return it->second;
    }
    const auto& s = schur();
    Matrix value = s.q.adjoint() * exp_i(omega) * s.q;
    std::lock_guard lock(mutex_);
    return exp_schur_cache_.emplace(omega, std::move(value)).first->second;
}

Matrix MatrixCalculus::cardinal(std::int64_t j, double s) const {
    // With L = Q U Q*: (e^{isL} - I)(sL - 2 pi j I)^{-1} = Q (e^{isU} - I) T^{-1} Q*,
    // T = sU - 2 pi j I upper triangular.
    const auto n = dim();
    const Matrix id = Matrix::Identity(n, n);
    const auto& sd = schur();
    const Matrix t = s * sd.u - kTwoPi * static_cast<double>(j) * id;
    const Matrix t_inv = t.triangularView<Eigen::Upper>().solve(id);
    const double threshold = 1e-6 * (1.0 + s * norm_);
    // sigma_min(T) >= 1 / ||T^{-1}||_F; fall back to the exact value only when
    // this lower bound is inconclusive.
    const double inv_norm = t_inv.norm();
    if (!(std::isfinite(inv_norm) && 1.0 / inv_norm >= threshold)) {
        const Eigen::VectorXd sv = singular_values(s * l_ - kTwoPi * static_cast<double>(j) * id);
        if (sv.size() > 0 && sv.minCoeff() < threshold) return cardinal_quadrature_form(l_, j, s);
    }
    return sd.q * ((exp_i_schur(s) - id) * t_inv) * sd.q.adjoint();
}

Matrix MatrixCalculus::apply(const OneVarAtom& atom) const {
    const auto n = dim();
    return std::visit(
        [&](const auto& a) -> Matrix {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ExpAtom>) {
                return exp_i(a.omega);
            } else if constexpr (std::is_same_v<T, CardinalAtom>) {
                return cardinal(a.j, a.s);
            } else if constexpr (std::is_same_v<T, CayleyInvAtom>) {
                return cayley_inverse();
            } else {
                return a.c * Matrix::Identity(n, n);
            }
        },
        atom);
}

Matrix MatrixCalculus::apply(const OneVarFunction& phi) const {
    const auto n = dim();
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& product : phi.products()) {
        Matrix value = product.scale * Matrix::Identity(n, n);
        for (const auto& atom : product.factors) {
            if (const auto* c = std::get_if<ConstAtom>(&atom)) {
                value *= c->c;
            } else {
                value = value * apply(atom);
            }
        }
        sum += value;
    }
    return sum;
}

Matrix apply_atom(const OneVarAtom& atom, const DissipativeMatrix& l) { return MatrixCalculus(l).apply(atom); }

Matrix apply_one_var(const OneVarFunction& phi, const DissipativeMatrix& l) { return MatrixCalculus(l).apply(phi); }

namespace {

void require_analytic(const ExpSum2D& f, const char* where) {
    if (!f.is_analytic()) {
        throw Error(ErrorKind::NotAnalytic, std::string(where) + ": function has a negative frequency");
    }
}

void require_same_dim(const MatrixCalculus& l, const MatrixCalculus& m, const char* where) {
    if (l.dim() != m.dim()) throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": dimensions differ");
}

}  // namespace

Matrix pairwise_sum(std::span<const Matrix> terms, Eigen::Index rows, Eigen::Index cols) {
    if (terms.empty()) return Matrix::Zero(rows, cols);
    if (terms.size() == 1) return terms.front();
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.first(half), rows, cols) + pairwise_sum(terms.subspan(half), rows, cols);
}

Matrix apply_pair(const ExpSum2D& f, const MatrixCalculus& l, const MatrixCalculus& m) {
    require_analytic(f, "apply_pair");
    require_same_dim(l, m, "apply_pair");
    std::vector<Matrix> parts;
    parts.reserve(f.size());
    for (const auto& t : f.terms()) parts.push_back(t.c * (l.exp_i(t.a) * m.exp_i(t.b)));
    return pairwise_sum(parts, l.dim(), l.dim());
}

Matrix apply_pair(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m) {
    return apply_pair(f, MatrixCalculus(l), MatrixCalculus(m));
}

Matrix apply_pair_sharp(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m) {
    require_analytic(f, "apply_pair_sharp");
    const MatrixCalculus lc(l);
    const MatrixCalculus mc(m);
    require_same_dim(lc, mc, "apply_pair_sharp");
    std::vector<Matrix> parts;
    parts.reserve(f.size());
    for (const auto& t : f.terms()) parts.push_back(t.c * (lc.exp_i(t.a) * (mc.exp_i(t.b) * mc.cayley_inverse())));
    if (parts.empty()) return Matrix::Zero(l.dim(), l.dim());
    return pairwise_sum(parts, l.dim(), l.dim());
}

double sharp_remark_identity(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m,
                             const DissipativeMatrix& m0) {
    require_analytic(f, "sharp_remark_identity");
    if (m0.dim() != m.dim()) throw Error(ErrorKind::DimensionMismatch, "sharp_remark_identity: dimensions differ");
    const auto n = m.dim();
    const Matrix m0_inv = (Matrix::Identity(n, n) - kI * m0.matrix()).partialPivLu().inverse();
    const Matrix lhs = apply_pair(f, l, m) * m0_inv;
    const Matrix sharp = apply_pair_sharp(f, l, m);
    const Matrix rhs = kI * sharp * (m0.matrix() - m.matrix()) * m0_inv + sharp;
    return operator_norm(lhs - rhs);
}

}  // namespace disscalc
