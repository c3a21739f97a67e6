#include "disscalc/opint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>

#include <arpack/arpack.hpp>

#include "disscalc/prng.hpp"
#include "fft.hpp"

namespace disscalc {

/// Product with the (2N+1)-square Toeplitz matrix H(j, k) = 1/(j - k),
/// H(j, j) = 0, through a circulant embedding.
class ToeplitzHilbert {
public:
    explicit ToeplitzHilbert(std::size_t size) : size_(size), length_(std::bit_ceil(2 * size)) {
        detail::FftwBuffer kernel(length_);
        for (std::size_t i = 0; i < length_; ++i) kernel.set(i, Complex{});
        for (std::size_t d = 1; d < size_; ++d) {
            kernel.set(d, Complex{1.0 / static_cast<double>(d)});
            kernel.set(length_ - d, Complex{-1.0 / static_cast<double>(d)});
        }
        detail::FftwBuffer scratch(length_);
        forward_ = detail::FftwPlan::dft_1d(scratch, FFTW_FORWARD);
        backward_ = detail::FftwPlan::dft_1d(scratch, FFTW_BACKWARD);
        forward_.execute(kernel);
        spectrum_.resize(length_);
        const double norm = 1.0 / static_cast<double>(length_);
        for (std::size_t i = 0; i < length_; ++i) spectrum_[i] = kernel.get(i) * norm;
    }

    static std::shared_ptr<const ToeplitzHilbert> get(std::size_t size) {
        static std::mutex mutex;
        static std::map<std::size_t, std::shared_ptr<const ToeplitzHilbert>> cache;
        std::lock_guard lock(mutex);
        auto& slot = cache[size];
        if (!slot) slot = std::make_shared<const ToeplitzHilbert>(size);
        return slot;
    }

    Matrix apply(const Matrix& v) const {
        Matrix out(v.rows(), v.cols());
        detail::FftwBuffer buffer(length_);
        for (Eigen::Index col = 0; col < v.cols(); ++col) {
            for (std::size_t i = 0; i < length_; ++i) {
                buffer.set(i, i < size_ ? v(static_cast<Eigen::Index>(i), col) : Complex{});
            }
            forward_.execute(buffer);
            fftw_complex* data = buffer.data();
            for (std::size_t i = 0; i < length_; ++i) {
                // Plain arithmetic: std::complex operator* carries NaN recovery.
                const double re = data[i][0], im = data[i][1];
                const double sr = spectrum_[i].real(), si = spectrum_[i].imag();
                data[i][0] = re * sr - im * si;
                data[i][1] = re * si + im * sr;
            }
            backward_.execute(buffer);
            for (std::size_t i = 0; i < size_; ++i) out(static_cast<Eigen::Index>(i), col) = buffer.get(i);
        }
        return out;
    }

private:
    std::size_t size_;
    std::size_t length_;
    std::vector<Complex> spectrum_;
    detail::FftwPlan forward_;
    detail::FftwPlan backward_;
};

// ---------------------------------------------------------------------------

ListFamily ListFamily::ones() { return {0, {OneVarFunction::constant(1.0)}}; }

ListFamily ListFamily::cardinal(std::int64_t truncation, double s) {
    ListFamily family{truncation, {}};
    family.members.reserve(static_cast<std::size_t>(2 * truncation + 1));
    for (std::int64_t j = -truncation; j <= truncation; ++j) family.members.emplace_back(CardinalAtom{j, s});
    return family;
}

Vector ListFamily::values(Complex z) const {
    Vector out(static_cast<Eigen::Index>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) out(static_cast<Eigen::Index>(i)) = members[i](z);
    return out;
}

std::vector<Matrix> ListFamily::apply(const MatrixCalculus& calc) const {
    std::vector<Matrix> out;
    out.reserve(members.size());
    for (const auto& member : members) out.push_back(calc.apply(member));
    return out;
}

// ---------------------------------------------------------------------------

DividedDifferenceKernel::DividedDifferenceKernel(std::int64_t truncation, double s,
                                                 std::vector<std::pair<Complex, double>> terms)
    : truncation_(truncation), s_(s), terms_(std::move(terms)) {
    if (truncation < 0) throw Error(ErrorKind::InvalidInput, "divided difference kernel: negative truncation");
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidInput, "divided difference kernel: scale must be positive");
    const auto size = static_cast<Eigen::Index>(2 * truncation + 1);
    diagonal_ = Vector::Zero(size);
    for (const auto& [c, omega] : terms_) {
        Vector u(size);
        const double ratio = omega / s;
        for (std::int64_t j = -truncation; j <= truncation; ++j) {
            // Reduce omega/s * j modulo 1 before scaling by 2 pi.
            const double turns = ratio * static_cast<double>(j);
            const double frac = turns - std::round(turns);
            u(j + truncation) = std::exp(Complex{0.0, kTwoPi * frac});
        }
        diagonal_ -= (kI * omega * c) * u;
        phases_.push_back(std::move(u));
    }
    hilbert_ = ToeplitzHilbert::get(static_cast<std::size_t>(size));
}

Complex DividedDifferenceKernel::at(std::int64_t j, std::int64_t k) const {
    if (j == k) return diagonal_(j + truncation_);
    Complex sum{};
    for (std::size_t m = 0; m < terms_.size(); ++m) {
        sum += terms_[m].first * (phases_[m](j + truncation_) - phases_[m](k + truncation_));
    }
    return -s_ / kTwoPi * sum / static_cast<double>(j - k);
}

Matrix DividedDifferenceKernel::dense() const {
    const auto size = static_cast<Eigen::Index>(this->size());
    Matrix g(size, size);
    for (std::int64_t j = -truncation_; j <= truncation_; ++j) {
        for (std::int64_t k = -truncation_; k <= truncation_; ++k) g(j + truncation_, k + truncation_) = at(j, k);
    }
    return g;
}

Matrix DividedDifferenceKernel::apply(const Matrix& v) const { return apply_impl(v, false); }

Matrix DividedDifferenceKernel::apply_adjoint(const Matrix& v) const { return apply_impl(v, true); }

Matrix DividedDifferenceKernel::apply_impl(const Matrix& v, bool adjoint) const {
    const auto size = static_cast<Eigen::Index>(this->size());
    if (v.rows() != size) throw Error(ErrorKind::DimensionMismatch, "divided difference kernel: bad vector length");
    const auto cols = v.cols();
    const auto count = static_cast<Eigen::Index>(terms_.size());
    // One batched Toeplitz product for v and every u_m (.) v.
    Matrix stacked(size, cols * (count + 1));
    stacked.leftCols(cols) = v;
    for (Eigen::Index m = 0; m < count; ++m) {
        const Vector u = adjoint ? Vector(phases_[m].conjugate()) : phases_[m];
        stacked.middleCols(cols * (m + 1), cols) = u.asDiagonal() * v;
    }
    const Matrix h = hilbert_->apply(stacked);
    const Vector diag = adjoint ? Vector(diagonal_.conjugate()) : diagonal_;
    Matrix acc = Matrix::Zero(size, cols);
    for (Eigen::Index m = 0; m < count; ++m) {
        const Complex c = adjoint ? std::conj(terms_[m].first) : terms_[m].first;
        const Vector u = adjoint ? Vector(phases_[m].conjugate()) : phases_[m];
        acc += c * (u.asDiagonal() * h.leftCols(cols) - h.middleCols(cols * (m + 1), cols));
    }
    return diag.asDiagonal() * v - (s_ / kTwoPi) * acc;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t kernel_size(const CoefficientKernel& kernel) {
    return std::visit(
        [](const auto& k) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(k)>, DenseKernel>) {
                return static_cast<std::size_t>(k.values.rows());
            } else {
                return k.size();
            }
        },
        kernel);
}

/// G v (or G^T v when `transposed`).
Matrix kernel_apply(const CoefficientKernel& kernel, bool transposed, const Matrix& v) {
    return std::visit(
        [&](const auto& k) -> Matrix {
            if constexpr (std::is_same_v<std::decay_t<decltype(k)>, DenseKernel>) {
                return transposed ? Matrix(k.values.transpose() * v) : Matrix(k.values * v);
            } else {
                return k.apply(v);  // symmetric
            }
        },
        kernel);
}

Matrix kernel_apply_adjoint(const CoefficientKernel& kernel, bool transposed, const Matrix& v) {
    return std::visit(
        [&](const auto& k) -> Matrix {
            if constexpr (std::is_same_v<std::decay_t<decltype(k)>, DenseKernel>) {
                return transposed ? Matrix(k.values.conjugate() * v) : Matrix(k.values.adjoint() * v);
            } else {
                return k.apply_adjoint(v);
            }
        },
        kernel);
}

Complex kernel_entry(const CoefficientKernel& kernel, bool transposed, std::int64_t truncation, std::int64_t j,
                     std::int64_t k) {
    if (transposed) std::swap(j, k);
    return std::visit(
        [&](const auto& g) -> Complex {
            if constexpr (std::is_same_v<std::decay_t<decltype(g)>, DenseKernel>) {
                return g.values(j + truncation, k + truncation);
            } else {
                return g.at(j, k);
            }
        },
        kernel);
}

/// a^T G b.
Complex bilinear(const KernelComponent& comp, const Vector& a, const Vector& b) {
    return a.transpose() * kernel_apply(comp.kernel, comp.transposed, b).col(0);
}

/// sum_{j,k} G(j,k) P_j [mid] Q_k, reduced pairwise over j.
Matrix contract(const KernelComponent& comp, const std::vector<Matrix>& p, const Matrix* mid,
                const std::vector<Matrix>& q) {
    const auto size = static_cast<Eigen::Index>(q.size());
    const auto rows = q.front().rows();
    const auto cols = q.front().cols();
    Matrix stacked(size, rows * cols);
    for (Eigen::Index k = 0; k < size; ++k) {
        stacked.row(k) = Eigen::Map<const Eigen::RowVectorXcd>(q[k].data(), rows * cols);
    }
    const Matrix x = kernel_apply(comp.kernel, comp.transposed, stacked);
    std::vector<Matrix> terms;
    terms.reserve(p.size());
    Matrix xj(rows, cols);
    for (Eigen::Index j = 0; j < size; ++j) {
        Eigen::Map<Eigen::RowVectorXcd>(xj.data(), rows * cols) = x.row(j);
        terms.push_back(mid != nullptr ? Matrix(p[j] * *mid * xj) : Matrix(p[j] * xj));
    }
    return pairwise_sum(terms, p.front().rows(), cols);
}

void require_square(const Matrix& m, const char* name, const char* where) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": " + name + " is not square");
    }
}

void check_shapes(const Matrix& a, const Matrix& t, const Matrix& b, const Matrix& r, const Matrix& c,
                  const char* where) {
    require_square(a, "A", where);
    require_square(b, "B", where);
    require_square(c, "C", where);
    if (t.rows() != a.rows() || t.cols() != b.rows() || r.rows() != b.rows() || r.cols() != c.rows()) {
        throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": A T B R C shapes are incompatible");
    }
}

void check_truncations(std::size_t first, std::size_t second, std::size_t third, const char* where) {
    if (first != second || second != third) {
        throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": family index ranges differ");
    }
}

std::size_t matrix_family_size(const MatrixFamily& family) {
    for (const auto& comp : family.components) {
        if (kernel_size(comp.kernel) != family.size()) {
            throw Error(ErrorKind::DimensionMismatch, "matrix family: kernel size does not match truncation");
        }
    }
    return family.size();
}

}  // namespace

MatrixFamily MatrixFamily::ones() {
    return {0, {{OneVarFunction::constant(1.0), DenseKernel{Matrix::Ones(1, 1)}, false}}};
}

MatrixFamily MatrixFamily::from_dense(std::int64_t truncation, std::vector<std::pair<OneVarFunction, Matrix>> parts) {
    MatrixFamily family{truncation, {}};
    for (auto& [basis, values] : parts) {
        family.components.push_back({std::move(basis), DenseKernel{std::move(values)}, false});
    }
    matrix_family_size(family);
    return family;
}

Complex MatrixFamily::value(std::int64_t j, std::int64_t k, Complex z) const {
    Complex sum{};
    for (const auto& comp : components) sum += kernel_entry(comp.kernel, comp.transposed, truncation, j, k) * comp.basis(z);
    return sum;
}

Matrix MatrixFamily::values(Complex z) const {
    const auto n = static_cast<Eigen::Index>(size());
    Matrix out = Matrix::Zero(n, n);
    for (const auto& comp : components) {
        const Complex phi = comp.basis(z);
        if (phi == Complex{}) continue;
        const Matrix g = std::visit(
            [](const auto& k) -> Matrix {
                if constexpr (std::is_same_v<std::decay_t<decltype(k)>, DenseKernel>) {
                    return k.values;
                } else {
                    return k.dense();
                }
            },
            comp.kernel);
        out += phi * (comp.transposed ? Matrix(g.transpose()) : g);
    }
    return out;
}

MatrixFamily MatrixFamily::transposed() const {
    MatrixFamily out = *this;
    for (auto& comp : out.components) comp.transposed = !comp.transposed;
    return out;
}

// ---------------------------------------------------------------------------

Complex evaluate_scalar(const HaagerupRep3& rep, Complex x1, Complex x2, Complex x3) {
    check_truncations(rep.alpha.size(), matrix_family_size(rep.beta), rep.gamma.size(), "evaluate_scalar");
    const Vector a = rep.alpha.values(x1);
    const Vector g = rep.gamma.values(x3);
    Complex sum{};
    for (const auto& comp : rep.beta.components) sum += comp.basis(x2) * bilinear(comp, a, g);
    return sum;
}

Complex evaluate_scalar(const HaagerupLikeRep1& rep, Complex x1, Complex x2, Complex x3) {
    check_truncations(rep.alpha.size(), rep.beta.size(), matrix_family_size(rep.gamma), "evaluate_scalar");
    const Vector a = rep.alpha.values(x1);
    const Vector b = rep.beta.values(x2);
    Complex sum{};
    for (const auto& comp : rep.gamma.components) sum += comp.basis(x3) * bilinear(comp, a, b);
    return sum;
}

Complex evaluate_scalar(const HaagerupLikeRep2& rep, Complex x1, Complex x2, Complex x3) {
    check_truncations(matrix_family_size(rep.alpha), rep.beta.size(), rep.gamma.size(), "evaluate_scalar");
    const Vector b = rep.beta.values(x2);
    const Vector g = rep.gamma.values(x3);
    Complex sum{};
    for (const auto& comp : rep.alpha.components) sum += comp.basis(x1) * bilinear(comp, b, g);
    return sum;
}

namespace {

std::vector<Matrix> right_multiply(std::vector<Matrix> factors, const Matrix& m) {
    for (auto& f : factors) f = f * m;
    return factors;
}


}  // namespace

Matrix evaluate_triple_h(const HaagerupRep3& rep, const Matrix& a, const Matrix& t, const Matrix& b, const Matrix& r,
                         const Matrix& c) {
    check_shapes(a, t, b, r, c, "evaluate_triple_h");
    check_truncations(rep.alpha.size(), matrix_family_size(rep.beta), rep.gamma.size(), "evaluate_triple_h");
    const MatrixCalculus ac(a), bc(b), cc(c);
    const auto p = right_multiply(rep.alpha.apply(ac), t);
    const auto q = rep.gamma.apply(cc);
    std::vector<Matrix> parts;
    for (const auto& comp : rep.beta.components) {
        const Matrix mid = bc.apply(comp.basis) * r;
        parts.push_back(contract(comp, p, &mid, q));
    }
    return pairwise_sum(parts, a.rows(), c.cols());
}

Matrix evaluate_triple_like1(const HaagerupLikeRep1& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                             const Matrix& r, const Matrix& c) {
    check_shapes(a, t, b, r, c, "evaluate_triple_like1");
    check_truncations(rep.alpha.size(), rep.beta.size(), matrix_family_size(rep.gamma), "evaluate_triple_like1");
    const MatrixCalculus ac(a), bc(b), cc(c);
    if (rep.gamma.empty()) return Matrix::Zero(a.rows(), c.cols());
    const auto p = right_multiply(rep.alpha.apply(ac), t);
    const auto q = right_multiply(rep.beta.apply(bc), r);
    std::vector<Matrix> parts;
    for (const auto& comp : rep.gamma.components) parts.push_back(contract(comp, p, nullptr, q) * cc.apply(comp.basis));
    return pairwise_sum(parts, a.rows(), c.cols());
}

Matrix evaluate_triple_like2(const HaagerupLikeRep2& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                             const Matrix& r, const Matrix& c) {
    check_shapes(a, t, b, r, c, "evaluate_triple_like2");
    check_truncations(matrix_family_size(rep.alpha), rep.beta.size(), rep.gamma.size(), "evaluate_triple_like2");
    const MatrixCalculus ac(a), bc(b), cc(c);
    if (rep.alpha.empty()) return Matrix::Zero(a.rows(), c.cols());
    const auto p = right_multiply(rep.beta.apply(bc), r);
    const auto q = rep.gamma.apply(cc);
    std::vector<Matrix> parts;
    for (const auto& comp : rep.alpha.components) parts.push_back(ac.apply(comp.basis) * t * contract(comp, p, nullptr, q));
    return pairwise_sum(parts, a.rows(), c.cols());
}

HaagerupRep3 rearrange_like1(const HaagerupLikeRep1& rep) { return {rep.beta, rep.gamma.transposed(), rep.alpha}; }

HaagerupRep3 rearrange_like2(const HaagerupLikeRep2& rep) { return {rep.gamma, rep.alpha.transposed(), rep.beta}; }

Complex like1_functional(const HaagerupLikeRep1& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                         const Matrix& r, const Matrix& c, const Matrix& q) {
    if (rep.gamma.empty()) return {};
    const Matrix v = evaluate_triple_h(rearrange_like1(rep), b, r, c, q, a);
    return (v * t).trace();
}

Complex like2_functional(const HaagerupLikeRep2& rep, const Matrix& a, const Matrix& t, const Matrix& b,
                         const Matrix& r, const Matrix& c, const Matrix& q) {
    if (rep.alpha.empty()) return {};
    const Matrix v = evaluate_triple_h(rearrange_like2(rep), c, q, a, t, b);
    return (v * r).trace();
}

// ---------------------------------------------------------------------------

namespace {

/// Groups the terms of f by the frequency of the "free" variable and returns,
/// per group, the (c, frequency-in-the-differenced-variable) pairs.
std::map<double, std::vector<std::pair<Complex, double>>> group_terms(const ExpSum2D& f, bool by_b) {
    std::map<double, std::vector<std::pair<Complex, double>>> groups;
    for (const auto& t : f.terms()) {
        const double free = by_b ? t.b : t.a;
        const double differenced = by_b ? t.a : t.b;
        if (differenced == 0.0) continue;  // constant in the differenced variable
        groups[free].emplace_back(t.c, differenced);
    }
    return groups;
}

MatrixFamily divided_difference_family(const ExpSum2D& f, std::int64_t truncation, double s, bool by_b, bool flip) {
    MatrixFamily family{truncation, {}};
    for (auto& [free, terms] : group_terms(f, by_b)) {
        if (flip) {
            for (auto& term : terms) term.first = -term.first;
        }
        family.components.push_back(
            {OneVarFunction(ExpAtom{free}), DividedDifferenceKernel(truncation, s, std::move(terms)), false});
    }
    return family;
}

ListFamily zero_list() { return {0, {OneVarFunction::zero()}}; }

}  // namespace

HaagerupLikeRep1 build_dd1_rep(const ExpSum2D& f, std::int64_t truncation, DividedDifferenceOptions options) {
    if (!f.is_analytic()) throw Error(ErrorKind::NotAnalytic, "build_dd1_rep: function has a negative frequency");
    if (truncation < 0) throw Error(ErrorKind::InvalidInput, "build_dd1_rep: negative truncation");
    const double s = band_radius(f);
    if (s == 0.0) return {zero_list(), zero_list(), MatrixFamily{0, {}}};
    return {ListFamily::cardinal(truncation, s), ListFamily::cardinal(truncation, s),
            divided_difference_family(f, truncation, s, true, options.flip_sign)};
}

HaagerupLikeRep2 build_dd2_rep(const ExpSum2D& f, std::int64_t truncation, DividedDifferenceOptions options) {
    if (!f.is_analytic()) throw Error(ErrorKind::NotAnalytic, "build_dd2_rep: function has a negative frequency");
    if (truncation < 0) throw Error(ErrorKind::InvalidInput, "build_dd2_rep: negative truncation");
    const double s = band_radius(f);
    if (s == 0.0) return {MatrixFamily{0, {}}, zero_list(), zero_list()};
    return {divided_difference_family(f, truncation, s, false, options.flip_sign),
            ListFamily::cardinal(truncation, s), ListFamily::cardinal(truncation, s)};
}

// ---------------------------------------------------------------------------

std::vector<double> rep_norm_grid(std::int64_t truncation, double s, int points) {
    double half_width = s > 0.0 ? 4.0 * kPi * static_cast<double>(truncation) / (64.0 * s) : 1.0;
    half_width = std::clamp(half_width, 1.0, 50.0);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid[static_cast<std::size_t>(i)] =
            points == 1 ? 0.0 : -half_width + 2.0 * half_width * i / static_cast<double>(points - 1);
    }
    return grid;
}

namespace {

// Every member a bare CardinalAtom with one shared scale: the numerator
// e^{isx} - 1 is hoisted out of the sum over j.
std::optional<double> cardinal_family_scale(const ListFamily& family) {
    std::optional<double> scale;
    for (const auto& member : family.members) {
        const auto& products = member.products();
        if (products.size() != 1 || products.front().scale != Complex{1.0} || products.front().factors.size() != 1) {
            return std::nullopt;
        }
        const auto* atom = std::get_if<CardinalAtom>(&products.front().factors.front());
        if (atom == nullptr || (scale && *scale != atom->s)) return std::nullopt;
        scale = atom->s;
    }
    return scale;
}

}  // namespace

double list_family_norm(const ListFamily& family, std::span<const double> grid) {
    double best = 0.0;
    if (const auto scale = cardinal_family_scale(family)) {
        const double s = *scale;
        for (double x : grid) {
            const double numerator = std::norm(std::exp(Complex{0.0, s * x}) - 1.0);
            double total = 0.0;
            for (const auto& member : family.members) {
                const auto j = std::get<CardinalAtom>(member.products().front().factors.front()).j;
                const double w = s * x - kTwoPi * static_cast<double>(j);
                total += std::abs(w) < kCardinalTaylorRadius ? std::norm(cardinal_eval(j, s, Complex{x}))
                                                             : numerator / (w * w);
            }
            best = std::max(best, std::sqrt(total));
        }
        return best;
    }
    for (double x : grid) {
        double total = 0.0;
        for (const auto& member : family.members) total += std::norm(member(Complex{x}));
        best = std::max(best, std::sqrt(total));
    }
    return best;
}

namespace {

constexpr std::size_t kDenseSvdLimit = 256;
constexpr std::size_t kDenseGridLimit = 65;

// Largest eigenvalue of G^*G by implicitly restarted Arnoldi. ARPACK keeps
// Fortran SAVE state, so calls are serialized; the start vector comes from
// Philox so repeated runs agree bit for bit.
std::optional<double> arpack_kernel_norm(const CoefficientKernel& kernel, bool transposed) {
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    const auto n = static_cast<a_int>(kernel_size(kernel));
    const a_int nev = 1;
    const a_int ncv = std::min<a_int>(n, 40);
    const a_int lworkl = 3 * ncv * ncv + 5 * ncv;
    std::vector<Complex> resid(static_cast<std::size_t>(n));
    PhiloxStream rng(0x5eed, 0);
    for (auto& r : resid) r = rng.complex_normal();
    std::vector<Complex> v(static_cast<std::size_t>(n * ncv)), workd(static_cast<std::size_t>(3 * n));
    std::vector<Complex> workl(static_cast<std::size_t>(lworkl)), workev(static_cast<std::size_t>(2 * ncv));
    std::vector<double> rwork(static_cast<std::size_t>(ncv));
    std::array<a_int, 11> iparam{};
    std::array<a_int, 14> ipntr{};
    iparam[0] = 1;     // exact shifts
    iparam[2] = 3000;  // max restarts
    iparam[6] = 1;     // standard problem
    const double tol = 1e-13;
    a_int ido = 0;
    a_int info = 1;  // use resid as the start vector
    Matrix x(n, 1);
    while (true) {
        arpack::naupd(ido, arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, tol, resid.data(), ncv,
                      v.data(), n, iparam.data(), ipntr.data(), workd.data(), workl.data(), lworkl, rwork.data(),
                      info);
        if (ido != -1 && ido != 1) break;
        const Complex* in = workd.data() + ipntr[0] - 1;
        Complex* out = workd.data() + ipntr[1] - 1;
        x.col(0) = Eigen::Map<const Vector>(in, n);
        const Matrix y = kernel_apply_adjoint(kernel, transposed, kernel_apply(kernel, transposed, x));
        Eigen::Map<Vector>(out, n) = y.col(0);
    }
    if (info < 0) return std::nullopt;
    std::vector<Complex> d(static_cast<std::size_t>(nev + 1));
    std::vector<a_int> select(static_cast<std::size_t>(ncv));
    a_int rvec = 0;
    arpack::neupd(rvec, arpack::howmny::ritz_vectors, select.data(), d.data(), nullptr, n, Complex{}, workev.data(),
                  arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, tol, resid.data(), ncv, v.data(),
                  n, iparam.data(), ipntr.data(), workd.data(), workl.data(), lworkl, rwork.data(), info);
    if (info != 0 || iparam[4] < 1) return std::nullopt;
    return std::sqrt(std::max(0.0, d[0].real()));
}

double power_iteration_norm(const CoefficientKernel& kernel, bool transposed) {
    const auto size = static_cast<Eigen::Index>(kernel_size(kernel));
    PhiloxStream rng(0x5eed, 0);
    Matrix v(size, 1);
    for (Eigen::Index i = 0; i < size; ++i) v(i, 0) = rng.complex_normal();
    v /= v.norm();
    double estimate = 0.0;
    for (int iter = 0; iter < 5000; ++iter) {
        const Matrix w = kernel_apply(kernel, transposed, v);
        const double next = w.norm();
        if (next == 0.0) return 0.0;
        Matrix back = kernel_apply_adjoint(kernel, transposed, w);
        v = back / back.norm();
        if (iter > 10 && std::abs(next - estimate) <= 1e-12 * next) return next;
        estimate = next;
    }
    return estimate;
}

}  // namespace

double kernel_norm(const CoefficientKernel& kernel) {
    const std::size_t size = kernel_size(kernel);
    if (size == 0) return 0.0;
    if (size <= kDenseSvdLimit) {
        const Matrix g = std::visit(
            [](const auto& k) -> Matrix {
                if constexpr (std::is_same_v<std::decay_t<decltype(k)>, DenseKernel>) {
                    return k.values;
                } else {
                    return k.dense();
                }
            },
            kernel);
        return operator_norm(g);
    }
    if (const auto norm = arpack_kernel_norm(kernel, false)) return *norm;
    return power_iteration_norm(kernel, false);
}

double matrix_family_norm(const MatrixFamily& family, std::span<const double> grid, std::string* method) {
    const auto set_method = [&](const char* name) {
        if (method != nullptr) *method = name;
    };
    if (family.empty()) {
        set_method("empty");
        return 0.0;
    }
    const auto basis_sup = [&](const OneVarFunction& phi) {
        double best = 0.0;
        for (double x : grid) best = std::max(best, std::abs(phi(Complex{x})));
        return best;
    };
    if (family.components.size() == 1) {
        set_method("single-component");
        const auto& comp = family.components.front();
        return basis_sup(comp.basis) * kernel_norm(comp.kernel);
    }
    if (family.size() <= kDenseGridLimit) {
        set_method("dense-grid");
        double best = 0.0;
        for (double x : grid) best = std::max(best, operator_norm(family.values(Complex{x})));
        return best;
    }
    set_method("triangle");
    double total = 0.0;
    for (const auto& comp : family.components) total += basis_sup(comp.basis) * kernel_norm(comp.kernel);
    return total;
}

RepNormBound rep_norm_bound(const HaagerupRep3& rep, std::span<const double> grid) {
    RepNormBound out;
    out.first = list_family_norm(rep.alpha, grid);
    out.second = matrix_family_norm(rep.beta, grid, &out.matrix_method);
    out.third = list_family_norm(rep.gamma, grid);
    out.value = out.first * out.second * out.third;
    return out;
}

RepNormBound rep_norm_bound(const HaagerupLikeRep1& rep, std::span<const double> grid) {
    RepNormBound out;
    out.first = list_family_norm(rep.alpha, grid);
    out.second = list_family_norm(rep.beta, grid);
    out.third = matrix_family_norm(rep.gamma, grid, &out.matrix_method);
    out.value = out.first * out.second * out.third;
    return out;
}

RepNormBound rep_norm_bound(const HaagerupLikeRep2& rep, std::span<const double> grid) {
    RepNormBound out;
    out.first = matrix_family_norm(rep.alpha, grid, &out.matrix_method);
    out.second = list_family_norm(rep.beta, grid);
    out.third = list_family_norm(rep.gamma, grid);
    out.value = out.first * out.second * out.third;
    return out;
}

}  // namespace disscalc
