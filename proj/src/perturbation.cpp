#include "disscalc/perturbation.hpp"

#include <algorithm>

#include "disscalc/funcalc.hpp"

namespace disscalc {

namespace {

void require_analytic(const ExpSum2D& f, const char* where) {
    if (!f.is_analytic()) throw Error(ErrorKind::NotAnalytic, std::string(where) + ": function has a negative frequency");
}

void require_dims(std::initializer_list<const DissipativeMatrix*> mats, const char* where) {
    const auto n = (*mats.begin())->dim();
    for (const auto* m : mats) {
        if (m->dim() != n) throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": dimensions differ");
    }
}

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

Matrix first_kind(const HaagerupLikeRep1& rep, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                  const DissipativeMatrix& m) {
    return evaluate_triple_like1(rep, l1, l1.matrix() - l2.matrix(), l2, identity(l1.dim()), m);
}

Matrix second_kind(const HaagerupLikeRep2& rep, const DissipativeMatrix& l, const DissipativeMatrix& m1,
                   const DissipativeMatrix& m2) {
    return evaluate_triple_like2(rep, l, identity(l.dim()), m1, m1.matrix() - m2.matrix(), m2);
}

IdentityResult finish(Matrix lhs, Matrix rhs) {
    const double residual = frobenius_norm(lhs - rhs);
    return {std::move(lhs), std::move(rhs), residual};
}

}  // namespace

IdentityResult identity_first(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                              const DissipativeMatrix& m, std::int64_t truncation, DividedDifferenceOptions options) {
    require_analytic(f, "identity_first");
    require_dims({&l1, &l2, &m}, "identity_first");
    const MatrixCalculus mc(m);
    Matrix lhs = apply_pair(f, MatrixCalculus(l1), mc) - apply_pair(f, MatrixCalculus(l2), mc);
    return finish(std::move(lhs), first_kind(build_dd1_rep(f, truncation, options), l1, l2, m));
}

IdentityResult identity_second(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m1,
                               const DissipativeMatrix& m2, std::int64_t truncation,
                               DividedDifferenceOptions options) {
    require_analytic(f, "identity_second");
    require_dims({&l, &m1, &m2}, "identity_second");
    const MatrixCalculus lc(l);
    Matrix lhs = apply_pair(f, lc, MatrixCalculus(m1)) - apply_pair(f, lc, MatrixCalculus(m2));
    return finish(std::move(lhs), second_kind(build_dd2_rep(f, truncation, options), l, m1, m2));
}

FullIdentityResult identity_full(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                                 const DissipativeMatrix& m1, const DissipativeMatrix& m2, std::int64_t truncation,
                                 IdentityOrder order, DividedDifferenceOptions options) {
    require_analytic(f, "identity_full");
    require_dims({&l1, &l2, &m1, &m2}, "identity_full");
    const auto dd1 = build_dd1_rep(f, truncation, options);
    const auto dd2 = build_dd2_rep(f, truncation, options);
    FullIdentityResult out;
    if (order == IdentityOrder::Ab12) {
        out.first_kind_term = first_kind(dd1, l1, l2, m1);
        out.second_kind_term = second_kind(dd2, l2, m1, m2);
    } else {
        out.first_kind_term = first_kind(dd1, l1, l2, m2);
        out.second_kind_term = second_kind(dd2, l1, m1, m2);
    }
    Matrix lhs = apply_pair(f, l1, m1) - apply_pair(f, l2, m2);
    out.total = finish(std::move(lhs), out.first_kind_term + out.second_kind_term);
    return out;
}

std::vector<RegularizationPoint> regularization_convergence(const DissipativeMatrix& l1,
                                                            const DissipativeMatrix& l2,
                                                            const std::vector<double>& eps_list) {
    require_dims({&l1, &l2}, "regularization_convergence");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0) || (i > 0 && !(eps_list[i] < eps_list[i - 1]))) {
            throw Error(ErrorKind::InvalidInput, "regularization_convergence: eps list must be positive and decreasing");
        }
    }
    const Matrix delta = l1.matrix() - l2.matrix();
    std::vector<RegularizationPoint> out;
    out.reserve(eps_list.size());
    for (double eps : eps_list) {
        const Matrix reg = regularize(l1, eps).matrix() - regularize(l2, eps).matrix();
        out.push_back({eps, frobenius_norm(reg - delta)});
    }
    return out;
}

LipschitzRatio lipschitz_ratio(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& m1,
                               const DissipativeMatrix& l2, const DissipativeMatrix& m2, SchattenP p,
                               const SupMode& besov_mode) {
    require_analytic(f, "lipschitz_ratio");
    require_dims({&l1, &m1, &l2, &m2}, "lipschitz_ratio");
    LipschitzRatio out;
    out.perturbation = std::max(schatten_norm(l1.matrix() - l2.matrix(), p), schatten_norm(m1.matrix() - m2.matrix(), p));
    out.numerator = schatten_norm(apply_pair(f, l1, m1) - apply_pair(f, l2, m2), p);
    out.besov_norm = besov_norm_inhomogeneous(f, build_window(), besov_mode);
    out.denominator = out.besov_norm * out.perturbation;
    if (out.perturbation == 0.0) {
        out.status = RatioStatus::ZeroPerturbation;
        return out;
    }
    // A zero Besov norm means f = 0, so the numerator vanishes as well.
    out.ratio = out.denominator > 0.0 ? out.numerator / out.denominator : 0.0;
    return out;
}

ElementaryBound elementary_bound_check(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                                       const DissipativeMatrix& m, SchattenP p, double k_emp) {
    require_analytic(f, "elementary_bound_check");
    require_dims({&l1, &l2, &m}, "elementary_bound_check");
    const MatrixCalculus mc(m);
    ElementaryBound out;
    out.lhs_norm = schatten_norm(apply_pair(f, MatrixCalculus(l1), mc) - apply_pair(f, MatrixCalculus(l2), mc), p);
    const double scale = band_radius(f) * f.coefficient_l1() * schatten_norm(l1.matrix() - l2.matrix(), p);
    out.bound = k_emp * scale;
    out.minimal_constant = scale > 0.0 ? out.lhs_norm / scale : 0.0;
    // Exact zeros on both sides (L1 = L2, or f constant) are consistent.
    out.ok = out.lhs_norm <= out.bound || out.lhs_norm == 0.0;
    return out;
}

}  // namespace disscalc
