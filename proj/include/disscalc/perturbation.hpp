#pragma once

// Operator-integral identities for f(L, M) under perturbations of either
// argument, the resolvent regularization estimate, and Lipschitz-type
// Schatten ratio experiments.

#include <cstdint>
#include <optional>
#include <vector>

#include "disscalc/besov.hpp"
#include "disscalc/matrix_core.hpp"
#include "disscalc/opint.hpp"
#include "disscalc/scalar_functions.hpp"

namespace disscalc {

struct IdentityResult {
    Matrix lhs;  ///< exact, from the separable exponential oracle
    Matrix rhs;  ///< truncated triple operator integral(s)
    double residual_s2 = 0.0;
};

/// f(L1,M) - f(L2,M) against the first-kind integral of the divided
/// difference in x with (A, T, B, R, C) = (L1, L1 - L2, L2, I, M).
IdentityResult identity_first(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                              const DissipativeMatrix& m, std::int64_t truncation,
                              DividedDifferenceOptions options = {});

/// f(L,M1) - f(L,M2) against the second-kind integral with
/// (A, T, B, R, C) = (L, I, M1, M1 - M2, M2).
IdentityResult identity_second(const ExpSum2D& f, const DissipativeMatrix& l, const DissipativeMatrix& m1,
                               const DissipativeMatrix& m2, std::int64_t truncation,
                               DividedDifferenceOptions options = {});

enum class IdentityOrder {
    Ab12,  ///< perturb L at M1 first, then M at L2
    Ba21,  ///< perturb M at L1 first, then L at M2
};

struct FullIdentityResult {
    IdentityResult total;
    Matrix first_kind_term;
    Matrix second_kind_term;
};

/// f(L1,M1) - f(L2,M2) as a sum of one first-kind and one second-kind integral.
FullIdentityResult identity_full(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                                 const DissipativeMatrix& m1, const DissipativeMatrix& m2, std::int64_t truncation,
                                 IdentityOrder order, DividedDifferenceOptions options = {});

struct RegularizationPoint {
    double eps = 0.0;
    double err = 0.0;
};

/// err(eps) = ||(L1(eps) - L2(eps)) - (L1 - L2)||_S2 for each eps.
std::vector<RegularizationPoint> regularization_convergence(const DissipativeMatrix& l1,
                                                            const DissipativeMatrix& l2,
                                                            const std::vector<double>& eps_list);

enum class RatioStatus { Ok, ZeroPerturbation };

struct LipschitzRatio {
    RatioStatus status = RatioStatus::Ok;
    double numerator = 0.0;
    double denominator = 0.0;
    double besov_norm = 0.0;
    double perturbation = 0.0;  ///< max(||L1-L2||_Sp, ||M1-M2||_Sp)
    /// Present only when status is Ok.
    std::optional<double> ratio;
};

/// ||f(L1,M1) - f(L2,M2)||_Sp / (||f||_B * max(||L1-L2||_Sp, ||M1-M2||_Sp)).
LipschitzRatio lipschitz_ratio(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& m1,
                               const DissipativeMatrix& l2, const DissipativeMatrix& m2, SchattenP p,
                               const SupMode& besov_mode = SupMode::coef_sum());

struct ElementaryBound {
    double lhs_norm = 0.0;
    double bound = 0.0;
    /// lhs_norm / (band_radius * sum|c_m| * ||L1 - L2||_Sp); 0 when undefined.
    double minimal_constant = 0.0;
    bool ok = true;
};

/// ||f(L1,M) - f(L2,M)||_Sp <= K * band_radius(f) * sum|c_m| * ||L1-L2||_Sp.
ElementaryBound elementary_bound_check(const ExpSum2D& f, const DissipativeMatrix& l1, const DissipativeMatrix& l2,
                                       const DissipativeMatrix& m, SchattenP p, double k_emp);

}  // namespace disscalc
