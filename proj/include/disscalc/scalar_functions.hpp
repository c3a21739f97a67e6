#pragma once

// Exact representations of band-limited analytic functions of one and two
// real variables: finite exponential sums, divided differences, and the
// cardinal sampling basis C_j(x) = (e^{isx} - 1) / (sx - 2*pi*j).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "disscalc/common.hpp"

namespace disscalc {

/// One term c * e^{i(a x + b y)}.
struct ExpTerm {
    Complex c;
    double a = 0.0;
    double b = 0.0;

    friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

/// Finite exponential sum f(x, y) = sum_m c_m e^{i(a_m x + b_m y)}.
///
/// Terms are kept sorted by (a, b) with identical frequency pairs merged and
/// exact zeros dropped, so two sums with the same spectrum compare equal.
/// Negative frequencies are representable; `is_analytic()` reports whether
/// the spectrum lies in the closed positive quadrant.
class ExpSum2D {
public:
    ExpSum2D() = default;
    explicit ExpSum2D(std::vector<ExpTerm> terms);

    static ExpSum2D constant(Complex c) { return ExpSum2D({{c, 0.0, 0.0}}); }
    static ExpSum2D exponential(Complex c, double a, double b) { return ExpSum2D({{c, a, b}}); }

    const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    bool is_analytic() const noexcept;
    /// Sum of |c_m|; an upper bound for the sup norm on R^2.
    double coefficient_l1() const noexcept;

    /// Multiplies every coefficient by `scale(a, b)`.
    template <class F>
    ExpSum2D map_coefficients(F&& scale) const {
        std::vector<ExpTerm> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_) out.push_back({t.c * scale(t.a, t.b), t.a, t.b});
        return ExpSum2D(std::move(out));
    }

    ExpSum2D operator+(const ExpSum2D& other) const;
    ExpSum2D operator-(const ExpSum2D& other) const;
    ExpSum2D operator*(Complex s) const;

    friend bool operator==(const ExpSum2D&, const ExpSum2D&) = default;

private:
    std::vector<ExpTerm> terms_;
};

Complex eval2d(const ExpSum2D& f, double x, double y);
double band_radius(const ExpSum2D& f);
/// Partial derivatives of f at (x, y).
Complex partial_x(const ExpSum2D& f, double x, double y);
Complex partial_y(const ExpSum2D& f, double x, double y);

/// Threshold below which divided differences switch to the derivative.
double divided_difference_threshold(double u1, double u2);

/// (f(x1,y) - f(x2,y)) / (x1 - x2), or d/dx f(x1, y) when x1 and x2 are
/// closer than `divided_difference_threshold`.
Complex divided_diff_1(const ExpSum2D& f, double x1, double x2, double y);
/// (f(x,y1) - f(x,y2)) / (y1 - y2), or d/dy f(x, y1) near the diagonal.
Complex divided_diff_2(const ExpSum2D& f, double x, double y1, double y2);

// ---------------------------------------------------------------------------
// One-variable atoms and their products.

struct ExpAtom {
    double omega = 0.0;  ///< x -> e^{i omega x}, omega >= 0
    friend bool operator==(const ExpAtom&, const ExpAtom&) = default;
};

struct CardinalAtom {
    std::int64_t j = 0;  ///< x -> (e^{isx} - 1) / (sx - 2 pi j)
    double s = 1.0;
    friend bool operator==(const CardinalAtom&, const CardinalAtom&) = default;
};

struct CayleyInvAtom {  ///< x -> (1 - ix)^{-1}
    friend bool operator==(const CayleyInvAtom&, const CayleyInvAtom&) = default;
};

struct ConstAtom {
    Complex c{1.0, 0.0};
    friend bool operator==(const ConstAtom&, const ConstAtom&) = default;
};

using OneVarAtom = std::variant<ExpAtom, CardinalAtom, CayleyInvAtom, ConstAtom>;

/// Radius of the Taylor branch in `cardinal_eval`.
inline constexpr double kCardinalTaylorRadius = 1e-4;

/// (e^{isz} - 1) / (sz - 2 pi j) for Im z >= 0, with the removable
/// singularity at z = 2 pi j / s handled by a degree-12 Taylor expansion.
Complex cardinal_eval(std::int64_t j, double s, Complex z);

/// (e^{iw} - 1) / w, analytic everywhere; value i at w = 0.
Complex phi_cardinal(Complex w);

Complex eval_atom(const OneVarAtom& atom, Complex z);
/// Sup of |atom| over the closed upper half-plane.
double atom_half_plane_bound(const OneVarAtom& atom);

/// Finite sum of scaled products of atoms, factors applied in written order.
class OneVarFunction {
public:
    struct Product {
        Complex scale{1.0, 0.0};
        std::vector<OneVarAtom> factors;
    };

    OneVarFunction() = default;
    explicit OneVarFunction(std::vector<Product> products) : products_(std::move(products)) {}
    OneVarFunction(const OneVarAtom& atom) : products_{{Complex{1.0, 0.0}, {atom}}} {}  // NOLINT

    static OneVarFunction constant(Complex c) { return OneVarFunction(ConstAtom{c}); }
    static OneVarFunction zero() { return OneVarFunction(); }
    /// sum_m c_m e^{i omega_m x}.
    static OneVarFunction exp_sum(std::span<const std::pair<Complex, double>> terms);

    const std::vector<Product>& products() const noexcept { return products_; }
    bool is_zero() const noexcept { return products_.empty(); }

    Complex operator()(Complex z) const;

    OneVarFunction operator+(const OneVarFunction& other) const;
    OneVarFunction operator*(const OneVarFunction& other) const;
    OneVarFunction operator*(Complex s) const;

private:
    std::vector<Product> products_;
};

/// Partial sum over |n| <= N of the analytic sampling series
///   F(z) = sum_n F(2 pi n / s) (e^{isz} - 1) / (i (sz - 2 pi n)).
/// `samples[n + N]` holds F(2 pi n / s); `samples.size()` must be 2N + 1.
Complex cardinal_reconstruct_1d(std::span<const Complex> samples, double s, Complex z);

// ---------------------------------------------------------------------------
// Function spec files: {"terms":[{"re":..,"im":..,"a":..,"b":..}, ...]}

ExpSum2D exp_sum_from_json(const nlohmann::json& j);
nlohmann::json exp_sum_to_json(const ExpSum2D& f);
ExpSum2D load_function(const std::filesystem::path& path);

}  // namespace disscalc
