#pragma once

// Littlewood-Paley decomposition of exponential sums and the B^1_{inf,1}
// Besov norms built from it.

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "disscalc/scalar_functions.hpp"

namespace disscalc {

/// Dyadic window w with w = 0 outside (1/2, 2), w(t) = 1 - w(t/2) on [1, 2],
/// hence sum_n w(t / 2^n) = 1 for every t > 0.
///
/// Built from the smoothstep theta(u) = g(u) / (g(u) + g(1-u)),
/// g(u) = exp(-1/u) for u > 0 and 0 otherwise.
class LPWindow {
public:
    static constexpr std::string_view kId = "lp-window/exp-inv-smoothstep/v1";

    static double theta(double u);
    double operator()(double t) const;
    std::string_view id() const noexcept { return kId; }
};

LPWindow build_window();

/// How sup norms of exponential sums are measured.
struct SupMode {
    enum class Kind { CoefSum, Grid };
    Kind kind = Kind::CoefSum;
    int max_resolution = 4096;  ///< grid mode: stop refining at this R (R x R points)

    static SupMode coef_sum() { return {}; }
    static SupMode grid(int max_resolution = 4096) { return {Kind::Grid, max_resolution}; }
};

/// Sum of |c_m|. Upper bound for the sup norm; exact for a single term.
double sup_norm_coef(const ExpSum2D& f);
/// Max of |f| over a refined R x R grid; a lower bound for the sup norm.
double sup_norm_grid(const ExpSum2D& f, int max_resolution = 4096);
double sup_norm(const ExpSum2D& f, const SupMode& mode);

ExpSum2D lp_piece(const ExpSum2D& f, int n, const LPWindow& win);
ExpSum2D f0_piece(const ExpSum2D& f, const LPWindow& win);
/// Spectral multiplier of f0_piece at frequency radius r.
double f0_multiplier(double r, const LPWindow& win);

/// Dyadic indices n whose window can touch a frequency of f.
std::vector<int> active_piece_indices(const ExpSum2D& f);

struct PieceNorm {
    int n = 0;
    double sup_coef = 0.0;
    std::optional<double> sup_grid;
};

struct BesovDecomposition {
    ExpSum2D f0;
    PieceNorm f0_norm;
    /// Nonzero pieces f_n for every n in Z; the inhomogeneous norm uses n >= 1.
    std::map<int, ExpSum2D> pieces;
    std::vector<PieceNorm> piece_norms;  ///< one entry per element of `pieces`, same order
    double norm_inhomogeneous = 0.0;  ///< in the requested mode
    std::optional<double> norm_homogeneous;  ///< empty when f has a constant term
};

BesovDecomposition decompose(const ExpSum2D& f, const LPWindow& win, const SupMode& mode);

/// ||f0||_inf + sum_{n>=1} 2^n ||f_n||_inf.
double besov_norm_inhomogeneous(const ExpSum2D& f, const LPWindow& win, const SupMode& mode);
/// sum_{n in Z} 2^n ||f_n||_inf. Throws ConstantTermPresent if f has a
/// nonzero constant term.
double besov_norm_homogeneous(const ExpSum2D& f, const LPWindow& win, const SupMode& mode);

bool analytic_check(const ExpSum2D& f);

/// Samples on a uniform grid: value(ix, iy) = f(x0 + ix*h, y0 + iy*h).
/// Both extents must be powers of two.
class SampledFunction2D {
public:
    SampledFunction2D(double x0, double y0, double spacing, int nx, int ny, std::vector<Complex> values);

    static SampledFunction2D sample(const ExpSum2D& f, double x0, double y0, double spacing, int nx, int ny);

    double x0() const noexcept { return x0_; }
    double y0() const noexcept { return y0_; }
    double spacing() const noexcept { return spacing_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    /// Largest representable angular frequency per axis, pi / h.
    double nyquist() const noexcept;

    Complex operator()(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * nx_ + ix]; }
    const std::vector<Complex>& values() const noexcept { return values_; }

private:
    double x0_, y0_, spacing_;
    int nx_, ny_;
    std::vector<Complex> values_;
};

/// f_n computed by FFT: forward transform with kernel e^{-i(x,t)}, multiply
/// by w(|t| / 2^n), inverse transform. Throws NyquistViolation if
/// 2^{n+1} exceeds the grid Nyquist frequency.
SampledFunction2D lp_piece_fft(const SampledFunction2D& f, int n, const LPWindow& win);

struct SampledDecomposition {
    std::map<int, SampledFunction2D> pieces;  ///< n in [n_min, n_max]
    int n_min = 0;
    int n_max = 0;
    /// Windows with n > n_max are not representable on the grid and are skipped.
    int first_omitted = 0;
};

SampledDecomposition decompose_sampled(const SampledFunction2D& f, int n_min, const LPWindow& win);

}  // namespace disscalc
