#include <cmath>
#include <vector>

#include "disscalc/besov.hpp"
#include "disscalc/prng.hpp"
#include "support.hpp"

using namespace disscalc;
using disscalc::test::check_close;

namespace {

// Independent window: the exp(-1/u) smoothstep written out directly.
double oracle_window(double t) {
    auto g = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    auto theta = [&](double u) {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        return g(u) / (g(u) + g(1.0 - u));
    };
    if (t <= 0.5 || t >= 2.0) return 0.0;
    if (t <= 1.0) return theta(std::log2(2.0 * t));
    return 1.0 - theta(std::log2(t));
}

ExpSum2D random_sum(std::uint64_t seed, int terms, double max_freq) {
    PhiloxStream rng(seed, 0);
    std::vector<ExpTerm> out;
    for (int m = 0; m < terms; ++m) {
        out.push_back({rng.complex_normal(), rng.uniform(0.0, max_freq), rng.uniform(0.0, max_freq)});
    }
    return ExpSum2D(std::move(out));
}

double coef_distance(const ExpSum2D& f, const ExpSum2D& g) {
    double worst = 0.0;
    const ExpSum2D diff = f - g;
    for (const auto& t : diff.terms()) worst = std::max(worst, std::abs(t.c));
    return worst;
}

}  // namespace

TEST_CASE("window values") {
    const auto w = build_window();
    CHECK(w(1.0) == 1.0);
    CHECK(w(0.5) == 0.0);
    CHECK(w(2.0) == 0.0);
    CHECK(w(0.1) == 0.0);
    CHECK(w(7.0) == 0.0);
    CHECK(std::abs(w(std::sqrt(2.0)) + w(std::sqrt(2.0) / 2.0) - 1.0) <= 1e-15);
    for (double t = 0.3; t < 2.5; t += 0.01) CHECK(std::abs(w(t) - oracle_window(t)) <= 1e-15);
    CHECK(w.id() == LPWindow::kId);
}

TEST_CASE("window functional equation and partition of unity") {
    const auto w = build_window();
    for (double t = 1.0; t <= 2.0; t += 1.0 / 512.0) CHECK(std::abs(w(t) - (1.0 - w(t / 2.0))) <= 1e-12);
    double worst = 0.0;
    const int count = 10000;
    for (int i = 0; i < count; ++i) {
        const double t = std::exp2(-10.0 + 20.0 * i / (count - 1));
        double sum = 0.0;
        int nonzero = 0;
        for (int n = -20; n <= 20; ++n) {
            const double v = w(t / std::exp2(n));
            sum += v;
            nonzero += v != 0.0;
        }
        CHECK(nonzero <= 2);
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("exact pieces") {
    const auto w = build_window();
    const auto p = lp_piece(ExpSum2D::exponential(1.0, 3.0, 4.0), 2, w);
    REQUIRE(p.size() == 1);
    CHECK(std::abs(p.terms()[0].c - oracle_window(1.25)) <= 1e-15);
    CHECK(lp_piece(ExpSum2D::constant(1.0), 1, w).empty());
    CHECK(lp_piece(ExpSum2D::exponential(1.0, 2.0, 0.0), 1, w) == ExpSum2D::exponential(1.0, 2.0, 0.0));

    CHECK(f0_piece(ExpSum2D::exponential(1.0, 0.3, 0.4), w) == ExpSum2D::exponential(1.0, 0.3, 0.4));
    CHECK(f0_piece(ExpSum2D::exponential(1.0, 2.0, 0.0), w).empty());
    const auto f0 = f0_piece(ExpSum2D::exponential(1.0, 1.2, 0.9), w);
    REQUIRE(f0.size() == 1);
    // 1 - sum_{n>=1} w(1.5 / 2^n) = 1 - w(0.75), which is w(1.5) by the functional equation.
    CHECK(std::abs(f0.terms()[0].c - (1.0 - oracle_window(0.75))) <= 1e-15);
    CHECK(std::abs(f0.terms()[0].c - oracle_window(1.5)) <= 1e-15);
}

TEST_CASE("inhomogeneous norm examples") {
    const auto w = build_window();
    for (const auto& mode : {SupMode::coef_sum(), SupMode::grid(512)}) {
        CHECK(std::abs(besov_norm_inhomogeneous(ExpSum2D::exponential(1.0, 0.3, 0.4), w, mode) - 1.0) <= 1e-9);
        CHECK(std::abs(besov_norm_inhomogeneous(ExpSum2D::exponential(1.0, 2.0, 0.0), w, mode) - 2.0) <= 1e-9);
        CHECK(besov_norm_inhomogeneous(ExpSum2D{}, w, mode) == 0.0);
    }
}

TEST_CASE("homogeneous norm examples") {
    const auto w = build_window();
    const auto mode = SupMode::coef_sum();
    CHECK(std::abs(besov_norm_homogeneous(ExpSum2D::exponential(1.0, 1.0, 0.0), w, mode) - 1.0) <= 1e-15);
    CHECK(std::abs(besov_norm_homogeneous(ExpSum2D::exponential(1.0, 2.0, 0.0), w, mode) - 2.0) <= 1e-15);
    CHECK(std::abs(besov_norm_homogeneous(ExpSum2D::exponential(3.0, 0.6, 0.8), w, mode) - 3.0) <= 1e-14);
    disscalc::test::check_throws_kind(
        [&] { besov_norm_homogeneous(ExpSum2D({{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}), w, mode); },
        ErrorKind::ConstantTermPresent);
    const auto d = decompose(ExpSum2D({{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}), w, mode);
    CHECK_FALSE(d.norm_homogeneous.has_value());
}

TEST_CASE("analytic class membership") {
    CHECK(analytic_check(ExpSum2D::exponential(1.0, 1.0, 1.0)));
    CHECK_FALSE(analytic_check(ExpSum2D::exponential(1.0, -1.0, 0.0)));
    CHECK(analytic_check(ExpSum2D{}));
}

TEST_CASE("decomposition reconstructs random sums") {
    const auto w = build_window();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto f = random_sum(seed, 6, 9.0);
        const auto d = decompose(f, w, SupMode::coef_sum());
        ExpSum2D sum = d.f0;
        for (const auto& [n, piece] : d.pieces) {
            if (n >= 1) sum = sum + piece;
        }
        CHECK(coef_distance(sum, f) <= 1e-12);
        double norm = d.f0_norm.sup_coef;
        for (const auto& pn : d.piece_norms) {
            if (pn.n >= 1) norm += std::exp2(pn.n) * pn.sup_coef;
        }
        CHECK(std::abs(norm - d.norm_inhomogeneous) <= 1e-12 * norm);
    }
}

TEST_CASE("sup-norm bracket and triangle inequality") {
    const auto w = build_window();
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        const auto f = random_sum(seed, 3, 3.0);
        const auto g = random_sum(seed + 100, 2, 3.0);
        CHECK(sup_norm_grid(f, 512) <= sup_norm_coef(f) + 1e-12);
        const auto mode = SupMode::coef_sum();
        CHECK(besov_norm_inhomogeneous(f + g, w, mode) <=
              besov_norm_inhomogeneous(f, w, mode) + besov_norm_inhomogeneous(g, w, mode) + 1e-12);
    }
    const auto single = ExpSum2D::exponential({0.6, -0.8}, 0.7, 1.3);
    CHECK(std::abs(sup_norm_grid(single, 256) - sup_norm_coef(single)) <= 1e-9);
}

TEST_CASE("FFT pieces agree with exact pieces") {
    const auto w = build_window();
    // Grid of 64 x 64 with spacing 2 pi / 64: integer frequencies are periodic.
    const double h = kTwoPi / 64.0;
    const auto f = ExpSum2D({{1.0, 3.0, 4.0}, {{0.5, 0.5}, 1.0, 2.0}, {0.25, 6.0, 0.0}});
    const auto sampled = SampledFunction2D::sample(f, 0.0, 0.0, h, 64, 64);
    for (int n : {0, 1, 2, 3}) {
        const auto piece = lp_piece_fft(sampled, n, w);
        const auto exact = SampledFunction2D::sample(lp_piece(f, n, w), 0.0, 0.0, h, 64, 64);
        double err = 0.0;
        for (std::size_t i = 0; i < piece.values().size(); ++i) {
            err = std::max(err, std::abs(piece.values()[i] - exact.values()[i]));
        }
        INFO("n = " << n);
        CHECK(err <= 1e-6);
    }
    const auto constant = SampledFunction2D::sample(ExpSum2D::constant(2.0), 0.0, 0.0, h, 64, 64);
    const auto flat = lp_piece_fft(constant, 1, w);
    for (const auto& v : flat.values()) CHECK(std::abs(v) <= 1e-12);
    const auto zero = SampledFunction2D::sample(ExpSum2D{}, 0.0, 0.0, h, 64, 64);
    const auto empty = lp_piece_fft(zero, 2, w);
    for (const auto& v : empty.values()) CHECK(v == Complex{0.0, 0.0});
    disscalc::test::check_throws_kind([&] { lp_piece_fft(sampled, 5, w); }, ErrorKind::NyquistViolation);
}

TEST_CASE("sampled grids must have power-of-two extents") {
    CHECK_THROWS_AS(SampledFunction2D(0.0, 0.0, 0.1, 6, 8, std::vector<Complex>(48)), Error);
}
