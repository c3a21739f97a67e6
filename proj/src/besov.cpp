#include "disscalc/besov.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "fft.hpp"

namespace disscalc {

double LPWindow::theta(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double g0 = std::exp(-1.0 / u);
    const double g1 = std::exp(-1.0 / (1.0 - u));
    return g0 / (g0 + g1);
}

double LPWindow::operator()(double t) const {
    if (!(t > 0.5) || !(t < 2.0)) return 0.0;
    if (t <= 1.0) return theta(std::log2(2.0 * t));
    return 1.0 - theta(std::log2(t));
}

LPWindow build_window() { return LPWindow{}; }

double sup_norm_coef(const ExpSum2D& f) { return f.coefficient_l1(); }

namespace {

// Length of the sampling box along one axis: one beat period of the two
// closest distinct frequencies, capped. Zero when |f| does not depend on the axis.
double box_length(std::vector<double> freqs) {
    std::sort(freqs.begin(), freqs.end());
    freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
    if (freqs.size() < 2) return 0.0;
    double min_gap = freqs.back() - freqs.front();
    for (std::size_t i = 1; i < freqs.size(); ++i) min_gap = std::min(min_gap, freqs[i] - freqs[i - 1]);
    return std::min(kTwoPi / min_gap, 64.0 * kTwoPi);
}

double grid_max(const ExpSum2D& f, int resolution, double lx, double ly) {
    const int rx = lx > 0.0 ? resolution : 1;
    const int ry = ly > 0.0 ? resolution : 1;
    const auto& terms = f.terms();
    // ex[m][i] = c_m e^{i a_m x_i}; ey[m][l] = e^{i b_m y_l}
    std::vector<std::vector<Complex>> ex(terms.size(), std::vector<Complex>(rx));
    std::vector<std::vector<Complex>> ey(terms.size(), std::vector<Complex>(ry));
    for (std::size_t m = 0; m < terms.size(); ++m) {
        for (int i = 0; i < rx; ++i) ex[m][i] = terms[m].c * std::exp(kI * terms[m].a * (lx * i / rx));
        for (int l = 0; l < ry; ++l) ey[m][l] = std::exp(kI * terms[m].b * (ly * l / ry));
    }
    double best = 0.0;
    std::vector<Complex> row(rx);
    for (int l = 0; l < ry; ++l) {
        std::fill(row.begin(), row.end(), Complex{});
        for (std::size_t m = 0; m < terms.size(); ++m) {
            const Complex e = ey[m][l];
            for (int i = 0; i < rx; ++i) row[i] += ex[m][i] * e;
        }
        for (int i = 0; i < rx; ++i) best = std::max(best, std::abs(row[i]));
    }
    return best;
}

}  // namespace

double sup_norm_grid(const ExpSum2D& f, int max_resolution) {
    if (f.empty()) return 0.0;
    if (f.size() == 1) return std::abs(f.terms().front().c);
    std::vector<double> as, bs;
    for (const auto& t : f.terms()) {
        as.push_back(t.a);
        bs.push_back(t.b);
    }
    const double lx = box_length(as);
    const double ly = box_length(bs);
    int resolution = std::min(32, max_resolution);
    double previous = grid_max(f, resolution, lx, ly);
    while (resolution < max_resolution) {
        resolution = std::min(2 * resolution, max_resolution);
        const double current = grid_max(f, resolution, lx, ly);
        const bool converged = std::abs(current - previous) <= 0.01 * std::max(current, previous);
        previous = std::max(previous, current);
        if (converged) break;
    }
    return previous;
}

double sup_norm(const ExpSum2D& f, const SupMode& mode) {
    return mode.kind == SupMode::Kind::CoefSum ? sup_norm_coef(f) : sup_norm_grid(f, mode.max_resolution);
}

ExpSum2D lp_piece(const ExpSum2D& f, int n, const LPWindow& win) {
    return f.map_coefficients([&](double a, double b) { return Complex{win(std::ldexp(std::hypot(a, b), -n))}; });
}

double f0_multiplier(double r, const LPWindow& win) {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    // Only n = 1 meets (1, 2); the others vanish.
    return 1.0 - win(0.5 * r);
}

ExpSum2D f0_piece(const ExpSum2D& f, const LPWindow& win) {
    return f.map_coefficients([&](double a, double b) { return Complex{f0_multiplier(std::hypot(a, b), win)}; });
}

std::vector<int> active_piece_indices(const ExpSum2D& f) {
    const LPWindow win;
    std::set<int> indices;
    for (const auto& t : f.terms()) {
        const double r = std::hypot(t.a, t.b);
        if (r == 0.0) continue;
        const int centre = static_cast<int>(std::floor(std::log2(r)));
        for (int n = centre - 1; n <= centre + 2; ++n) {
            if (win(std::ldexp(r, -n)) > 0.0) indices.insert(n);
        }
    }
    return {indices.begin(), indices.end()};
}

namespace {

PieceNorm measure(int n, const ExpSum2D& piece, const SupMode& mode) {
    PieceNorm norm{n, sup_norm_coef(piece), std::nullopt};
    if (mode.kind == SupMode::Kind::Grid) norm.sup_grid = sup_norm_grid(piece, mode.max_resolution);
    return norm;
}

double selected(const PieceNorm& norm, const SupMode& mode) {
    return mode.kind == SupMode::Kind::Grid ? *norm.sup_grid : norm.sup_coef;
}

bool has_constant_term(const ExpSum2D& f) {
    return std::any_of(f.terms().begin(), f.terms().end(),
                       [](const ExpTerm& t) { return t.a == 0.0 && t.b == 0.0; });
}

}  // namespace

BesovDecomposition decompose(const ExpSum2D& f, const LPWindow& win, const SupMode& mode) {
    BesovDecomposition out;
    out.f0 = f0_piece(f, win);
    out.f0_norm = measure(0, out.f0, mode);
    out.norm_inhomogeneous = selected(out.f0_norm, mode);

    double homogeneous = 0.0;
    for (int n : active_piece_indices(f)) {
        ExpSum2D piece = lp_piece(f, n, win);
        if (piece.empty()) continue;
        const PieceNorm norm = measure(n, piece, mode);
        const double weighted = std::ldexp(selected(norm, mode), n);
        homogeneous += weighted;
        if (n >= 1) out.norm_inhomogeneous += weighted;
        out.piece_norms.push_back(norm);
        out.pieces.emplace(n, std::move(piece));
    }
    if (!has_constant_term(f)) out.norm_homogeneous = homogeneous;
    return out;
}

double besov_norm_inhomogeneous(const ExpSum2D& f, const LPWindow& win, const SupMode& mode) {
    return decompose(f, win, mode).norm_inhomogeneous;
}

double besov_norm_homogeneous(const ExpSum2D& f, const LPWindow& win, const SupMode& mode) {
    if (has_constant_term(f)) {
        throw Error(ErrorKind::ConstantTermPresent,
                    "homogeneous Besov norm: function has a nonzero constant term; strip it first");
    }
    return *decompose(f, win, mode).norm_homogeneous;
}

bool analytic_check(const ExpSum2D& f) { return f.is_analytic(); }

// ---------------------------------------------------------------------------

SampledFunction2D::SampledFunction2D(double x0, double y0, double spacing, int nx, int ny,
                                     std::vector<Complex> values)
    : x0_(x0), y0_(y0), spacing_(spacing), nx_(nx), ny_(ny), values_(std::move(values)) {
    if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidInput, "sampled function: spacing must be positive");
    if (nx <= 0 || ny <= 0 || !std::has_single_bit(static_cast<unsigned>(nx)) ||
        !std::has_single_bit(static_cast<unsigned>(ny))) {
        throw Error(ErrorKind::InvalidInput, "sampled function: extents must be powers of two");
    }
    if (values_.size() != static_cast<std::size_t>(nx) * ny) {
        throw Error(ErrorKind::DimensionMismatch, "sampled function: value count does not match extents");
    }
}

SampledFunction2D SampledFunction2D::sample(const ExpSum2D& f, double x0, double y0, double spacing, int nx,
                                            int ny) {
    std::vector<Complex> values(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            values[static_cast<std::size_t>(iy) * nx + ix] = eval2d(f, x0 + ix * spacing, y0 + iy * spacing);
        }
    }
    return {x0, y0, spacing, nx, ny, std::move(values)};
}

double SampledFunction2D::nyquist() const noexcept { return kPi / spacing_; }

namespace {

double angular_frequency(int k, int n, double spacing) {
    const int signed_k = k < n / 2 ? k : k - n;
    return kTwoPi * signed_k / (n * spacing);
}

}  // namespace

SampledFunction2D lp_piece_fft(const SampledFunction2D& f, int n, const LPWindow& win) {
    if (f.nyquist() < std::ldexp(1.0, n + 1)) {
        throw Error(ErrorKind::NyquistViolation, "lp_piece_fft: window n=" + std::to_string(n) +
                                                     " exceeds grid Nyquist frequency " +
                                                     std::to_string(f.nyquist()));
    }
    const int nx = f.nx();
    const int ny = f.ny();
    const std::size_t total = static_cast<std::size_t>(nx) * ny;
    detail::FftwBuffer buffer(total);
    const auto forward = detail::FftwPlan::dft_2d(buffer, ny, nx, FFTW_FORWARD);
    const auto backward = detail::FftwPlan::dft_2d(buffer, ny, nx, FFTW_BACKWARD);
    for (std::size_t i = 0; i < total; ++i) buffer.set(i, f.values()[i]);
    forward.execute();
    const double scale = std::ldexp(1.0, -n);
    for (int ky = 0; ky < ny; ++ky) {
        const double ty = angular_frequency(ky, ny, f.spacing());
        for (int kx = 0; kx < nx; ++kx) {
            const double tx = angular_frequency(kx, nx, f.spacing());
            const double m = win(std::hypot(tx, ty) * scale) / static_cast<double>(total);
            const std::size_t i = static_cast<std::size_t>(ky) * nx + kx;
            buffer.set(i, buffer.get(i) * m);
        }
    }
    backward.execute();
    std::vector<Complex> values(total);
    for (std::size_t i = 0; i < total; ++i) values[i] = buffer.get(i);
    return {f.x0(), f.y0(), f.spacing(), nx, ny, std::move(values)};
}

SampledDecomposition decompose_sampled(const SampledFunction2D& f, int n_min, const LPWindow& win) {
    SampledDecomposition out;
    out.n_min = n_min;
    out.n_max = static_cast<int>(std::floor(std::log2(f.nyquist()))) - 1;
    out.first_omitted = out.n_max + 1;
    for (int n = n_min; n <= out.n_max; ++n) out.pieces.emplace(n, lp_piece_fft(f, n, win));
    return out;
}

}  // namespace disscalc
