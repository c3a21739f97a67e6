// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance [--threads K] [--only 1,7,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "disscalc/besov.hpp"
#include "disscalc/funcalc.hpp"
#include "disscalc/harness.hpp"
#include "disscalc/matrix_core.hpp"
#include "disscalc/opint.hpp"
#include "disscalc/perturbation.hpp"
#include "disscalc/prng.hpp"
#include "disscalc/scalar_functions.hpp"
#include "../unit/triple_oracle.hpp"

using namespace disscalc;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;  ///< runtime limit; 0 = none stated
    std::function<Outcome()> body;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

int g_threads = 1;

// ---------------------------------------------------------------------------

Outcome window_partition() {
    const auto w = build_window();
    double worst = 0.0;
    const int count = 10000;
    for (int i = 0; i < count; ++i) {
        const double t = std::exp2(-10.0 + 20.0 * i / (count - 1));
        double sum = 0.0;
        for (int n = -20; n <= 20; ++n) sum += w(t / std::exp2(n));
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return {worst <= 1e-12, "max deviation " + fmt(worst)};
}

Outcome cardinal_l2() {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = -10.0 + 20.0 * i / 99.0;
        double sum = 0.0;
        for (std::int64_t j = -10000; j <= 10000; ++j) sum += std::norm(cardinal_eval(j, 1.0, x));
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return {worst <= 1e-3, "max |sum - 1| " + fmt(worst)};
}

double sampling_error(std::int64_t n) {
    std::vector<Complex> samples(static_cast<std::size_t>(2 * n + 1));
    for (std::int64_t k = -n; k <= n; ++k) samples[k + n] = std::exp(kI * 0.5 * kTwoPi * static_cast<double>(k));
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double z = -10.0 + 20.0 * i / 49.0;
        worst = std::max(worst, std::abs(cardinal_reconstruct_1d(samples, 1.0, z) - std::exp(0.5 * kI * z)));
    }
    return worst;
}

Outcome sampling_1d() {
    const double e1024 = sampling_error(1024);
    const double e4096 = sampling_error(4096);
    return {e4096 <= 5e-3 && e4096 <= e1024 / 2.0, "err(1024) " + fmt(e1024) + ", err(4096) " + fmt(e4096)};
}

Outcome contractive() {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 500; ++t) {
        const auto n = 1 + static_cast<Eigen::Index>(t % 8);
        const auto l = random_dissipative(n, 1000 + t, 0.5 + static_cast<double>(t % 7));
        const MatrixCalculus calc(l.matrix());
        for (double omega : {0.0, 0.5, 1.0, 5.0, 10.0}) worst = std::max(worst, operator_norm(calc.exp_i(omega)));
    }
    return {worst <= 1.0 + 1e-10, "max norm " + fmt(worst)};
}

Outcome sharp_consistency() {
    const auto fs = standard_functions();
    double worst_rel = 0.0, worst_remark = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto& f = fs[t % fs.size()];
        const auto n = 2 + static_cast<Eigen::Index>(t % 5);
        const auto l = random_dissipative(n, 2000 + t, 1.0, 0);
        const auto m = random_dissipative(n, 2000 + t, 1.0, 1);
        const auto m0 = random_dissipative(n, 2000 + t, 1.0, 2);
        const Matrix id = Matrix::Identity(n, n);
        const Matrix fv = apply_pair(f, l, m);
        const Matrix back = apply_pair_sharp(f, l, m) * (id - kI * m.matrix());
        worst_rel = std::max(worst_rel, operator_norm(back - fv) / operator_norm(fv));
        worst_remark = std::max(worst_remark, sharp_remark_identity(f, l, m, m0));
    }
    return {worst_rel <= 1e-10 && worst_remark <= 1e-9,
            "relative " + fmt(worst_rel) + ", remark residual " + fmt(worst_remark)};
}

Outcome regularization() {
    double worst = 0.0;  // max of err(eps) / (C eps)
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto n = 2 + static_cast<Eigen::Index>(t % 5);
        const auto pts = regularization_convergence(random_dissipative(n, 3000 + t, 1.0, 0),
                                                    random_dissipative(n, 3000 + t, 1.0, 1), {1e-1, 1e-2, 1e-3, 1e-4});
        const double c = 2.0 * pts[0].err / pts[0].eps;
        for (std::size_t i = 1; i < pts.size(); ++i) worst = std::max(worst, pts[i].err / (c * pts[i].eps));
    }
    return {worst <= 1.0, "max err / (C eps) " + fmt(worst)};
}

// Identity sweeps are shared by criteria 7, 8 and 10.
struct Sweep {
    std::vector<json> records;
    double seconds = 0.0;
};

Sweep& identity_sweep(const std::string& variant) {
    static std::map<std::string, Sweep> cache;
    auto it = cache.find(variant);
    if (it != cache.end()) return it->second;
    auto config = default_config("identity-check");
    config.variant = variant;
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    auto result = run(config, g_threads);
    Sweep sweep{std::move(result.records),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    return cache.emplace(variant, std::move(sweep)).first->second;
}

// Residual schedule; returns failures and fills the worst final/perturbation ratio.
int schedule_failures(const Sweep& sweep, double& worst_final, double& worst_halving) {
    int failures = 0;
    for (const auto& rec : sweep.records) {
        std::vector<double> r;
        for (const auto& row : rec["truncations"]) r.push_back(row["residual_s2"].get<double>());
        bool ok = r.size() == 4;
        for (std::size_t i = 1; i < r.size(); ++i) ok = ok && r[i] <= r[i - 1];
        const double tol = std::max(5e-2 * rec["perturbation_s2"].get<double>(), 1e-8);
        ok = ok && r.back() <= tol && r.back() <= r.front() / 2.0;
        worst_final = std::max(worst_final, r.back() / tol);
        worst_halving = std::max(worst_halving, r.back() / r.front());
        failures += ok ? 0 : 1;
    }
    return failures;
}

Outcome identities_first_second() {
    double worst_final = 0.0, worst_halving = 0.0, seconds = 0.0;
    int failures = 0;
    std::size_t trials = 0;
    for (const char* v : {"first", "second"}) {
        const auto& sweep = identity_sweep(v);
        failures += schedule_failures(sweep, worst_final, worst_halving);
        trials += sweep.records.size();
        seconds += sweep.seconds;
    }
    return {failures == 0 && seconds < 600.0,
            std::to_string(trials) + " trials, " + std::to_string(failures) + " failing; max r(2048)/tol " +
                fmt(worst_final) + ", max r(2048)/r(256) " + fmt(worst_halving) + ", sweep " + fmt(seconds) + " s"};
}

Outcome identities_full() {
    double worst_final = 0.0, worst_halving = 0.0, worst_add = 0.0;
    int failures = 0;
    for (const char* v : {"ab12", "ba21"}) {
        const auto& sweep = identity_sweep(v);
        failures += schedule_failures(sweep, worst_final, worst_halving);
        for (const auto& rec : sweep.records) {
            for (const auto& row : rec["truncations"]) worst_add = std::max(worst_add, row["additivity"].get<double>());
        }
    }
    return {failures == 0 && worst_add <= 1e-12,
            std::to_string(failures) + " failing trials; max additivity " + fmt(worst_add) + ", max r(2048)/tol " +
                fmt(worst_final)};
}

Outcome triple_oracle() {
    using namespace disscalc::oracle;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const std::int64_t n = 2;
        const auto p = random_plain(7000 + seed, n, seed % 2 == 0);
        PhiloxStream rng(7000 + seed, 99);
        const Matrix a = real_diag(rng, 5), b = real_diag(rng, 5), c = real_diag(rng, 5);
        const Matrix t = gaussian(rng, 5, 5), r = gaussian(rng, 5, 5);
        const auto fam = p.to_family();
        const auto l1 = as_list(n, p.list1), l2 = as_list(n, p.list2);
        auto err = [](const Matrix& x, const Matrix& y) { return (x - y).cwiseAbs().maxCoeff(); };
        worst = std::max(worst, err(evaluate_triple_h({l1, fam, l2}, a, t, b, r, c),
                                    brute_force([&](double x, double y, double z) { return p.psi_h(x, y, z); }, a, t, b, r, c)));
        worst = std::max(worst, err(evaluate_triple_like1({l1, l2, fam}, a, t, b, r, c),
                                    brute_force([&](double x, double y, double z) { return p.psi_like1(x, y, z); }, a, t, b, r, c)));
        worst = std::max(worst, err(evaluate_triple_like2({fam, l1, l2}, a, t, b, r, c),
                                    brute_force([&](double x, double y, double z) { return p.psi_like2(x, y, z); }, a, t, b, r, c)));
    }
    // Trace duality on 3 x 3 inputs.
    const auto p = random_plain(7777, 2, true);
    const HaagerupLikeRep1 rep{as_list(2, p.list1), as_list(2, p.list2), p.to_family()};
    const auto a = random_dissipative(3, 7100, 1.0, 0);
    const auto b = random_dissipative(3, 7100, 1.0, 1);
    const auto c = random_dissipative(3, 7100, 1.0, 2);
    PhiloxStream rng(7100, 3);
    const Matrix t = disscalc::oracle::gaussian(rng, 3, 3), r = disscalc::oracle::gaussian(rng, 3, 3);
    const Matrix w = evaluate_triple_like1(rep, a, t, b, r, c);
    double duality = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Matrix q = disscalc::oracle::gaussian(rng, 3, 3);
        duality = std::max(duality, std::abs((w * q).trace() - like1_functional(rep, a, t, b, r, c, q)));
    }
    return {worst <= 1e-10 && duality <= 1e-10, "oracle " + fmt(worst) + ", trace duality " + fmt(duality)};
}

Outcome certificates() {
    double worst = 0.0;
    std::size_t checked = 0;
    for (const char* v : {"first", "second"}) {
        for (const auto& rec : identity_sweep(v).records) {
            for (const auto& row : rec["truncations"]) {
                for (const auto& [name, value] : row["certificates"].items()) {
                    worst = std::max(worst, value.get<double>());
                    ++checked;
                }
            }
        }
    }
    return {checked > 0 && worst <= 1.05, std::to_string(checked) + " inequalities, max lhs/bound " + fmt(worst)};
}

Outcome lipschitz() {
    const auto config = default_config("lipschitz-sweep");
    const auto result = run(config, g_threads);
    double max_ratio = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool finite = true;
    for (const auto& rec : result.records) {
        for (const auto& e : rec["results"]) {
            if (!e.contains("ratio") || !std::isfinite(e["ratio"].get<double>())) {
                finite = false;
                continue;
            }
            max_ratio = std::max(max_ratio, e["ratio"].get<double>());
            if (e.contains("halving")) {
                lo = std::min(lo, e["halving"].get<double>());
                hi = std::max(hi, e["halving"].get<double>());
            }
        }
    }
    const bool ok = result.records.size() == 100 && finite && max_ratio <= 100.0 && lo >= 0.35 && hi <= 0.75;
    return {ok, std::to_string(result.records.size()) + " trials; max ratio " + fmt(max_ratio) + ", halving in [" +
                    fmt(lo) + ", " + fmt(hi) + "]"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--threads" && i + 1 < argc) {
            g_threads = std::max(1, std::atoi(argv[++i]));
        } else if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: acceptance [--threads K] [--only 1,2,...]\n";
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "window partition of unity", 1.0, window_partition},
        {2, "cardinal l2 identity", 1.0, cardinal_l2},
        {3, "1-D sampling reconstruction", 5.0, sampling_1d},
        {4, "contractive calculus", 10.0, contractive},
        {5, "sharp calculus consistency", 10.0, sharp_consistency},
        {6, "regularization linear decay", 5.0, regularization},
        {7, "first/second identity residual schedule", 0.0, identities_first_second},
        {8, "full identities: additivity and schedule", 0.0, identities_full},
        {9, "triple-integral oracle and trace duality", 30.0, triple_oracle},
        {10, "Schatten bound certificates", 0.0, certificates},
        {11, "Lipschitz sweep", 300.0, lipschitz},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && secs > c.budget_s) {
            out.pass = false;
            out.detail += "; over the " + fmt(c.budget_s) + " s budget";
        }
        failed += out.pass ? 0 : 1;
        std::cout << "criterion " << c.id << " [" << (out.pass ? "PASS" : "FAIL") << "] " << c.name << ": "
                  << out.detail << " (" << fmt(secs) << " s)" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
