#include "disscalc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "disscalc/funcalc.hpp"
#include "disscalc/matrix_core.hpp"
#include "disscalc/opint.hpp"
#include "disscalc/perturbation.hpp"
#include "disscalc/prng.hpp"

namespace disscalc {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::ConfigInvalid, "field '" + field + "': " + why);
}

json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

std::string p_label(double p) {
    if (std::isinf(p)) return "inf";
    std::ostringstream os;
    os << p;
    return os.str();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string iso_time(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

std::vector<ExpSum2D> standard_functions() {
    return {
        ExpSum2D({{Complex{1.0, 0.0}, 0.3, 0.4}}),
        ExpSum2D({{Complex{0.5, 0.2}, 0.6, 0.2}, {Complex{-0.3, 0.1}, 0.1, 0.8}, {Complex{0.2, 0.0}, 0.0, 0.3}}),
        ExpSum2D({{Complex{0.7, 0.0}, 0.9, 0.0},
                  {Complex{0.0, 0.4}, 0.5, 0.5},
                  {Complex{-0.25, 0.0}, 0.0, 0.95},
                  {Complex{0.1, 0.0}, 0.0, 0.0}}),
    };
}

// ---------------------------------------------------------------------------
// Configuration

json ExperimentConfig::to_json() const {
    json fs = json::array();
    for (const auto& f : functions) fs.push_back(exp_sum_to_json(f));
    json ps = json::array();
    for (double v : p) ps.push_back(p_to_json(v));
    return {
        {"experiment", experiment},
        {"variant", variant},
        {"seed", seed},
        {"dims", dims},
        {"p", ps},
        {"truncations", truncations},
        {"trials", trials},
        {"functions", fs},
        {"besov_mode", besov_mode.kind == SupMode::Kind::Grid ? "grid" : "coef_sum"},
        {"grid_resolution", besov_mode.max_resolution},
        {"eps", eps},
        {"k_emp", k_emp},
        {"scale", scale},
        {"perturbation", perturbation},
        {"ratio_ceiling", ratio_ceiling},
        {"same_pair", same_pair},
        {"flip_sign", flip_sign},
        {"output", output},
    };
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.functions = standard_functions();
    if (experiment == "cardinal-check") {
        c.truncations = {1024, 4096, 16384};
    } else if (experiment == "identity-check") {
        c.dims = {4};
        c.truncations = {256, 512, 1024, 2048};
        c.trials = 20;
    } else if (experiment == "regularization-check") {
        c.dims = {2, 3, 4, 5, 6};
        c.trials = 50;
        c.eps = {1e-1, 1e-2, 1e-3, 1e-4};
    } else if (experiment == "lipschitz-sweep") {
        c.dims = {2, 3, 4, 5, 6};
        c.trials = 100;
        c.p = {1.0, 2.0};
    } else if (experiment == "p-sweep") {
        c.dims = {2, 4, 8, 16, 32};
        c.trials = 10;
        c.p = {std::numeric_limits<double>::infinity()};
    } else if (experiment == "bound-check") {
        c.dims = {2, 3, 4, 5, 6};
        c.trials = 50;
        c.p = {1.0, 2.0};
    }
    return c;
}

void validate(const ExperimentConfig& c) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
        invalid("experiment", "unknown experiment '" + c.experiment + "'");
    }
    if (c.variant != "first" && c.variant != "second" && c.variant != "ab12" && c.variant != "ba21") {
        invalid("variant", "must be one of first, second, ab12, ba21");
    }
    if (c.seed == 0) invalid("seed", "must be positive");
    if (c.trials <= 0) invalid("trials", "must be positive");
    for (int d : c.dims) {
        if (d <= 0) invalid("dims", "dimensions must be positive");
    }
    for (double v : c.p) {
        if (!(v >= 1.0)) invalid("p", "Schatten exponents must be >= 1");
    }
    for (auto n : c.truncations) {
        if (n <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(n))) {
            invalid("truncations", std::to_string(n) + " is not a positive power of two");
        }
    }
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
        if (!(c.eps[i] > 0.0)) invalid("eps", "values must be positive");
        if (i > 0 && !(c.eps[i] < c.eps[i - 1])) invalid("eps", "values must be strictly decreasing");
    }
    for (std::size_t i = 0; i < c.functions.size(); ++i) {
        if (!c.functions[i].is_analytic()) invalid("functions[" + std::to_string(i) + "]", "negative frequency");
    }
    if (!(c.scale > 0.0)) invalid("scale", "must be positive");
    if (!(c.perturbation > 0.0 && c.perturbation <= 1.0)) invalid("perturbation", "must lie in (0, 1]");
    if (!(c.k_emp > 0.0)) invalid("k_emp", "must be positive");
    if (!(c.ratio_ceiling > 0.0)) invalid("ratio_ceiling", "must be positive");
    if (c.besov_mode.max_resolution <= 0) invalid("grid_resolution", "must be positive");

    const auto need = [&](bool present, const char* field) {
        if (!present) invalid(field, "must not be empty for " + c.experiment);
    };
    if (c.experiment == "cardinal-check") need(!c.truncations.empty(), "truncations");
    if (c.experiment == "identity-check") {
        need(!c.truncations.empty(), "truncations");
        need(!c.dims.empty(), "dims");
    }
    if (c.experiment == "regularization-check") {
        need(!c.eps.empty(), "eps");
        need(!c.dims.empty(), "dims");
    }
    if (c.experiment == "lipschitz-sweep" || c.experiment == "p-sweep" || c.experiment == "bound-check") {
        need(!c.p.empty(), "p");
        need(!c.dims.empty(), "dims");
    }
    if (c.experiment != "window-check" && c.experiment != "cardinal-check" && c.experiment != "regularization-check") {
        need(!c.functions.empty(), "functions");
    }
}

namespace {

template <class T>
T get_field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        invalid(key, "has the wrong type");
    }
}

ExpSum2D function_entry(const json& entry, const std::filesystem::path& base_dir, std::size_t index) {
    const std::string field = "functions[" + std::to_string(index) + "]";
    try {
        if (entry.is_string()) {
            std::filesystem::path path = entry.get<std::string>();
            if (path.is_relative()) path = base_dir / path;
            return load_function(path);
        }
        if (entry.is_object()) return exp_sum_from_json(entry);
    } catch (const Error& e) {
        invalid(field, e.what());
    }
    invalid(field, "must be a path or an inline {\"terms\": [...]} object");
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) invalid("<root>", "config must be a JSON object");
    if (!j.contains("experiment") || !j["experiment"].is_string()) invalid("experiment", "required string");
    const auto experiment = j["experiment"].get<std::string>();
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end()) {
        invalid("experiment", "unknown experiment '" + experiment + "'");
    }
    ExperimentConfig c = default_config(experiment);

    static const std::set<std::string> known{"experiment", "variant",      "seed",         "dims",
                                             "p",          "truncations",  "trials",       "functions",
                                             "function",   "besov_mode",   "grid_resolution", "eps",
                                             "k_emp",      "scale",        "perturbation", "ratio_ceiling",
                                             "same_pair",  "flip_sign",    "output"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) invalid(key, "unknown field");
    }

    if (j.contains("variant")) c.variant = get_field<std::string>(j, "variant");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() <= 0) invalid("seed", "must be a positive integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("trials")) {
        if (!j["trials"].is_number_integer()) invalid("trials", "must be an integer");
        c.trials = j["trials"].get<int>();
    }
    if (j.contains("dims")) c.dims = get_field<std::vector<int>>(j, "dims");
    if (j.contains("truncations")) c.truncations = get_field<std::vector<std::int64_t>>(j, "truncations");
    if (j.contains("p")) {
        if (!j["p"].is_array()) invalid("p", "must be an array");
        c.p.clear();
        for (const auto& v : j["p"]) {
            if (v.is_string() && (v == "inf" || v == "infinity")) {
                c.p.push_back(std::numeric_limits<double>::infinity());
            } else if (v.is_number()) {
                c.p.push_back(v.get<double>());
            } else {
                invalid("p", "entries must be numbers or \"inf\"");
            }
        }
    }
    if (j.contains("function") && j.contains("functions")) invalid("function", "give either function or functions");
    if (j.contains("function")) c.functions = {function_entry(j["function"], base_dir, 0)};
    if (j.contains("functions")) {
        if (!j["functions"].is_array()) invalid("functions", "must be an array");
        c.functions.clear();
        for (std::size_t i = 0; i < j["functions"].size(); ++i) {
            c.functions.push_back(function_entry(j["functions"][i], base_dir, i));
        }
    }
    if (j.contains("besov_mode")) {
        const auto mode = get_field<std::string>(j, "besov_mode");
        if (mode == "coef_sum") {
            c.besov_mode.kind = SupMode::Kind::CoefSum;
        } else if (mode == "grid") {
            c.besov_mode.kind = SupMode::Kind::Grid;
        } else {
            invalid("besov_mode", "must be coef_sum or grid");
        }
    }
    if (j.contains("grid_resolution")) c.besov_mode.max_resolution = get_field<int>(j, "grid_resolution");
    if (j.contains("eps")) c.eps = get_field<std::vector<double>>(j, "eps");
    if (j.contains("k_emp")) c.k_emp = get_field<double>(j, "k_emp");
    if (j.contains("scale")) c.scale = get_field<double>(j, "scale");
    if (j.contains("perturbation")) c.perturbation = get_field<double>(j, "perturbation");
    if (j.contains("ratio_ceiling")) c.ratio_ceiling = get_field<double>(j, "ratio_ceiling");
    if (j.contains("same_pair")) c.same_pair = get_field<bool>(j, "same_pair");
    if (j.contains("flip_sign")) c.flip_sign = get_field<bool>(j, "flip_sign");
    if (j.contains("output")) c.output = get_field<std::string>(j, "output");
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, path.parent_path());
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = config.to_json().dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::InvalidInput, "config_hash: SHA-256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < length; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return os.str();
}

// ---------------------------------------------------------------------------
// Trials

namespace {

struct TrialContext {
    const ExperimentConfig& config;
    std::size_t index;
    json record;
    json failures = json::array();
    json metrics = json::object();

    void fail(const std::string& what) { failures.push_back(what); }
    void metric(const std::string& name, double value) { metrics[name] = value; }

    DissipativeMatrix random(Eigen::Index n, std::uint32_t purpose) const {
        return random_dissipative(n, config.seed, config.scale, trial_stream(index, purpose));
    }
    PhiloxStream stream(std::uint32_t purpose) const { return {config.seed, trial_stream(index, purpose)}; }
};

constexpr std::uint32_t kPurposeScalar = 16;

int pick_dim(const ExperimentConfig& c, std::size_t t) { return c.dims[t % c.dims.size()]; }

void window_trial(TrialContext& ctx) {
    const LPWindow win;
    double partition = 0.0;
    constexpr int kPoints = 10000;
    for (int i = 0; i < kPoints; ++i) {
        const double t = std::exp2(-10.0 + 20.0 * i / (kPoints - 1));
        double sum = 0.0;
        for (int n = -20; n <= 20; ++n) sum += win(std::ldexp(t, -n));
        partition = std::max(partition, std::abs(sum - 1.0));
    }
    double functional = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double t = 1.0 + i / 1000.0;
        functional = std::max(functional, std::abs(win(t) - (1.0 - win(0.5 * t))));
    }
    ctx.record["window_id"] = std::string(LPWindow::kId);
    ctx.record["partition_max_dev"] = partition;
    ctx.record["functional_eq_max_dev"] = functional;
    ctx.metric("partition_max_dev", partition);
    ctx.metric("functional_eq_max_dev", functional);
    if (partition > 1e-12) ctx.fail("partition of unity deviation above 1e-12");
    if (functional > 1e-12) ctx.fail("w(t) = 1 - w(t/2) deviation above 1e-12");
}

double cardinal_l2_deviation(std::int64_t n) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = -10.0 + 20.0 * i / 99.0;
        double sum = 0.0;
        for (std::int64_t j = -n; j <= n; ++j) sum += std::norm(cardinal_eval(j, 1.0, Complex{x}));
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

template <class F>
double reconstruction_error(std::int64_t n, F&& target, double frequency) {
    std::vector<Complex> samples(static_cast<std::size_t>(2 * n + 1));
    for (std::int64_t k = -n; k <= n; ++k) samples[k + n] = std::exp(Complex{0.0, frequency * kTwoPi * k});
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Complex z{-10.0 + 20.0 * i / 49.0, 0.0};
        worst = std::max(worst, std::abs(cardinal_reconstruct_1d(samples, 1.0, z) - target(z)));
    }
    return worst;
}

void cardinal_trial(TrialContext& ctx) {
    json l2 = json::array(), rec = json::array(), edge = json::array();
    std::vector<double> errors;
    for (auto n : ctx.config.truncations) {
        const double dev = cardinal_l2_deviation(n);
        const double bound = 40.0 / (kPi * kPi * static_cast<double>(n));
        const double err = reconstruction_error(n, [](Complex z) { return std::exp(0.5 * kI * z); }, 0.5);
        errors.push_back(err);
        // Band edges: frequencies 0 and 1 reconstruct their average.
        const double edge_avg = reconstruction_error(
            n, [](Complex z) { return 0.5 * (std::exp(kI * z) + 1.0); }, 0.0);
        l2.push_back({{"N", n}, {"max_dev", dev}, {"bound", bound}});
        rec.push_back({{"N", n}, {"max_err", err}});
        edge.push_back({{"N", n}, {"const_vs_average_err", edge_avg}});
        ctx.metric("l2_dev_N" + std::to_string(n), dev);
        ctx.metric("recon_err_N" + std::to_string(n), err);
        if (dev > bound) ctx.fail("l2 row identity above 40/(pi^2 N) at N=" + std::to_string(n));
        if (n >= 4096 && err > 5e-3) ctx.fail("reconstruction error above 5e-3 at N=" + std::to_string(n));
    }
    for (std::size_t a = 0; a < errors.size(); ++a) {
        for (std::size_t b = 0; b < errors.size(); ++b) {
            if (ctx.config.truncations[b] >= 4 * ctx.config.truncations[a] && errors[b] > 0.5 * errors[a]) {
                ctx.fail("reconstruction error did not halve from N=" + std::to_string(ctx.config.truncations[a]) +
                         " to N=" + std::to_string(ctx.config.truncations[b]));
            }
        }
    }
    ctx.record["l2_identity"] = l2;
    ctx.record["reconstruction"] = rec;
    ctx.record["band_edge"] = edge;
}

}  // namespace

json besov_norm_record(const ExpSum2D& f, const SupMode& mode) {
    const auto d = decompose(f, build_window(), mode);
    json pieces = json::array();
    const auto piece_json = [&](const PieceNorm& p) {
        json e{{"n", p.n}, {"sup_norm_coef", p.sup_coef}};
        if (p.sup_grid) e["sup_norm_grid"] = *p.sup_grid;
        e["sup_norm"] = mode.kind == SupMode::Kind::Grid ? *p.sup_grid : p.sup_coef;
        return e;
    };
    json f0 = piece_json(d.f0_norm);
    f0.erase("n");
    for (const auto& p : d.piece_norms) pieces.push_back(piece_json(p));
    return {
        {"sigma", band_radius(f)},
        {"mode", mode.kind == SupMode::Kind::Grid ? "grid" : "coef_sum"},
        {"norm_inhomogeneous", d.norm_inhomogeneous},
        {"norm_homogeneous", d.norm_homogeneous ? json(*d.norm_homogeneous) : json(nullptr)},
        {"f0", f0},
        {"pieces", pieces},
        {"window_id", std::string(LPWindow::kId)},
    };
}

namespace {

void besov_trial(TrialContext& ctx) {
    const auto& f = ctx.config.functions[ctx.index];
    ctx.record["function_index"] = ctx.index;
    ctx.record["besov"] = besov_norm_record(f, ctx.config.besov_mode);
    ctx.metric("norm_inhomogeneous", ctx.record["besov"]["norm_inhomogeneous"].get<double>());
    if (ctx.config.besov_mode.kind == SupMode::Kind::Grid) {
        for (const auto& p : ctx.record["besov"]["pieces"]) {
            if (p["sup_norm_grid"].get<double>() > p["sup_norm_coef"].get<double>() * (1.0 + 1e-12)) {
                ctx.fail("grid sup exceeds coefficient sum at n=" + std::to_string(p["n"].get<int>()));
            }
        }
    }
}

// Representation norm bounds depend only on (f, N, kind); shared across trials.
double cached_bound(const ExpSum2D& f, std::int64_t n, bool flip, int kind) {
    static std::mutex mutex;
    static std::map<std::tuple<std::string, std::int64_t, bool, int>, double> cache;
    const auto key = std::make_tuple(exp_sum_to_json(f).dump(), n, flip, kind);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const DividedDifferenceOptions options{flip};
    const auto grid = rep_norm_grid(n, band_radius(f));
    double value = 0.0;
    switch (kind) {
        case 0: value = rep_norm_bound(build_dd1_rep(f, n, options), grid).value; break;
        case 1: value = rep_norm_bound(build_dd2_rep(f, n, options), grid).value; break;
        case 2: value = rep_norm_bound(rearrange_like1(build_dd1_rep(f, n, options)), grid).value; break;
        default: value = rep_norm_bound(rearrange_like2(build_dd2_rep(f, n, options)), grid).value; break;
    }
    std::lock_guard lock(mutex);
    cache.emplace(key, value);
    return value;
}

constexpr double kGridFactor = 1.05;

/// ||W||_Sp / (bound * ||T||_Sp * ||R||_inf), max over p in {1, 2}; 0 when W = 0.
double first_kind_certificate(const Matrix& w, double bound, const Matrix& t, const Matrix& r) {
    double worst = 0.0;
    for (double p : {1.0, 2.0}) {
        const SchattenP sp(p);
        const double lhs = schatten_norm(w, sp);
        const double rhs = bound * schatten_norm(t, sp) * operator_norm(r);
        worst = std::max(worst, lhs == 0.0 ? 0.0 : lhs / rhs);
    }
    return worst;
}

double second_kind_certificate(const Matrix& w, double bound, const Matrix& t, const Matrix& r) {
    double worst = 0.0;
    for (double p : {1.0, 2.0}) {
        const SchattenP sp(p);
        const double lhs = schatten_norm(w, sp);
        const double rhs = bound * operator_norm(t) * schatten_norm(r, sp);
        worst = std::max(worst, lhs == 0.0 ? 0.0 : lhs / rhs);
    }
    return worst;
}

/// Haagerup product with T in S_inf and R in S_q: ||V||_Sq <= bound ||T|| ||R||_Sq, q in {2, inf}.
double haagerup_certificate(const Matrix& v, double bound, const Matrix& t, const Matrix& r) {
    double worst = 0.0;
    for (const SchattenP sp : {SchattenP(2.0), SchattenP::infinity()}) {
        const double lhs = schatten_norm(v, sp);
        const double rhs = bound * operator_norm(t) * schatten_norm(r, sp);
        worst = std::max(worst, lhs == 0.0 ? 0.0 : lhs / rhs);
    }
    return worst;
}

void identity_trial(TrialContext& ctx) {
    const auto& c = ctx.config;
    const std::size_t fi = ctx.index / static_cast<std::size_t>(c.trials);
    const std::size_t t = ctx.index % static_cast<std::size_t>(c.trials);
    const auto& f = c.functions[fi];
    const int n = pick_dim(c, t);
    const auto l1 = ctx.random(n, 0);
    const auto m1 = ctx.random(n, 2);
    const auto l2 = c.same_pair ? l1 : ctx.random(n, 1);
    const auto m2 = c.same_pair ? m1 : ctx.random(n, 3);
    const DividedDifferenceOptions options{c.flip_sign};
    const Matrix id = Matrix::Identity(n, n);
    const Matrix dl = l1.matrix() - l2.matrix();
    const Matrix dm = m1.matrix() - m2.matrix();

    double perturbation = 0.0;
    if (c.variant == "first") perturbation = frobenius_norm(dl);
    if (c.variant == "second") perturbation = frobenius_norm(dm);
    if (c.variant == "ab12" || c.variant == "ba21") perturbation = std::max(frobenius_norm(dl), frobenius_norm(dm));
    const bool uses_first = c.variant != "second";
    const bool uses_second = c.variant != "first";
    // Measure seen by the first-kind term and operator at the second-kind term.
    const DissipativeMatrix& m_first = c.variant == "ba21" ? m2 : m1;
    const DissipativeMatrix& l_second = c.variant == "ab12" ? l2 : l1;

    json rows = json::array();
    std::vector<double> residuals;
    double worst_cert = 0.0, worst_additivity = 0.0;
    for (auto trunc : c.truncations) {
        json row{{"N", trunc}};
        Matrix w1, w2;
        double residual = 0.0;
        if (c.variant == "first") {
            auto r = identity_first(f, l1, l2, m1, trunc, options);
            residual = r.residual_s2;
            w1 = std::move(r.rhs);
        } else if (c.variant == "second") {
            auto r = identity_second(f, l1, m1, m2, trunc, options);
            residual = r.residual_s2;
            w2 = std::move(r.rhs);
        } else {
            const auto order = c.variant == "ab12" ? IdentityOrder::Ab12 : IdentityOrder::Ba21;
            auto r = identity_full(f, l1, l2, m1, m2, trunc, order, options);
            residual = r.total.residual_s2;
            const Matrix parts = identity_first(f, l1, l2, m_first, trunc, options).rhs +
                                 identity_second(f, l_second, m1, m2, trunc, options).rhs;
            const double additivity = frobenius_norm(r.total.rhs - parts);
            row["additivity"] = additivity;
            worst_additivity = std::max(worst_additivity, additivity);
            if (additivity > 1e-12) ctx.fail("additivity above 1e-12 at N=" + std::to_string(trunc));
            w1 = std::move(r.first_kind_term);
            w2 = std::move(r.second_kind_term);
        }
        row["residual_s2"] = residual;
        residuals.push_back(residual);

        json certs = json::object();
        if (uses_first) {
            certs["first_kind"] = first_kind_certificate(w1, cached_bound(f, trunc, c.flip_sign, 0), dl, id);
            const auto rep = rearrange_like1(build_dd1_rep(f, trunc, options));
            const Matrix v = evaluate_triple_h(rep, l2, id, m_first, dl, l1);
            certs["haagerup"] = haagerup_certificate(v, cached_bound(f, trunc, c.flip_sign, 2), id, dl);
        }
        if (uses_second) {
            certs["second_kind"] = second_kind_certificate(w2, cached_bound(f, trunc, c.flip_sign, 1), id, dm);
            if (!uses_first) {
                const auto rep = rearrange_like2(build_dd2_rep(f, trunc, options));
                const Matrix v = evaluate_triple_h(rep, m2, dm, l_second, id, m1);
                certs["haagerup"] = haagerup_certificate(v, cached_bound(f, trunc, c.flip_sign, 3), id, dm);
            }
        }
        for (const auto& [name, value] : certs.items()) {
            worst_cert = std::max(worst_cert, value.get<double>());
            if (value.get<double>() > kGridFactor) {
                ctx.fail(name + " Schatten certificate exceeds 1.05 at N=" + std::to_string(trunc));
            }
        }
        row["certificates"] = certs;
        rows.push_back(row);
    }

    constexpr double kNoiseFloor = 1e-12;
    for (std::size_t i = 1; i < residuals.size(); ++i) {
        if (residuals[i] > residuals[i - 1] && residuals[i - 1] > kNoiseFloor) {
            ctx.fail("residual increased from N=" + std::to_string(c.truncations[i - 1]) + " to N=" +
                     std::to_string(c.truncations[i]));
        }
    }
    const double final_residual = residuals.back();
    const double tolerance = std::max(5e-2 * perturbation, 1e-8);
    if (final_residual > tolerance) ctx.fail("final residual above max(5e-2 * ||perturbation||_S2, 1e-8)");
    if (residuals.size() > 1 && residuals.front() > kNoiseFloor && final_residual > 0.5 * residuals.front()) {
        ctx.fail("final residual above half the first residual");
    }
    if (c.same_pair && final_residual > kNoiseFloor) ctx.fail("residual above 1e-12 with equal pairs");

    ctx.record["variant"] = c.variant;
    ctx.record["function_index"] = fi;
    ctx.record["dims"] = n;
    ctx.record["perturbation_s2"] = perturbation;
    ctx.record["tolerance"] = tolerance;
    ctx.record["truncations"] = rows;
    ctx.metric("residual_final", final_residual);
    ctx.metric("residual_ratio", residuals.front() > 0.0 ? final_residual / residuals.front() : 0.0);
    ctx.metric("certificate_ratio", worst_cert);
    if (uses_first && uses_second) ctx.metric("additivity", worst_additivity);
}

void regularization_trial(TrialContext& ctx) {
    const auto& c = ctx.config;
    const int n = pick_dim(c, ctx.index);
    const auto l1 = ctx.random(n, 0);
    const auto l2 = c.same_pair ? l1 : ctx.random(n, 1);
    const auto points = regularization_convergence(l1, l2, c.eps);
    json errs = json::array();
    const double slope = points.front().err / points.front().eps;
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        errs.push_back({{"eps", points[i].eps}, {"err", points[i].err}});
        if (i == 0) continue;
        if (points[i].err > points[i - 1].err) ctx.fail("err(eps) not decreasing at eps=" + p_label(points[i].eps));
        const double limit = 2.0 * slope * points[i].eps;
        if (points[i].err > limit) ctx.fail("err(eps) above 2 err(eps0)/eps0 * eps at eps=" + p_label(points[i].eps));
        if (limit > 0.0) worst = std::max(worst, points[i].err / limit);
    }
    ctx.record["dims"] = n;
    ctx.record["errors"] = errs;
    ctx.metric("linear_bound_ratio", worst);
}

std::pair<DissipativeMatrix, DissipativeMatrix> convex_step(const DissipativeMatrix& from, const DissipativeMatrix& to,
                                                            double tau) {
    return {DissipativeMatrix((1.0 - tau) * from.matrix() + tau * to.matrix()),
            DissipativeMatrix((1.0 - 0.5 * tau) * from.matrix() + 0.5 * tau * to.matrix())};
}

void lipschitz_trial(TrialContext& ctx) {
    const auto& c = ctx.config;
    const auto& f = c.functions[ctx.index % c.functions.size()];
    const int n = pick_dim(c, ctx.index);
    const auto l1 = ctx.random(n, 0);
    const auto m1 = ctx.random(n, 1);
    const auto dl = ctx.random(n, 2);
    const auto dm = ctx.random(n, 3);
    auto rng = ctx.stream(kPurposeScalar);
    const double tau = rng.uniform(0.1 * c.perturbation, c.perturbation);
    const auto [l2, l2_half] = convex_step(l1, dl, tau);
    const auto [m2, m2_half] = convex_step(m1, dm, tau);

    json per_p = json::array();
    for (double p : c.p) {
        const SchattenP sp(p);
        const auto full = lipschitz_ratio(f, l1, m1, l2, m2, sp, c.besov_mode);
        const auto half = lipschitz_ratio(f, l1, m1, l2_half, m2_half, sp, c.besov_mode);
        json e{{"p", p_to_json(p)},
               {"numerator", full.numerator},
               {"denominator", full.denominator},
               {"besov_norm", full.besov_norm},
               {"perturbation", full.perturbation},
               {"status", full.status == RatioStatus::Ok ? "ok" : "zero_perturbation"},
               {"half_numerator", half.numerator}};
        const std::string label = p_label(p);
        if (full.ratio) {
            e["ratio"] = *full.ratio;
            ctx.metric("ratio_p" + label, *full.ratio);
            if (!std::isfinite(*full.ratio)) ctx.fail("non-finite ratio at p=" + label);
            if (*full.ratio > c.ratio_ceiling) ctx.fail("ratio above ceiling at p=" + label);
        }
        if (full.numerator > 0.0) {
            const double halving = half.numerator / full.numerator;
            e["halving"] = halving;
            ctx.metric("halving_p" + label, halving);
            if (halving < 0.35 || halving > 0.75) ctx.fail("halving factor outside [0.35, 0.75] at p=" + label);
        }
        per_p.push_back(e);
    }
    ctx.record["function_index"] = ctx.index % c.functions.size();
    ctx.record["dims"] = n;
    ctx.record["tau"] = tau;
    ctx.record["results"] = per_p;
}

Matrix random_hermitian(Eigen::Index n, const ExperimentConfig& c, std::uint64_t stream) {
    const Matrix g = random_gaussian(n, n, c.seed, stream);
    Matrix h = 0.5 * (g + g.adjoint());
    return h * (c.scale / operator_norm(h));
}

void p_sweep_trial(TrialContext& ctx) {
    const auto& c = ctx.config;
    const std::size_t di = ctx.index / static_cast<std::size_t>(c.trials);
    const std::size_t t = ctx.index % static_cast<std::size_t>(c.trials);
    const auto& f = c.functions[t % c.functions.size()];
    const int n = c.dims[di];
    // Self-adjoint pairs: the setting of the p > 2 failure claim.
    const DissipativeMatrix l1(random_hermitian(n, c, trial_stream(ctx.index, 0)));
    const DissipativeMatrix m1(random_hermitian(n, c, trial_stream(ctx.index, 1)));
    auto rng = ctx.stream(kPurposeScalar);
    const double tau = rng.uniform(0.1 * c.perturbation, c.perturbation);
    const DissipativeMatrix l2(l1.matrix() + tau * random_hermitian(n, c, trial_stream(ctx.index, 2)));
    const DissipativeMatrix m2(m1.matrix() + tau * random_hermitian(n, c, trial_stream(ctx.index, 3)));
    json per_p = json::array();
    for (double p : c.p) {
        const auto r = lipschitz_ratio(f, l1, m1, l2, m2, SchattenP(p), c.besov_mode);
        json e{{"p", p_to_json(p)}, {"numerator", r.numerator}, {"denominator", r.denominator}};
        if (r.ratio) {
            e["ratio"] = *r.ratio;
            ctx.metric("ratio_p" + p_label(p) + "_n" + std::to_string(n), *r.ratio);
        }
        per_p.push_back(e);
    }
    ctx.record["function_index"] = t % c.functions.size();
    ctx.record["dims"] = n;
    ctx.record["tau"] = tau;
    ctx.record["results"] = per_p;
}

void bound_trial(TrialContext& ctx) {
    const auto& c = ctx.config;
    const auto& f = c.functions[ctx.index % c.functions.size()];
    const int n = pick_dim(c, ctx.index);
    const auto l1 = ctx.random(n, 0);
    const auto l2 = c.same_pair ? l1 : ctx.random(n, 1);
    const auto m = ctx.random(n, 2);
    json per_p = json::array();
    for (double p : c.p) {
        const auto r = elementary_bound_check(f, l1, l2, m, SchattenP(p), c.k_emp);
        per_p.push_back({{"p", p_to_json(p)},
                         {"lhs_norm", r.lhs_norm},
                         {"bound", r.bound},
                         {"minimal_constant", r.minimal_constant},
                         {"ok", r.ok}});
        ctx.metric("minimal_constant_p" + p_label(p), r.minimal_constant);
        if (!r.ok) ctx.fail("elementary bound violated at p=" + p_label(p));
    }
    ctx.record["function_index"] = ctx.index % c.functions.size();
    ctx.record["dims"] = n;
    ctx.record["k_emp"] = c.k_emp;
    ctx.record["results"] = per_p;
}

}  // namespace

std::size_t trial_count(const ExperimentConfig& c) {
    const auto trials = static_cast<std::size_t>(c.trials);
    if (c.experiment == "window-check" || c.experiment == "cardinal-check") return 1;
    if (c.experiment == "besov-norm") return c.functions.size();
    if (c.experiment == "identity-check") return c.functions.size() * trials;
    if (c.experiment == "p-sweep") return c.dims.size() * trials;
    return trials;
}

json run_trial(const ExperimentConfig& config, std::size_t index) {
    if (index >= trial_count(config)) throw Error(ErrorKind::InvalidInput, "run_trial: trial index out of range");
    TrialContext ctx{config, index, json::object()};
    ctx.record["type"] = "record";
    ctx.record["experiment"] = config.experiment;
    ctx.record["trial"] = index;
    ctx.record["seed"] = config.seed;
    ctx.record["config_hash"] = config_hash(config);
    ctx.record["library_version"] = std::string(kLibraryVersion);
    ctx.record["prng_version"] = std::string(PhiloxStream::kVersion);
    ctx.record["window_id"] = std::string(LPWindow::kId);
    if (!config.truncations.empty()) ctx.record["N"] = config.truncations;
    if (!config.p.empty()) {
        json ps = json::array();
        for (double p : config.p) ps.push_back(p_to_json(p));
        ctx.record["p"] = ps;
    }

    const auto& e = config.experiment;
    if (e == "window-check") {
        window_trial(ctx);
    } else if (e == "cardinal-check") {
        cardinal_trial(ctx);
    } else if (e == "besov-norm") {
        besov_trial(ctx);
    } else if (e == "identity-check") {
        identity_trial(ctx);
    } else if (e == "regularization-check") {
        regularization_trial(ctx);
    } else if (e == "lipschitz-sweep") {
        lipschitz_trial(ctx);
    } else if (e == "p-sweep") {
        p_sweep_trial(ctx);
    } else {
        bound_trial(ctx);
    }
    ctx.record["metrics"] = ctx.metrics;
    ctx.record["failures"] = ctx.failures;
    ctx.record["pass"] = ctx.failures.empty();
    return ctx.record;
}

namespace {

std::vector<json> summarize(const std::string& experiment, const std::vector<json>& records) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : records) {
        for (const auto& [name, v] : r["metrics"].items()) {
            if (!values.contains(name)) order.push_back(name);
            values[name].push_back(v.get<double>());
        }
    }
    std::vector<json> rows;
    for (const auto& name : order) {
        const auto& v = values[name];
        rows.push_back({{"experiment", experiment},
                        {"metric", name},
                        {"count", v.size()},
                        {"max", *std::max_element(v.begin(), v.end())},
                        {"median", median(v)}});
    }
    return rows;
}

// Lipschitz sweep: no trial may exceed 10x the median ratio for its p.
std::vector<std::string> lipschitz_outliers(const std::vector<json>& records) {
    std::map<std::string, std::vector<std::pair<std::size_t, double>>> by_metric;
    for (const auto& r : records) {
        for (const auto& [name, v] : r["metrics"].items()) {
            if (name.rfind("ratio_p", 0) == 0) by_metric[name].emplace_back(r["trial"].get<std::size_t>(), v.get<double>());
        }
    }
    std::vector<std::string> out;
    for (const auto& [name, entries] : by_metric) {
        std::vector<double> v;
        for (const auto& e : entries) v.push_back(e.second);
        const double m = median(v);
        for (const auto& [trial, value] : entries) {
            if (value > 10.0 * m) out.push_back(name + ": trial " + std::to_string(trial) + " exceeds 10x median");
        }
    }
    return out;
}

}  // namespace

RunResult run(const ExperimentConfig& config, int threads) {
    validate(config);
    const std::size_t count = trial_count(config);
    const auto started = std::chrono::system_clock::now();
    std::vector<json> records(count);
    std::vector<double> wall(count, 0.0);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                records[i] = run_trial(config, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            wall[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    const auto finished = std::chrono::system_clock::now();

    RunResult result;
    result.records = std::move(records);
    result.summary = summarize(config.experiment, result.records);
    if (config.experiment == "lipschitz-sweep") result.run_failures = lipschitz_outliers(result.records);
    result.pass = result.run_failures.empty();
    for (const auto& r : result.records) result.pass = result.pass && r["pass"].get<bool>();
    result.header = {
        {"type", "header"},
        {"experiment", config.experiment},
        {"config", config.to_json()},
        {"config_hash", config_hash(config)},
        {"library_version", std::string(kLibraryVersion)},
        {"prng_version", std::string(PhiloxStream::kVersion)},
        {"window_id", std::string(LPWindow::kId)},
        {"threads", workers},
        {"started_at", iso_time(started)},
        {"finished_at", iso_time(finished)},
        {"wall_time_ms", wall},
        {"run_failures", result.run_failures},
        {"pass", result.pass},
    };
    return result;
}

std::filesystem::path write_outputs(const RunResult& result, const ExperimentConfig& config,
                                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto jsonl = dir / (config.experiment + ".jsonl");
    {
        std::ofstream out(jsonl);
        if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + jsonl.string());
        out << result.header.dump() << '\n';
        for (const auto& r : result.records) out << r.dump() << '\n';
    }
    const auto csv = dir / (config.experiment + "_summary.csv");
    std::ofstream out(csv);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + csv.string());
    out << "experiment,metric,count,max,median\n";
    out << std::setprecision(17);
    for (const auto& row : result.summary) {
        out << row["experiment"].get<std::string>() << ',' << row["metric"].get<std::string>() << ','
            << row["count"].get<std::size_t>() << ',' << row["max"].get<double>() << ','
            << row["median"].get<double>() << '\n';
    }
    return jsonl;
}

// ---------------------------------------------------------------------------
// Replay

std::pair<json, std::vector<json>> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open records file " + path.string());
    json header;
    std::vector<json> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::InvalidInput, "records line " + std::to_string(line_no) + " is not valid JSON");
        }
        if (j.value("type", "") == "header") {
            header = std::move(j);
        } else {
            records.push_back(std::move(j));
        }
    }
    if (header.is_null()) throw Error(ErrorKind::InvalidInput, "records file has no header line");
    return {std::move(header), std::move(records)};
}

std::optional<std::string> first_divergence(const json& expected, const json& actual) {
    if (expected.is_object() && actual.is_object()) {
        std::set<std::string> keys;
        for (const auto& [k, v] : expected.items()) keys.insert(k);
        for (const auto& [k, v] : actual.items()) keys.insert(k);
        for (const auto& k : keys) {
            if (!expected.contains(k) || !actual.contains(k)) return k;
            if (auto sub = first_divergence(expected[k], actual[k])) return sub->empty() ? k : k + "." + *sub;
        }
        return std::nullopt;
    }
    if (expected.is_array() && actual.is_array()) {
        if (expected.size() != actual.size()) return std::string{};
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const auto idx = std::to_string(i);
            if (auto sub = first_divergence(expected[i], actual[i])) return sub->empty() ? idx : idx + "." + *sub;
        }
        return std::nullopt;
    }
    if (expected == actual) return std::nullopt;
    return std::string{};
}

json ReplayReport::to_json() const {
    json j{{"records", records}, {"divergences", divergences}, {"ok", ok()}, {"version_mismatch", version_mismatch}};
    if (first_trial) j["first_divergent_trial"] = *first_trial;
    if (first_field) j["first_divergent_field"] = *first_field;
    if (version_mismatch) j["mismatch"] = mismatch_detail;
    return j;
}

ReplayReport replay(const std::filesystem::path& records_path, int threads) {
    auto [header, records] = read_records(records_path);
    ReplayReport report;
    report.records = records.size();
    const std::pair<const char*, std::string> versions[] = {
        {"prng_version", std::string(PhiloxStream::kVersion)},
        {"library_version", std::string(kLibraryVersion)},
        {"window_id", std::string(LPWindow::kId)},
    };
    for (const auto& [field, current] : versions) {
        if (header.value(field, "") != current) {
            report.version_mismatch = true;
            report.mismatch_detail = std::string(field) + ": records have '" + header.value(field, "") +
                                     "', this build has '" + current + "'";
            return report;
        }
    }
    const ExperimentConfig config = parse_config(header.at("config"));
    if (config_hash(config) != header.value("config_hash", "")) {
        report.divergences = 1;
        report.first_field = "config_hash";
        return report;
    }

    std::vector<std::optional<std::string>> diffs(records.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(records.size());
    const auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            try {
                const auto trial = records[i].at("trial").get<std::size_t>();
                diffs[i] = first_divergence(records[i], run_trial(config, trial));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(records.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!diffs[i]) continue;
        ++report.divergences;
        if (!report.first_trial) {
            report.first_trial = records[i].value("trial", std::size_t{0});
            report.first_field = *diffs[i];
        }
    }
    return report;
}

}  // namespace disscalc
