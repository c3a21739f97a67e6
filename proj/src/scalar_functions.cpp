#include "disscalc/scalar_functions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include <nlohmann/json.hpp>

namespace disscalc {

ExpSum2D::ExpSum2D(std::vector<ExpTerm> terms) {
    std::sort(terms.begin(), terms.end(), [](const ExpTerm& l, const ExpTerm& r) {
        return std::tie(l.a, l.b) < std::tie(r.a, r.b);
    });
    for (const auto& t : terms) {
        if (!terms_.empty() && terms_.back().a == t.a && terms_.back().b == t.b) {
            terms_.back().c += t.c;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](const ExpTerm& t) { return t.c == Complex{}; });
}

bool ExpSum2D::is_analytic() const noexcept {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const ExpTerm& t) { return t.a >= 0.0 && t.b >= 0.0; });
}

double ExpSum2D::coefficient_l1() const noexcept {
    double total = 0.0;
    for (const auto& t : terms_) total += std::abs(t.c);
    return total;
}

ExpSum2D ExpSum2D::operator+(const ExpSum2D& other) const {
    std::vector<ExpTerm> all = terms_;
    all.insert(all.end(), other.terms_.begin(), other.terms_.end());
    return ExpSum2D(std::move(all));
}

ExpSum2D ExpSum2D::operator-(const ExpSum2D& other) const { return *this + other * Complex{-1.0, 0.0}; }

ExpSum2D ExpSum2D::operator*(Complex s) const {
    return map_coefficients([s](double, double) { return s; });
}

Complex eval2d(const ExpSum2D& f, double x, double y) {
    Complex sum{};
    for (const auto& t : f.terms()) sum += t.c * std::exp(kI * (t.a * x + t.b * y));
    return sum;
}

double band_radius(const ExpSum2D& f) {
    double r = 0.0;
    for (const auto& t : f.terms()) r = std::max(r, std::hypot(t.a, t.b));
    return r;
}

Complex partial_x(const ExpSum2D& f, double x, double y) {
    Complex sum{};
    for (const auto& t : f.terms()) sum += kI * t.a * t.c * std::exp(kI * (t.a * x + t.b * y));
    return sum;
}

Complex partial_y(const ExpSum2D& f, double x, double y) {
    Complex sum{};
    for (const auto& t : f.terms()) sum += kI * t.b * t.c * std::exp(kI * (t.a * x + t.b * y));
    return sum;
}

double divided_difference_threshold(double u1, double u2) {
    return 1e-6 * (1.0 + std::abs(u1) + std::abs(u2));
}

Complex divided_diff_1(const ExpSum2D& f, double x1, double x2, double y) {
    if (std::abs(x1 - x2) > divided_difference_threshold(x1, x2)) {
        return (eval2d(f, x1, y) - eval2d(f, x2, y)) / (x1 - x2);
    }
    return partial_x(f, x1, y);
}

Complex divided_diff_2(const ExpSum2D& f, double x, double y1, double y2) {
    if (std::abs(y1 - y2) > divided_difference_threshold(y1, y2)) {
        return (eval2d(f, x, y1) - eval2d(f, x, y2)) / (y1 - y2);
    }
    return partial_y(f, x, y1);
}

// ---------------------------------------------------------------------------

Complex phi_cardinal(Complex w) {
    if (std::abs(w) < kCardinalTaylorRadius) {
        // (e^{iw}-1)/w = i * sum_{m>=0} (iw)^m / (m+1)!, truncated at m = 12.
        const Complex iw = kI * w;
        Complex sum{};
        double factorial = 1.0;
        for (int m = 1; m <= 13; ++m) factorial *= m;  // 13!
        for (int m = 12; m >= 0; --m) {
            sum = sum * iw + 1.0 / factorial;
            factorial /= (m + 1);
        }
        return kI * sum;
    }
    return (std::exp(kI * w) - 1.0) / w;
}

Complex cardinal_eval(std::int64_t j, double s, Complex z) {
    const Complex w = s * z - kTwoPi * static_cast<double>(j);
    if (std::abs(w) < kCardinalTaylorRadius) return phi_cardinal(w);
    // e^{isz} rather than e^{iw}: identical in exact arithmetic, no 2 pi j rounding.
    return (std::exp(kI * s * z) - 1.0) / w;
}

Complex eval_atom(const OneVarAtom& atom, Complex z) {
    return std::visit(
        [z](const auto& a) -> Complex {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ExpAtom>) {
                return std::exp(kI * a.omega * z);
            } else if constexpr (std::is_same_v<T, CardinalAtom>) {
                return cardinal_eval(a.j, a.s, z);
            } else if constexpr (std::is_same_v<T, CayleyInvAtom>) {
                return 1.0 / (1.0 - kI * z);
            } else {
                return a.c;
            }
        },
        atom);
}

double atom_half_plane_bound(const OneVarAtom& atom) {
    // |(e^{iw}-1)/w| = |int_0^1 e^{itw} dt| <= 1 when Im w >= 0.
    if (const auto* c = std::get_if<ConstAtom>(&atom)) return std::abs(c->c);
    return 1.0;
}

OneVarFunction OneVarFunction::exp_sum(std::span<const std::pair<Complex, double>> terms) {
    std::vector<Product> products;
    products.reserve(terms.size());
    for (const auto& [c, omega] : terms) {
        if (c == Complex{}) continue;
        products.push_back({c, {ExpAtom{omega}}});
    }
    return OneVarFunction(std::move(products));
}

Complex OneVarFunction::operator()(Complex z) const {
    Complex sum{};
    for (const auto& p : products_) {
        Complex value = p.scale;
        for (const auto& atom : p.factors) value *= eval_atom(atom, z);
        sum += value;
    }
    return sum;
}

OneVarFunction OneVarFunction::operator+(const OneVarFunction& other) const {
    auto products = products_;
    products.insert(products.end(), other.products_.begin(), other.products_.end());
    return OneVarFunction(std::move(products));
}

OneVarFunction OneVarFunction::operator*(const OneVarFunction& other) const {
    std::vector<Product> products;
    products.reserve(products_.size() * other.products_.size());
    for (const auto& l : products_) {
        for (const auto& r : other.products_) {
            Product p{l.scale * r.scale, l.factors};
            p.factors.insert(p.factors.end(), r.factors.begin(), r.factors.end());
            products.push_back(std::move(p));
        }
    }
    return OneVarFunction(std::move(products));
}

OneVarFunction OneVarFunction::operator*(Complex s) const {
    auto products = products_;
    for (auto& p : products) p.scale *= s;
    return OneVarFunction(std::move(products));
}

Complex cardinal_reconstruct_1d(std::span<const Complex> samples, double s, Complex z) {
    if (samples.size() % 2 != 1) {
        throw Error(ErrorKind::InvalidInput, "cardinal_reconstruct_1d: sample count must be 2N+1");
    }
    const auto n_max = static_cast<std::int64_t>(samples.size() / 2);
    Complex sum{};
    for (std::int64_t n = -n_max; n <= n_max; ++n) {
        const Complex sample = samples[static_cast<std::size_t>(n + n_max)];
        if (sample == Complex{}) continue;
        sum += sample * cardinal_eval(n, s, z);
    }
    return sum / kI;
}

// ---------------------------------------------------------------------------

ExpSum2D exp_sum_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) {
        throw Error(ErrorKind::InvalidInput, "function spec: expected an object with a \"terms\" array");
    }
    std::vector<ExpTerm> terms;
    std::size_t index = 0;
    for (const auto& t : j["terms"]) {
        const auto field = [&](const char* name) -> double {
            if (!t.contains(name)) return 0.0;
            if (!t[name].is_number()) {
                throw Error(ErrorKind::InvalidInput, "function spec: term " + std::to_string(index) +
                                                         " field \"" + name + "\" is not a number");
            }
            return t[name].get<double>();
        };
        ExpTerm term{{field("re"), field("im")}, field("a"), field("b")};
        if (!std::isfinite(term.a) || !std::isfinite(term.b) || !std::isfinite(term.c.real()) ||
            !std::isfinite(term.c.imag())) {
            throw Error(ErrorKind::InvalidInput,
                        "function spec: term " + std::to_string(index) + " has a non-finite field");
        }
        if (term.a < 0.0 || term.b < 0.0) {
            throw Error(ErrorKind::NotAnalytic, "function spec: term " + std::to_string(index) +
                                                    " has a negative frequency (a=" + std::to_string(term.a) +
                                                    ", b=" + std::to_string(term.b) + ")");
        }
        terms.push_back(term);
        ++index;
    }
    return ExpSum2D(std::move(terms));
}

nlohmann::json exp_sum_to_json(const ExpSum2D& f) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : f.terms()) {
        terms.push_back({{"re", t.c.real()}, {"im", t.c.imag()}, {"a", t.a}, {"b", t.b}});
    }
    return {{"terms", terms}};
}

ExpSum2D load_function(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open function spec " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, "function spec " + path.string() + ": " + e.what());
    }
    return exp_sum_from_json(j);
}

}  // namespace disscalc
