// Python bindings: numpy in, numpy out. Exponential sums cross the boundary
// as lists of (c, a, b) tuples.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "disscalc/besov.hpp"
#include "disscalc/funcalc.hpp"
#include "disscalc/harness.hpp"
#include "disscalc/matrix_core.hpp"
#include "disscalc/perturbation.hpp"
#include "disscalc/prng.hpp"
#include "disscalc/scalar_functions.hpp"

namespace py = pybind11;
using namespace disscalc;

namespace {

using Terms = std::vector<std::tuple<Complex, double, double>>;

ExpSum2D to_sum(const Terms& terms) {
    std::vector<ExpTerm> out;
    out.reserve(terms.size());
    for (const auto& [c, a, b] : terms) out.push_back({c, a, b});
    return ExpSum2D(std::move(out));
}

Terms from_sum(const ExpSum2D& f) {
    Terms out;
    for (const auto& t : f.terms()) out.emplace_back(t.c, t.a, t.b);
    return out;
}

DissipativeMatrix dm(const Matrix& a) { return DissipativeMatrix(a); }

SupMode sup_mode(const std::string& mode, int grid_res) {
    if (mode == "coef_sum") return SupMode::coef_sum();
    if (mode == "grid") return SupMode::grid(grid_res);
    throw Error(ErrorKind::InvalidInput, "mode must be 'coef_sum' or 'grid'");
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
nlohmann::json from_py(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict identity_dict(const IdentityResult& r) {
    py::dict d;
    d["lhs"] = r.lhs;
    d["rhs"] = r.rhs;
    d["residual_s2"] = r.residual_s2;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Functional calculus and perturbation experiments for dissipative matrices";
    m.attr("__version__") = std::string(kLibraryVersion);
    m.attr("prng_version") = std::string(PhiloxStream::kVersion);

    static py::exception<Error> error(m, "DisscalcError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    // scalar functions
    m.def("eval2d", [](const Terms& f, double x, double y) { return eval2d(to_sum(f), x, y); });
    m.def("band_radius", [](const Terms& f) { return band_radius(to_sum(f)); });
    m.def("divided_diff_1", [](const Terms& f, double x1, double x2, double y) { return divided_diff_1(to_sum(f), x1, x2, y); });
    m.def("divided_diff_2", [](const Terms& f, double x, double y1, double y2) { return divided_diff_2(to_sum(f), x, y1, y2); });
    m.def("cardinal_eval", &cardinal_eval, py::arg("j"), py::arg("s"), py::arg("z"));
    m.def("cardinal_reconstruct_1d",
          [](const std::vector<Complex>& samples, double s, Complex z) { return cardinal_reconstruct_1d(samples, s, z); },
          py::arg("samples"), py::arg("s"), py::arg("z"));
    m.def("load_function", [](const std::string& path) { return from_sum(load_function(path)); });

    // besov
    m.def("window", [](double t) { return build_window()(t); });
    m.def("lp_piece", [](const Terms& f, int n) { return from_sum(lp_piece(to_sum(f), n, build_window())); });
    m.def("f0_piece", [](const Terms& f) { return from_sum(f0_piece(to_sum(f), build_window())); });
    m.def("besov_norm_inhomogeneous",
          [](const Terms& f, const std::string& mode, int grid_res) {
              return besov_norm_inhomogeneous(to_sum(f), build_window(), sup_mode(mode, grid_res));
          },
          py::arg("f"), py::arg("mode") = "coef_sum", py::arg("grid_res") = 4096);
    m.def("besov_norm_homogeneous",
          [](const Terms& f, const std::string& mode, int grid_res) {
              return besov_norm_homogeneous(to_sum(f), build_window(), sup_mode(mode, grid_res));
          },
          py::arg("f"), py::arg("mode") = "coef_sum", py::arg("grid_res") = 4096);

    // matrices
    m.def("is_dissipative", &is_dissipative, py::arg("a"), py::arg("tol") = kDissipativeTolerance);
    m.def("random_dissipative",
          [](Eigen::Index n, std::uint64_t seed, double scale, std::uint64_t stream) {
              return random_dissipative(n, seed, scale, stream).matrix();
          },
          py::arg("n"), py::arg("seed"), py::arg("scale") = 1.0, py::arg("stream") = 0);
    m.def("resolvent_reg", [](const Matrix& l, double eps) { return resolvent_reg(dm(l), eps).value; });
    m.def("regularize", [](const Matrix& l, double eps) { return regularize(dm(l), eps).matrix(); });
    m.def("schatten_norm", [](const Matrix& a, double p) { return schatten_norm(a, SchattenP(p)); });

    // functional calculus
    m.def("expm", &expm);
    m.def("exp_i", [](const Matrix& l, double omega) { return apply_atom(ExpAtom{omega}, dm(l)); });
    m.def("cardinal", [](const Matrix& l, std::int64_t j, double s) { return apply_atom(CardinalAtom{j, s}, dm(l)); });
    m.def("apply_pair", [](const Terms& f, const Matrix& l, const Matrix& mm) { return apply_pair(to_sum(f), dm(l), dm(mm)); });
    m.def("apply_pair_sharp",
          [](const Terms& f, const Matrix& l, const Matrix& mm) { return apply_pair_sharp(to_sum(f), dm(l), dm(mm)); });

    // perturbation
    m.def("identity_first",
          [](const Terms& f, const Matrix& l1, const Matrix& l2, const Matrix& mm, std::int64_t n) {
              py::gil_scoped_release release;
              auto r = identity_first(to_sum(f), dm(l1), dm(l2), dm(mm), n);
              py::gil_scoped_acquire acquire;
              return identity_dict(r);
          },
          py::arg("f"), py::arg("l1"), py::arg("l2"), py::arg("m"), py::arg("truncation"));
    m.def("identity_second",
          [](const Terms& f, const Matrix& l, const Matrix& m1, const Matrix& m2, std::int64_t n) {
              py::gil_scoped_release release;
              auto r = identity_second(to_sum(f), dm(l), dm(m1), dm(m2), n);
              py::gil_scoped_acquire acquire;
              return identity_dict(r);
          },
          py::arg("f"), py::arg("l"), py::arg("m1"), py::arg("m2"), py::arg("truncation"));
    m.def("identity_full",
          [](const Terms& f, const Matrix& l1, const Matrix& l2, const Matrix& m1, const Matrix& m2, std::int64_t n,
             const std::string& order) {
              if (order != "ab12" && order != "ba21") throw Error(ErrorKind::InvalidInput, "order must be 'ab12' or 'ba21'");
              py::gil_scoped_release release;
              auto r = identity_full(to_sum(f), dm(l1), dm(l2), dm(m1), dm(m2), n,
                                     order == "ab12" ? IdentityOrder::Ab12 : IdentityOrder::Ba21);
              py::gil_scoped_acquire acquire;
              auto d = identity_dict(r.total);
              d["first_kind_term"] = r.first_kind_term;
              d["second_kind_term"] = r.second_kind_term;
              return d;
          },
          py::arg("f"), py::arg("l1"), py::arg("l2"), py::arg("m1"), py::arg("m2"), py::arg("truncation"),
          py::arg("order") = "ab12");
    m.def("regularization_convergence", [](const Matrix& l1, const Matrix& l2, const std::vector<double>& eps) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : regularization_convergence(dm(l1), dm(l2), eps)) out.emplace_back(p.eps, p.err);
        return out;
    });
    m.def("lipschitz_ratio",
          [](const Terms& f, const Matrix& l1, const Matrix& m1, const Matrix& l2, const Matrix& m2, double p) {
              const auto r = lipschitz_ratio(to_sum(f), dm(l1), dm(m1), dm(l2), dm(m2), SchattenP(p));
              py::dict d;
              d["status"] = r.status == RatioStatus::Ok ? "ok" : "zero_perturbation";
              d["numerator"] = r.numerator;
              d["denominator"] = r.denominator;
              d["ratio"] = r.ratio ? py::object(py::float_(*r.ratio)) : py::object(py::none());
              return d;
          });

    // harness
    m.def("experiment_names", &experiment_names);
    m.def("default_config", [](const std::string& name) { return to_py(default_config(name).to_json()); });
    m.def("run_experiment",
          [](const py::object& config, int threads) {
              const auto c = parse_config(from_py(config));
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = run(c, threads);
              }
              py::dict d;
              d["pass"] = r.pass;
              d["header"] = to_py(r.header);
              d["records"] = to_py(nlohmann::json(r.records));
              d["summary"] = to_py(nlohmann::json(r.summary));
              d["run_failures"] = r.run_failures;
              return d;
          },
          py::arg("config"), py::arg("threads") = 1);
    m.def("replay",
          [](const std::string& path, int threads) {
              ReplayReport r;
              {
                  py::gil_scoped_release release;
                  r = replay(path, threads);
              }
              return to_py(r.to_json());
          },
          py::arg("records_path"), py::arg("threads") = 1);
}
