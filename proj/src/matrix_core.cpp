#include "disscalc/matrix_core.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "disscalc/prng.hpp"

namespace disscalc {

Matrix hermitian_imaginary_part(const Matrix& a) {
    Matrix k = (a - a.adjoint()) / Complex{0.0, 2.0};
    // Exact Hermitian symmetry; rounding would otherwise leave tiny skew parts.
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        k(i, i) = k(i, i).real();
        for (Eigen::Index j = i + 1; j < k.cols(); ++j) k(j, i) = std::conj(k(i, j));
    }
    return k;
}

double min_imaginary_eigenvalue(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_imaginary_part(a), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool is_dissipative(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidInput, "is_dissipative: matrix is not square");
    return min_imaginary_eigenvalue(a) >= -tol;
}

DissipativeMatrix::DissipativeMatrix(Matrix value, double tol) : value_(std::move(value)), tol_(tol) {
    if (value_.rows() != value_.cols()) {
        throw Error(ErrorKind::InvalidInput, "DissipativeMatrix: matrix is not square");
    }
    if (!value_.allFinite()) throw Error(ErrorKind::InvalidInput, "DissipativeMatrix: non-finite entry");
    imag_ = hermitian_imaginary_part(value_);
    min_eig_ = value_.rows() == 0 ? 0.0
                                  : Eigen::SelfAdjointEigenSolver<Matrix>(imag_, Eigen::EigenvaluesOnly)
                                        .eigenvalues()
                                        .minCoeff();
    if (min_eig_ < -tol_) {
        throw Error(ErrorKind::NotDissipative, "DissipativeMatrix: imaginary part has eigenvalue " +
                                                   std::to_string(min_eig_) + " < -" + std::to_string(tol_));
    }
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream) {
    PhiloxStream rng(seed, stream);
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = rng.complex_normal();
    }
    return a;
}

DissipativeMatrix random_dissipative(Eigen::Index n, std::uint64_t seed, double scale, std::uint64_t stream) {
    if (n < 1) throw Error(ErrorKind::InvalidInput, "random_dissipative: n must be >= 1");
    if (!(scale > 0.0)) throw Error(ErrorKind::InvalidInput, "random_dissipative: scale must be positive");
    PhiloxStream rng(seed, stream);
    Matrix a(n, n), b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = rng.complex_normal();
    }
    const Matrix h = (a + a.adjoint()) / 2.0;
    const Matrix g = b * b.adjoint() / static_cast<double>(n);
    Matrix l = h + kI * g;
    l *= scale / operator_norm(l);
    return DissipativeMatrix(std::move(l));
}

Matrix random_unitary(Eigen::Index n, std::uint64_t seed, std::uint64_t stream) {
    const Matrix z = random_gaussian(n, n, seed, stream);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    // Fix the phases so the distribution is Haar.
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) q.col(j) *= r(j, j) / mag;
    }
    return q;
}

ResolventResult resolvent_reg(const DissipativeMatrix& l, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidInput, "resolvent_reg: eps must be positive");
    const auto n = l.dim();
    const Matrix shifted = Matrix::Identity(n, n) - kI * eps * l.matrix();
    Eigen::PartialPivLU<Matrix> lu(shifted);
    ResolventResult out{lu.inverse(), lu.rcond()};
    if (!out.value.allFinite() || !(out.rcond > 0.0)) {
        throw Error(ErrorKind::SolveFailure, "resolvent_reg: I - i eps L is numerically singular");
    }
    return out;
}

DissipativeMatrix regularize(const DissipativeMatrix& l, double eps) {
    return DissipativeMatrix(l.matrix() * resolvent_reg(l, eps).value, 1e-9);
}

SchattenP::SchattenP(double p) : p_(p) {
    if (!(p >= 1.0)) throw Error(ErrorKind::InvalidInput, "Schatten exponent must satisfy p >= 1");
}

Eigen::VectorXd singular_values(const Matrix& a) {
    if (a.size() == 0) return {};
    return Eigen::BDCSVD<Matrix>(a).singularValues();
}

double schatten_norm(const Matrix& a, SchattenP p) {
    const Eigen::VectorXd s = singular_values(a);
    if (s.size() == 0) return 0.0;
    if (p.is_infinity()) return s.maxCoeff();
    const double top = s.maxCoeff();
    if (top == 0.0) return 0.0;
    // Scale by the largest value so s^p cannot overflow or underflow.
    double total = 0.0;
    for (double v : s) total += std::pow(v / top, p.value());
    return top * std::pow(total, 1.0 / p.value());
}

double operator_norm(const Matrix& a) { return schatten_norm(a, SchattenP::infinity()); }

double frobenius_norm(const Matrix& a) { return schatten_norm(a, SchattenP(2.0)); }

nlohmann::json matrix_to_json(const Matrix& a) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        nlohmann::json row_re = nlohmann::json::array();
        nlohmann::json row_im = nlohmann::json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            row_re.push_back(a(i, j).real());
            row_im.push_back(a(i, j).imag());
        }
        re.push_back(std::move(row_re));
        im.push_back(std::move(row_im));
    }
    return {{"n", a.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("re")) {
        throw Error(ErrorKind::InvalidInput, "matrix JSON: expected {\"n\", \"re\", \"im\"}");
    }
    const auto n = j["n"].get<Eigen::Index>();
    if (n < 0) throw Error(ErrorKind::InvalidInput, "matrix JSON: negative dimension");
    const auto read = [&](const char* name, Eigen::Index i, Eigen::Index k) -> double {
        if (!j.contains(name)) return 0.0;
        const auto& rows = j[name];
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n ||
            !rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != n) {
            throw Error(ErrorKind::InvalidInput, std::string("matrix JSON: \"") + name + "\" is not " +
                                                     std::to_string(n) + "x" + std::to_string(n));
        }
        return rows[i][k].get<double>();
    };
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) a(i, k) = {read("re", i, k), read("im", i, k)};
    }
    return a;
}

Matrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open matrix file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, "matrix file " + path.string() + ": " + e.what());
    }
    return matrix_from_json(j);
}

void save_matrix(const std::filesystem::path& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write matrix file " + path.string());
    out << matrix_to_json(a).dump() << '\n';
}

}  // namespace disscalc
