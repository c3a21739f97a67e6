#pragma once

#include <cmath>
#include <complex>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "disscalc/common.hpp"

namespace disscalc::test {

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline void check_close(Complex got, Complex want, double tol) {
    INFO("got " << got << " want " << want);
    CHECK(std::abs(got - want) <= tol);
}

inline void check_close(const Matrix& got, const Matrix& want, double tol) {
    REQUIRE(got.rows() == want.rows());
    REQUIRE(got.cols() == want.cols());
    const double err = max_abs(got - want);
    INFO("max entry error " << err);
    CHECK(err <= tol);
}

/// Expects `body` to throw disscalc::Error of the given kind.
template <class F>
void check_throws_kind(F&& body, ErrorKind kind) {
    bool thrown = false;
    try {
        body();
    } catch (const Error& e) {
        thrown = true;
        CHECK(e.kind() == kind);
    }
    CHECK(thrown);
}

}  // namespace disscalc::test
