#pragma once

// Thin RAII layer over FFTW. Planning is serialized (the FFTW planner is
// not thread-safe); executing a plan on new arrays is.

#include <cstddef>
#include <mutex>

#include <fftw3.h>

#include "disscalc/common.hpp"

namespace disscalc::detail {

std::mutex& fftw_planner_mutex();

class FftwBuffer {
public:
    explicit FftwBuffer(std::size_t n) : data_(fftw_alloc_complex(n)), size_(n) {}
    ~FftwBuffer() { fftw_free(data_); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data() noexcept { return data_; }
    std::size_t size() const noexcept { return size_; }
    Complex get(std::size_t i) const noexcept { return {data_[i][0], data_[i][1]}; }
    void set(std::size_t i, Complex v) noexcept {
        data_[i][0] = v.real();
        data_[i][1] = v.imag();
    }

private:
    fftw_complex* data_;
    std::size_t size_;
};

class FftwPlan {
public:
    FftwPlan() = default;
    ~FftwPlan() { reset(); }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    FftwPlan(FftwPlan&& other) noexcept : plan_(other.plan_) { other.plan_ = nullptr; }
    FftwPlan& operator=(FftwPlan&& other) noexcept {
        if (this != &other) {
            reset();
            plan_ = other.plan_;
            other.plan_ = nullptr;
        }
        return *this;
    }

    /// In-place 1-D transform on `buffer`.
    static FftwPlan dft_1d(FftwBuffer& buffer, int sign);
    /// In-place 2-D transform, row-major with `n0` rows of `n1` entries.
    static FftwPlan dft_2d(FftwBuffer& buffer, int n0, int n1, int sign);

    void execute() const { fftw_execute(plan_); }
    /// Runs the plan on another buffer of the same size and alignment.
    void execute(FftwBuffer& buffer) const { fftw_execute_dft(plan_, buffer.data(), buffer.data()); }

private:
    explicit FftwPlan(fftw_plan plan) : plan_(plan) {}
    void reset() noexcept;
    fftw_plan plan_ = nullptr;
};

}  // namespace disscalc::detail
