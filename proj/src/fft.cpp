#include "fft.hpp"

namespace disscalc::detail {

std::mutex& fftw_planner_mutex() {
    static std::mutex mutex;
    return mutex;
}

FftwPlan FftwPlan::dft_1d(FftwBuffer& buffer, int sign) {
    std::lock_guard lock(fftw_planner_mutex());
    return FftwPlan(fftw_plan_dft_1d(static_cast<int>(buffer.size()), buffer.data(), buffer.data(), sign,
                                     FFTW_ESTIMATE));
}

FftwPlan FftwPlan::dft_2d(FftwBuffer& buffer, int n0, int n1, int sign) {
    std::lock_guard lock(fftw_planner_mutex());
    return FftwPlan(fftw_plan_dft_2d(n0, n1, buffer.data(), buffer.data(), sign, FFTW_ESTIMATE));
}

void FftwPlan::reset() noexcept {
    if (plan_ != nullptr) {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
        plan_ = nullptr;
    }
}

}  // namespace disscalc::detail
