#include "fracscat/fft.hpp"

#include "fracscat/errors.hpp"

#include <fftw3.h>

#include <mutex>
#include <string>

namespace fracscat {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct FftPlan::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

FftPlan::FftPlan(std::vector<int> shape) : impl_(std::make_unique<Impl>()), shape_(std::move(shape)) {
    if (shape_.empty())
        throw DomainError("FftPlan: empty shape");
    size_ = 1;
    for (int n : shape_) {
        if (n <= 0)
            throw DomainError("FftPlan: nonpositive extent " + std::to_string(n));
        size_ *= static_cast<std::size_t>(n);
    }
    // Plans are created on scratch memory with FFTW_ESTIMATE and executed with the new-array interface.
    auto* buf = fftw_alloc_complex(size_);
    std::lock_guard lock(planner_mutex());
    const int rank = static_cast<int>(shape_.size());
    impl_->fwd = fftw_plan_dft(rank, shape_.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl_->inv = fftw_plan_dft(rank, shape_.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!impl_->fwd || !impl_->inv)
        throw NumericError("fft", "FFTW planning failed");
}

FftPlan::~FftPlan() {
    if (!impl_)
        return;
    std::lock_guard lock(planner_mutex());
    if (impl_->fwd)
        fftw_destroy_plan(impl_->fwd);
    if (impl_->inv)
        fftw_destroy_plan(impl_->inv);
}

FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::span<std::complex<double>> data) const {
    if (data.size() != size_)
        throw DomainError("FftPlan::forward: size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->fwd, p, p);
}

void FftPlan::inverse(std::span<std::complex<double>> data) const {
    if (data.size() != size_)
        throw DomainError("FftPlan::inverse: size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->inv, p, p);
}

} // namespace fracscat
