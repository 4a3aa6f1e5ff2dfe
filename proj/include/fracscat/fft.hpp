#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace fracscat {

/// In-place complex FFT on a row-major d-dimensional array (FFTW backend).
/// Forward uses e^{-i xi.x}; neither direction is normalized.
class FftPlan {
  public:
    explicit FftPlan(std::vector<int> shape);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;

    void forward(std::span<std::complex<double>> data) const;
    void inverse(std::span<std::complex<double>> data) const;

    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return size_; }

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<int> shape_;
    std::size_t size_ = 0;
};

} // namespace fracscat
