#pragma once

#include "fracscat/greens.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fracscat {

/// Piecewise Chebyshev interpolant on [a, b] with equal panels.
class ChebyshevTable {
  public:
    ChebyshevTable() = default;
    template <class F>
    ChebyshevTable(double a, double b, double panel_width, int order, F&& f);

    double operator()(double x) const;
    double lower() const { return a_; }
    double upper() const { return b_; }

  private:
    double a_ = 0.0, b_ = 0.0, width_ = 1.0;
    int order_ = 0;
    std::size_t panels_ = 0;
    std::vector<double> coef_;

    void fit(const std::vector<double>& samples);
    std::vector<double> nodes() const;
};

/// Fast evaluator of the fractional fundamental solution for bulk use:
/// Phi_s(r) = (k^{2(1-s)}/s) Phi_1(r) + C(r), with C tabulated as r^{d-2s} C(r)
/// on Chebyshev panels in log r and Phi_1 from its closed form (tabulated in
/// amplitude form for d != 3).
class RadialKernel {
  public:
    RadialKernel(const ProblemParams& params, double r_min, double r_max,
                 const QuadratureSpec& quad = {});

    cplx operator()(double r) const;
    /// Classical part Phi_1(r) with the problem's branch.
    cplx classical(double r) const;
    /// Real correction C(r).
    double correction(double r) const;

    const ProblemParams& params() const { return params_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }

  private:
    ProblemParams params_;
    QuadratureSpec quad_;
    double r_min_, r_max_;
    double factor_;
    double scale_pow_;    // d - 2s
    double amp_pow_;      // d - 2 for the classical amplitude when d >= 4, 0 for d = 2
    ChebyshevTable corr_;
    ChebyshevTable amp_re_, amp_im_;
};

template <class F>
ChebyshevTable::ChebyshevTable(double a, double b, double panel_width, int order, F&& f)
    : a_(a), b_(b), order_(order) {
    panels_ = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / panel_width)));
    width_ = (b - a) / static_cast<double>(panels_);
    const auto xs = nodes();
    std::vector<double> samples(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        samples[i] = f(xs[i]);
    fit(samples);
}

} // namespace fracscat
