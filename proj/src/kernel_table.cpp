#include "fracscat/kernel_table.hpp"

#include "fracscat/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fracscat {

std::vector<double> ChebyshevTable::nodes() const {
    std::vector<double> xs;
    xs.reserve(panels_ * static_cast<std::size_t>(order_));
    for (std::size_t p = 0; p < panels_; ++p) {
        const double lo = a_ + width_ * static_cast<double>(p);
        for (int j = 0; j < order_; ++j) {
            const double y = std::cos(std::numbers::pi * (j + 0.5) / order_);
            xs.push_back(lo + 0.5 * width_ * (y + 1.0));
        }
    }
    return xs;
}

void ChebyshevTable::fit(const std::vector<double>& samples) {
    const auto n = static_cast<std::size_t>(order_);
    coef_.assign(panels_ * n, 0.0);
    for (std::size_t p = 0; p < panels_; ++p) {
        const double* f = samples.data() + p * n;
        double* c = coef_.data() + p * n;
        for (std::size_t m = 0; m < n; ++m) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                acc += f[j] * std::cos(std::numbers::pi * static_cast<double>(m) * (j + 0.5) / order_);
            c[m] = (m == 0 ? 1.0 : 2.0) * acc / order_;
        }
    }
}

double ChebyshevTable::operator()(double x) const {
    double t = (x - a_) / width_;
    auto p = static_cast<std::ptrdiff_t>(std::floor(t));
    p = std::clamp<std::ptrdiff_t>(p, 0, static_cast<std::ptrdiff_t>(panels_) - 1);
    const double y = 2.0 * (t - static_cast<double>(p)) - 1.0;
    const double* c = coef_.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(order_);
    double b1 = 0.0, b2 = 0.0;
    for (int m = order_ - 1; m >= 1; --m) {
        const double b0 = 2.0 * y * b1 - b2 + c[m];
        b2 = b1;
        b1 = b0;
    }
    return y * b1 - b2 + c[0];
}

RadialKernel::RadialKernel(const ProblemParams& params, double r_min, double r_max,
                           const QuadratureSpec& quad)
    : params_(params), quad_(quad), r_min_(r_min), r_max_(r_max) {
    params_.validate();
    if (!(r_min > 0.0 && r_max > r_min))
        throw DomainError("RadialKernel: need 0 < r_min < r_max");
    const int d = params_.d;
    const double s = params_.s;
    factor_ = std::pow(params_.k, 2.0 * (1.0 - s)) / s;
    scale_pow_ = d - 2.0 * s;
    amp_pow_ = d >= 4 ? d - 2.0 : 0.0;

    const double u0 = std::log(r_min), u1 = std::log(r_max) + 1e-12;
    constexpr double width = 0.4;
    constexpr int order = 16;

    ProblemParams outgoing = params_;
    outgoing.branch = Branch::outgoing;
    corr_ = ChebyshevTable(u0, u1, width, order, [&](double u) {
        const double r = std::exp(u);
        return std::pow(r, scale_pow_) * lambda_correction(outgoing, r, quad_);
    });
    if (d != 3) {
        auto amp = [&](double u) {
            const double r = std::exp(u);
            return helmholtz_closed_form(d, params_.k, r, Branch::outgoing).value *
                   std::polar(std::pow(r, amp_pow_), -params_.k * r);
        };
        amp_re_ = ChebyshevTable(u0, u1, width, order, [&](double u) { return amp(u).real(); });
        amp_im_ = ChebyshevTable(u0, u1, width, order, [&](double u) { return amp(u).imag(); });
    }
}

cplx RadialKernel::classical(double r) const {
    const double k = params_.k;
    cplx v;
    if (params_.d == 3) {
        v = std::polar(1.0 / (4.0 * std::numbers::pi * r), k * r);
    } else if (r > r_max_) {
        v = helmholtz_closed_form(params_.d, k, r, Branch::outgoing).value;
    } else {
        const double u = std::log(std::max(r, r_min_));
        cplx a(amp_re_(u), amp_im_(u));
        if (params_.d == 2 && r < r_min_)
            a -= std::log(r / r_min_) / (2.0 * std::numbers::pi);
        v = a * std::polar(std::pow(r, -amp_pow_), k * r);
    }
    return params_.branch == Branch::outgoing ? v : std::conj(v);
}

double RadialKernel::correction(double r) const {
    if (r > r_max_)
        return lambda_correction(params_, r, quad_);
    const double u = std::log(std::max(r, r_min_));
    return corr_(u) * std::pow(r, -scale_pow_);
}

cplx RadialKernel::operator()(double r) const { return factor_ * classical(r) + correction(r); }

} // namespace fracscat
