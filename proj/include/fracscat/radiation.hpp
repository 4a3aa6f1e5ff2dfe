#pragma once

#include "fracscat/forward.hpp"
#include "fracscat/spectral.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fracscat {

/// Writes field values at the given flattened points.
using FieldSampler = std::function<void(std::span<const double> points, std::span<cplx> out)>;

/// u^sc of a solved problem at arbitrary points (lattice-aligned points reuse stencil weights).
FieldSampler scattered_sampler(const LSOperator& op, const ComplexField& u_total);

struct RadiationOptions {
    double inner_radius = 1.0;
    double taper_start = 0.6;   ///< radial taper from taper_start L/2 ...
    double taper_end = 0.95;    ///< ... down to zero at taper_end L/2
};

struct RadiationResult {
    std::vector<double> radii;
    std::vector<double> residual;
    double boundary_ratio = 0.0;   ///< frame energy |x|_inf > 0.45 L over energy in |x| < L/4
    bool aliasing_warning = false; ///< boundary_ratio above 1%
};

/// (1/R) \int_{r0 < |x| < R} |D^s u - i k^s u xhat|^2 dx by midpoint sums on the periodic box,
/// where D^s has the vector symbol i xi |xi|^{s-1}.
RadiationResult radiation_residual(const ProblemParams& params, const FieldSampler& sampler,
                                   const PeriodicGrid& box, std::span<const double> radii,
                                   const RadiationOptions& opts = {});

} // namespace fracscat
