#include "fracscat/radiation.hpp"

#include "fracscat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracscat {

FieldSampler scattered_sampler(const LSOperator& op, const ComplexField& u_total) {
    const auto& V = op.potential();
    if (u_total.values.size() != op.size())
        throw DomainError("scattered_sampler: total field is not sampled on the potential grid");
    std::vector<cplx> vu(op.size());
    for (std::size_t i = 0; i < vu.size(); ++i)
        vu[i] = V.samples[i] * u_total.values[i];
    return [&op, vu = std::move(vu)](std::span<const double> pts, std::span<cplx> out) {
        scattered_sum(op, vu, pts, out);
    };
}

RadiationResult radiation_residual(const ProblemParams& params, const FieldSampler& sampler,
                                   const PeriodicGrid& box, std::span<const double> radii,
                                   const RadiationOptions& opts) {
    params.validate();
    box.validate();
    if (box.d != params.d)
        throw DomainError("radiation_residual: box dimension differs from params.d");
    const double lambda = 2.0 * std::numbers::pi / params.k;
    if (box.spacing() > lambda / 6.0 * (1.0 + 1e-12))
        throw ResolutionError("radiation", "box spacing exceeds (2 pi / k) / 6");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > opts.inner_radius) || radii[i] > box.L / 4.0 * (1.0 + 1e-12))
            throw DomainError("radiation_residual: radii must lie in (inner_radius, L/4]");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw DomainError("radiation_residual: radii must be increasing");
    }
    const int d = box.d;
    const auto ud = static_cast<std::size_t>(d);
    const std::size_t N = box.size();
    const auto pts = box.points();
    std::vector<cplx> u(N);
    sampler(pts, u);

    const double half = 0.5 * box.L;
    std::vector<double> rad(N);
    double frame = 0.0, interior = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double r2 = 0.0, linf = 0.0;
        for (std::size_t a = 0; a < ud; ++a) {
            const double x = pts[i * ud + a];
            r2 += x * x;
            linf = std::max(linf, std::abs(x));
        }
        rad[i] = std::sqrt(r2);
        const double t = (rad[i] - opts.taper_start * half) / ((opts.taper_end - opts.taper_start) * half);
        u[i] *= 1.0 - smooth_step(t);
        if (linf > 0.9 * half)
            frame += std::norm(u[i]);
        if (rad[i] < 0.5 * half)
            interior += std::norm(u[i]);
    }
    RadiationResult res;
    res.boundary_ratio = interior > 0.0 ? frame / interior : 0.0;
    res.aliasing_warning = res.boundary_ratio > 0.01;

    // D^s u, one component per axis.
    const PeriodicTransform T(box);
    std::vector<cplx> uh = u;
    T.forward(uh);
    const double s = params.s;
    std::vector<std::vector<cplx>> Du(ud, std::vector<cplx>(N));
    std::vector<double> xi(ud);
    for (std::size_t i = 0; i < N; ++i) {
        box.frequency(i, xi.data());
        double n2 = 0.0;
        for (double v : xi)
            n2 += v * v;
        const double nrm = std::sqrt(n2);
        const double mag = nrm > 0.0 ? std::pow(nrm, s - 1.0) : 0.0;
        for (std::size_t a = 0; a < ud; ++a)
            Du[a][i] = cplx{0.0, xi[a] * mag} * uh[i];
    }
    for (auto& comp : Du)
        T.inverse(comp);

    const double ks = std::pow(params.k, s);
    const double vol = std::pow(box.spacing(), d);
    std::vector<double> dens(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        if (!(rad[i] > 0.0))
            continue;
        double acc = 0.0;
        for (std::size_t a = 0; a < ud; ++a) {
            const double xhat = pts[i * ud + a] / rad[i];
            acc += std::norm(Du[a][i] - cplx{0.0, ks * xhat} * u[i]);
        }
        dens[i] = acc;
    }
    for (double R : radii) {
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            if (rad[i] > opts.inner_radius && rad[i] < R)
                sum += dens[i];
        res.radii.push_back(R);
        res.residual.push_back(sum * vol / R);
    }
    return res;
}

} // namespace fracscat
