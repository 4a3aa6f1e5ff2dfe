#include "fracscat/grid.hpp"

#include "fracscat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fracscat {

double Box::distance(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t a = 0; a < lo.size(); ++a) {
        const double e = std::max({lo[a] - x[a], 0.0, x[a] - hi[a]});
        acc += e * e;
    }
    return std::sqrt(acc);
}

std::size_t PotentialGrid::size() const {
    std::size_t n = 1;
    for (int e : shape)
        n *= static_cast<std::size_t>(e);
    return n;
}

std::vector<int> PotentialGrid::multi_index(std::size_t idx) const {
    std::vector<int> mi(static_cast<std::size_t>(d));
    for (int a = d - 1; a >= 0; --a) {
        const auto e = static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);
        mi[static_cast<std::size_t>(a)] = static_cast<int>(idx % e);
        idx /= e;
    }
    return mi;
}

std::size_t PotentialGrid::flat_index(std::span<const int> mi) const {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
        idx = idx * static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]) +
              static_cast<std::size_t>(mi[static_cast<std::size_t>(a)]);
    return idx;
}

void PotentialGrid::point(std::size_t idx, double* x) const {
    for (int a = d - 1; a >= 0; --a) {
        const auto e = static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);
        x[a] = origin[static_cast<std::size_t>(a)] + h * static_cast<double>(idx % e);
        idx /= e;
    }
}

Box PotentialGrid::support_box() const {
    Box b;
    b.lo.assign(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    b.hi.assign(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    std::vector<double> x(static_cast<std::size_t>(d));
    bool any = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] == 0.0)
            continue;
        any = true;
        point(i, x.data());
        for (std::size_t a = 0; a < x.size(); ++a) {
            b.lo[a] = std::min(b.lo[a], x[a] - 0.5 * h);
            b.hi[a] = std::max(b.hi[a], x[a] + 0.5 * h);
        }
    }
    if (!any) {
        b.lo.assign(static_cast<std::size_t>(d), 0.0);
        b.hi.assign(static_cast<std::size_t>(d), 0.0);
    }
    return b;
}

bool PotentialGrid::is_zero() const {
    return std::all_of(samples.begin(), samples.end(), [](double v) { return v == 0.0; });
}

double PotentialGrid::max_abs() const {
    double m = 0.0;
    for (double v : samples)
        m = std::max(m, std::abs(v));
    return m;
}

void PotentialGrid::validate() const {
    if (d < 1 || static_cast<int>(shape.size()) != d || static_cast<int>(origin.size()) != d)
        throw FormatError("PotentialGrid: dimension, shape and origin disagree");
    if (!(h > 0.0) || !std::isfinite(h))
        throw FormatError("PotentialGrid: spacing must be positive and finite");
    for (int e : shape)
        if (e < 3)
            throw FormatError("PotentialGrid: every extent must be >= 3");
    if (samples.size() != size())
        throw FormatError("PotentialGrid: expected " + std::to_string(size()) + " samples, got " +
                          std::to_string(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i]))
            throw FormatError("PotentialGrid: non-finite sample at index " + std::to_string(i));
        if (samples[i] == 0.0)
            continue;
        const auto mi = multi_index(i);
        for (int a = 0; a < d; ++a)
            if (mi[static_cast<std::size_t>(a)] == 0 ||
                mi[static_cast<std::size_t>(a)] == shape[static_cast<std::size_t>(a)] - 1)
                throw FormatError("PotentialGrid: nonzero sample on the boundary layer at index " +
                                  std::to_string(i));
    }
}

PotentialGrid PotentialGrid::sample(int d, std::vector<double> origin, double h, std::vector<int> shape,
                                    const std::function<double(std::span<const double>)>& f) {
    PotentialGrid g;
    g.d = d;
    g.origin = std::move(origin);
    g.h = h;
    g.shape = std::move(shape);
    if (static_cast<int>(g.shape.size()) != d || static_cast<int>(g.origin.size()) != d)
        throw DomainError("PotentialGrid::sample: dimension mismatch");
    g.samples.resize(g.size());
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        g.point(i, x.data());
        const double v = f(x);
        g.samples[i] = std::abs(v) < 1e-300 ? 0.0 : v;
    }
    return g;
}

PotentialGrid PotentialGrid::centered(int d, int n, double h,
                                      const std::function<double(std::span<const double>)>& f) {
    std::vector<double> origin(static_cast<std::size_t>(d), -0.5 * h * (n - 1));
    return sample(d, std::move(origin), h, std::vector<int>(static_cast<std::size_t>(d), n), f);
}

std::string_view to_string(FieldRole r) {
    switch (r) {
    case FieldRole::incident: return "incident";
    case FieldRole::scattered: return "scattered";
    case FieldRole::total: return "total";
    case FieldRole::auxiliary_w: return "auxiliary_w";
    case FieldRole::estimate: return "estimate";
    case FieldRole::potential: return "potential";
    }
    return "unknown";
}

void ComplexField::validate() const {
    if (points.size() != values.size() * static_cast<std::size_t>(d))
        throw FormatError("ComplexField: point and value counts disagree");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
            throw FormatError("ComplexField: non-finite value at index " + std::to_string(i));
}

ComplexField ComplexField::on_grid(const PotentialGrid& grid, FieldRole role) {
    ComplexField f;
    f.d = grid.d;
    f.role = role;
    const std::size_t n = grid.size();
    f.points.resize(n * static_cast<std::size_t>(grid.d));
    for (std::size_t i = 0; i < n; ++i)
        grid.point(i, f.points.data() + i * static_cast<std::size_t>(grid.d));
    f.values.assign(n, cplx(0.0, 0.0));
    return f;
}

double smooth_step(double t) {
    if (t <= 0.0)
        return 0.0;
    if (t >= 1.0)
        return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

namespace {
double dist2(std::span<const double> x, const std::vector<double>& c) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        const double e = x[a] - (c.empty() ? 0.0 : c[a]);
        r2 += e * e;
    }
    return r2;
}
} // namespace

std::function<double(std::span<const double>)> smooth_bump(double amp, double radius,
                                                            std::vector<double> center) {
    if (!(radius > 0.0))
        throw DomainError("smooth_bump: radius must be positive");
    return [=](std::span<const double> x) {
        const double q = dist2(x, center) / (radius * radius);
        if (q >= 1.0)
            return 0.0;
        return amp * std::exp(1.0 - 1.0 / (1.0 - q));
    };
}

std::function<double(std::span<const double>)> gaussian_bump(double amp, double sigma, double cutoff,
                                                             std::vector<double> center) {
    if (!(sigma > 0.0) || !(cutoff > 0.0))
        throw DomainError("gaussian_bump: sigma and cutoff must be positive");
    return [=](std::span<const double> x) {
        const double r2 = dist2(x, center);
        const double r = std::sqrt(r2);
        const double w = 1.0 - smooth_step(2.0 * r / cutoff - 1.0);
        return w == 0.0 ? 0.0 : amp * std::exp(-r2 / (2.0 * sigma * sigma)) * w;
    };
}

} // namespace fracscat
