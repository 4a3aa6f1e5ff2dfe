#include "fracscat/cell_quadrature.hpp"

#include "fracscat/errors.hpp"
#include "fracscat/quadrature.hpp"

#include <cmath>
#include <vector>

namespace fracscat {

using cplx = std::complex<double>;

cplx radial_moment(int d, double rho, const RadialFn& phi) {
    if (!(rho > 0.0))
        return {};
    constexpr double ratio = 0.25;
    constexpr int panels = 30;
    const auto& rule = quad::gauss_legendre(12);
    cplx acc{};
    double hi = rho;
    for (int j = 0; j < panels; ++j) {
        const double lo = hi * ratio;
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double r = mid + half * rule.nodes[q];
            acc += rule.weights[q] * half * phi(r) * std::pow(r, d - 1);
        }
        hi = lo;
    }
    return acc;
}

namespace {

// Tensor rule over the (dim)-cube centred at `c` with side h, integrand g(point).
template <class G>
cplx tensor_rule(int dim, const double* c, double h, int n, G&& g, std::vector<double>& p) {
    const auto& rule = quad::gauss_legendre(n);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    cplx acc{};
    const double half = 0.5 * h;
    for (;;) {
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            const auto q = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
            p[static_cast<std::size_t>(a)] = c[a] + half * rule.nodes[q];
            w *= half * rule.weights[q];
        }
        acc += w * g(p);
        int a = dim - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == n)
            idx[static_cast<std::size_t>(a--)] = 0;
        if (a < 0)
            break;
    }
    return acc;
}

} // namespace

cplx cell_integral_gauss(int d, std::span<const double> center, double h, const RadialFn& phi, int n) {
    if (static_cast<int>(center.size()) != d)
        throw DomainError("cell_integral_gauss: centre has wrong dimension");
    std::vector<double> p(static_cast<std::size_t>(d));
    return tensor_rule(d, center.data(), h, n, [&](const std::vector<double>& y) {
        double r2 = 0.0;
        for (double v : y)
            r2 += v * v;
        return phi(std::sqrt(r2));
    }, p);
}

cplx cell_integral_cone(int d, std::span<const double> center, double h, const RadialFn& phi,
                        int face_nodes) {
    if (static_cast<int>(center.size()) != d)
        throw DomainError("cell_integral_cone: centre has wrong dimension");
    cplx total{};
    std::vector<double> fc(static_cast<std::size_t>(d - 1));
    std::vector<double> p(static_cast<std::size_t>(d - 1));
    for (int axis = 0; axis < d; ++axis) {
        for (int side : {-1, 1}) {
            const double plane = center[static_cast<std::size_t>(axis)] + 0.5 * side * h;
            const double delta = side * plane; // n . p for every p on the face
            if (delta == 0.0)
                continue;
            int m = 0;
            for (int b = 0; b < d; ++b)
                if (b != axis)
                    fc[static_cast<std::size_t>(m++)] = center[static_cast<std::size_t>(b)];
            auto g = [&](const std::vector<double>& q) {
                double r2 = plane * plane;
                for (double v : q)
                    r2 += v * v;
                const double rho = std::sqrt(r2);
                return radial_moment(d, rho, phi) / std::pow(rho, d);
            };
            cplx face;
            if (d == 1)
                face = g(p);
            else
                face = tensor_rule(d - 1, fc.data(), h, face_nodes, g, p);
            total += delta * face;
        }
    }
    return total;
}

} // namespace fracscat
