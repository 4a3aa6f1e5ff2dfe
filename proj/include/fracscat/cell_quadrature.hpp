#pragma once

#include <complex>
#include <functional>
#include <span>

namespace fracscat {

using RadialFn = std::function<std::complex<double>(double)>;

/// M(rho) = \int_0^rho phi(r) r^{d-1} dr on geometric panels towards r = 0;
/// suited to integrable power singularities at the origin.
std::complex<double> radial_moment(int d, double rho, const RadialFn& phi);

/// \int over the cube center + [-h/2, h/2]^d of phi(|y|) dy, the target sitting at
/// the origin. Signed cone decomposition: each face F with outward normal n
/// contributes (n.p) \int_F M(|p|) / |p|^d dp. Works for cubes containing the origin.
std::complex<double> cell_integral_cone(int d, std::span<const double> center, double h,
                                        const RadialFn& phi, int face_nodes = 16);

/// Tensor Gauss-Legendre rule with n nodes per axis over the same cube.
std::complex<double> cell_integral_gauss(int d, std::span<const double> center, double h,
                                         const RadialFn& phi, int n);

} // namespace fracscat
