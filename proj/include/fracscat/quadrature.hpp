#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fracscat::quad {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod (21 point) on [a, b]; `tol` is relative to the L1 norm.
/// The error estimate uses the QUADPACK rescaling of |K21 - G10|.
Estimate adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                  unsigned max_depth = 18);

/// Wynn epsilon acceleration of a sequence of partial sums. The error is the
/// spread of the last three accelerated values.
Estimate wynn_epsilon(std::span<const double> partial_sums);

/// Gauss-Legendre rule on [-1, 1] with `n` nodes (n in {2, 3, 4, 6, 8, 12, 16, 24, 32, 48}).
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const Rule& gauss_legendre(int n);

} // namespace fracscat::quad
