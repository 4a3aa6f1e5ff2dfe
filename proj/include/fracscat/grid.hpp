#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace fracscat {

using cplx = std::complex<double>;

/// Axis-aligned box.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    /// Euclidean distance from x to the box (0 inside).
    double distance(std::span<const double> x) const;
};

/// Uniform sampling of a compactly supported real potential. Sample `i` sits
/// at origin + h * multi_index(i); samples are stored row-major (last axis fastest).
struct PotentialGrid {
    int d = 3;
    std::vector<double> origin;
    double h = 1.0;
    std::vector<int> shape;
    std::vector<double> samples;

    std::size_t size() const;
    /// Coordinates of sample `idx` written to x[0..d).
    void point(std::size_t idx, double* x) const;
    std::vector<int> multi_index(std::size_t idx) const;
    std::size_t flat_index(std::span<const int> mi) const;

    /// Union of the cells (centre +- h/2) of nonzero samples; empty box for V = 0.
    Box support_box() const;
    bool is_zero() const;
    double max_abs() const;

    /// Shape/spacing consistency, finite samples and a zero boundary layer.
    void validate() const;

    /// Samples f on the grid; samples with |f| < 1e-300 are stored as exact zeros.
    static PotentialGrid sample(int d, std::vector<double> origin, double h, std::vector<int> shape,
                                const std::function<double(std::span<const double>)>& f);
    /// n^d grid with spacing h centred on the origin.
    static PotentialGrid centered(int d, int n, double h,
                                  const std::function<double(std::span<const double>)>& f);
};

enum class FieldRole { incident, scattered, total, auxiliary_w, estimate, potential };

std::string_view to_string(FieldRole r);

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

/// Complex samples at arbitrary points (flattened d-vectors).
struct ComplexField {
    int d = 3;
    std::vector<double> points;
    std::vector<cplx> values;
    FieldRole role = FieldRole::auxiliary_w;

    std::size_t size() const { return values.size(); }
    std::span<const double> point(std::size_t i) const {
        return {points.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    void validate() const;

    /// Zero field on all nodes of the grid.
    static ComplexField on_grid(const PotentialGrid& grid, FieldRole role);
};

/// C-infinity bump amp * exp(1 - 1/(1 - |x-c|^2/a^2)) supported in the open ball B(c, a).
std::function<double(std::span<const double>)> smooth_bump(double amp, double radius,
                                                            std::vector<double> center = {});

/// Gaussian amp * exp(-|x-c|^2 / (2 sigma^2)) times a smooth cutoff equal to 1 on
/// B(c, cutoff/2) and 0 outside B(c, cutoff).
std::function<double(std::span<const double>)> gaussian_bump(double amp, double sigma, double cutoff,
                                                             std::vector<double> center = {});

} // namespace fracscat
