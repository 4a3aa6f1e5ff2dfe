#pragma once

#include "fracscat/farfield.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fracscat {

/// Lebesgue pair for the uniform estimate and the resulting rate d(1/p - 1/q) - 2s.
struct LebesgueExponents {
    double p = 2.0;
    double q = 2.0;
    double decay = 0.0;

    double inv_p() const { return 1.0 / p; }
    double inv_q() const { return 1.0 / q; }
};

/// 1/q = (d - c s)/(2d), 1/p = [max{2/(d+1) + 1/q, (d+1)/(2d)} + 2s/d + 1/q] / 2 with c = `factor`.
LebesgueExponents pick_exponents(int d, double s, double factor = 1.9);

/// Checks 2/(d+1) <= 1/p - 1/q <= 2s/d, 1/p > (d+1)/(2d), 1/q < (d-1)/(2d) and decay < 0;
/// on failure `why` names the first violated condition.
bool exponents_admissible(int d, double s, const LebesgueExponents& e, std::string* why = nullptr);

/// rho = m + l, k = |rho|, theta = (m - l)/k, xhat = -rho/k; k (xhat - theta) = -2m.
struct ProbeTriple {
    std::vector<double> m, l, rho, theta, xhat;
    double k = 0.0;
};

ProbeTriple probe_geometry(std::span<const double> m, double l_magnitude, std::span<const double> l_direction);

/// A unit vector orthogonal to m (any unit vector when m = 0).
std::vector<double> orthogonal_direction(std::span<const double> m);

/// Frequency-domain sample xi -> value; under the Born approximation
/// value ~ \int e^{-i xi.y} V(y) dy.
struct FourierSample {
    std::vector<double> xi;
    cplx value;
    double k_used = 0.0;
};

/// One sample per record at xi = k (xhat - theta), value = raw amplitude.
std::vector<FourierSample> born_samples(const FarFieldSet& ff);

/// Amplitude u^inf(k, xhat, theta) for a potential, one call per probe.
using AmplitudeOracle =
    std::function<cplx(const ProblemParams&, std::span<const double> theta, std::span<const double> xhat)>;

struct TargetGrid {
    int d = 2;
    std::vector<double> origin;
    double h = 1.0;
    std::vector<int> shape;   ///< even extents
};

struct ReconstructionOptions {
    double reg = 1e-8;
    double window_shape = 1.0;    ///< Gaussian sigma = shape * cells / 4 (cells = 2)
    double window_cells = 2.0;    ///< truncation radius in lattice cells
    bool symmetrize = true;       ///< enforce value(-xi) = conj(value(xi))
};

/// Grids samples onto the DFT lattice of the target (samples within 1e-9 cells of a node
/// are assigned exactly, the rest by a Gaussian-window least-squares fit), then applies the
/// inverse DFT and keeps the real part. Throws CoverageError when there are fewer samples
/// than half the lattice nodes inside the sampled disk.
PotentialGrid reconstruct_potential(std::span<const FourierSample> samples, const TargetGrid& target,
                                    const ReconstructionOptions& opts = {});

/// One probe per DFT node of the target lattice with 0 < |xi| <= 2k in the half space
/// selected by the first nonzero index (plus xi = 0): m = -xi/2, |l| = sqrt(k^2 - |m|^2),
/// sample value u^inf at xi. The mirrored half follows from symmetrization.
std::vector<FourierSample> lattice_probe_samples(const AmplitudeOracle& forward, const ProblemParams& params,
                                                 const TargetGrid& target);

/// Direct quadrature sum_j h^d V_j e^{-i xi.y_j} of a sampled potential.
cplx fourier_quadrature(const PotentialGrid& V, std::span<const double> xi);

/// Forward-solver oracle; the operator and its factorization are cached per k.
AmplitudeOracle make_forward_oracle(const PotentialGrid& V, const QuadratureSpec& quad = {},
                                    const SolveOptions& solve = {});

struct StudyRow {
    double k = 0.0;               ///< largest k used in the row
    double l_magnitude = 0.0;
    double err_abs = 0.0;         ///< max_m |estimate - truth|
    double err_rel = 0.0;         ///< err_abs / max_m |truth|
    double slope_so_far = 0.0;    ///< fitted d log err / d log k over rows so far
    bool failed = false;
    std::string message;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double slope = 0.0;
    LebesgueExponents exponents;
};

/// For each |l|: probe every m, estimate \int e^{-2i m.y} V dy = conj(u^inf) and compare with
/// the quadrature of V_true. Solver failures mark the row and do not abort the table.
StudyResult convergence_study(const PotentialGrid& V_true, double s, std::span<const std::vector<double>> m_set,
                              std::span<const double> l_magnitudes, const AmplitudeOracle& forward);

} // namespace fracscat
