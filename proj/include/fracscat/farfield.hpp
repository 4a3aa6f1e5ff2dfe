#pragma once

#include "fracscat/forward.hpp"

#include <span>
#include <string>
#include <vector>

namespace fracscat {

/// n equally spaced unit vectors (d = 2) or n Fibonacci-sphere nodes (d = 3), flattened.
std::vector<double> direction_set(int d, int n, double angle_offset = 0.0);
/// Equal weights summing to the measure of S^{d-1}.
std::vector<double> direction_weights(int d, int n);

struct FarFieldRecord {
    double k = 0.0;
    std::vector<double> xhat, theta;
    cplx amp;
};

struct FarFieldMeta {
    int d = 3;
    double s = 0.8;
    std::string potential_id;
    std::string settings_hash;
};

/// Amplitude records u^inf(k, xhat, theta) with provenance.
struct FarFieldSet {
    FarFieldMeta meta;
    std::vector<FarFieldRecord> records;

    /// Dimensions, unit directions, finite amplitudes and unique keys.
    void validate() const;
};

enum class AmplitudeWeights {
    midpoint,      ///< h^d at every node
    cell_average,  ///< h^d prod_a sinc(k xhat_a h / 2), the exact cell transform
};

/// u^inf(xhat) = sum_j w_j e^{-i k xhat.y_j} V(y_j) u(y_j), one value per direction.
std::vector<cplx> far_field_amplitude(const PotentialGrid& V, const ComplexField& u_total,
                                      const ProblemParams& params, std::span<const double> xhats,
                                      AmplitudeWeights weights = AmplitudeWeights::midpoint);

/// Herglotz amplitude sum_m w_m g_m u^inf(xhat, theta_m) from plane-wave amplitudes
/// amps[m][i] (incidence m, direction i).
std::vector<cplx> herglotz_amplitude(const std::vector<std::vector<cplx>>& amps,
                                     std::span<const cplx> density, std::span<const double> weights);

struct AsymptoticMatch {
    std::vector<double> error;   ///< relative mismatch per sample
    std::vector<bool> skipped;   ///< zero-amplitude directions
};

/// |u^sc(R xhat) - P e^{ikR} R^{-(d-1)/2} u^inf| / |P u^inf R^{-(d-1)/2}| for each sample
/// point R xhat (R >= 10/k), with P = far_field_prefactor(params).
AsymptoticMatch asymptotic_match(const ProblemParams& params, const ComplexField& scattered,
                                 std::span<const cplx> amplitudes);

/// max |u^inf(k, xhat, theta) - u^inf(k, -xhat, -theta)| over matched pairs.
double symmetry_check(const FarFieldSet& ff);

struct SynthesisOptions {
    SolveOptions solve;
    QuadratureSpec quad;
    AmplitudeWeights weights = AmplitudeWeights::midpoint;
};

/// Forward solves for each incidence direction; one record per (theta, xhat) pair.
/// The operator is assembled once and the solver factored once.
FarFieldSet synthesize_far_field(const PotentialGrid& V, const ProblemParams& params,
                                 std::span<const double> thetas, std::span<const double> xhats,
                                 const SynthesisOptions& opts = {});

/// Same, for explicit (theta, xhat) pairs (flattened, equal counts).
FarFieldSet synthesize_pairs(const PotentialGrid& V, const ProblemParams& params,
                             std::span<const double> thetas, std::span<const double> xhats,
                             const SynthesisOptions& opts = {});

} // namespace fracscat
