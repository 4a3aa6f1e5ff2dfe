#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string_view>

namespace fracscat {

using cplx = std::complex<double>;

/// Limiting-absorption branch: outgoing is (k + i0)^{2s}, incoming (k - i0)^{2s}.
enum class Branch { outgoing, incoming };

constexpr double branch_sign(Branch b) { return b == Branch::outgoing ? 1.0 : -1.0; }

/// Dimension, fractional order, wavenumber and branch of the fractional
/// Helmholtz operator (-Delta)^s - k^{2s}.
struct ProblemParams {
    int d = 3;
    double s = 0.8;
    double k = 1.0;
    Branch branch = Branch::outgoing;

    /// d >= 2, 0 < s <= 1 (s = 1 is the classical operator), k > 0.
    void validate() const;
    /// Range required by the forward and inverse theorems:
    /// d >= 3 and d/(d+1) < s < min(1, d/2).
    void validate_theory() const;
};

/// Knobs for the principal-value, oscillatory-tail and lambda-integral engines.
struct QuadratureSpec {
    double pole_window = 0.25;   ///< half-width of the symmetric window around t = 1
    double tail_start = 0.0;     ///< lower bound for the first tail panel (0: automatic)
    int tail_periods = 40;       ///< half-period panels summed before extrapolation
    double abs_tol = 1e-14;
    double rel_tol = 1e-10;
    double lambda_max = 0.0;     ///< lambda truncation; 0 selects (60 / r)^2
    double epsilon_absorption = 1e-6;

    void validate() const;
};

enum class GreensMethod { radial_pv, decomposition, classical_closed, asymptote };

std::string_view to_string(GreensMethod m);

struct GreensValue {
    cplx value;
    GreensMethod method = GreensMethod::radial_pv;
    double est_error = 0.0;
};

/// Classical Helmholtz fundamental solution (s treated as 1). Closed form for
/// d = 3, principal-value route otherwise.
GreensValue phi_classical(const ProblemParams& params, double r, const QuadratureSpec& quad = {});

/// Classical Helmholtz fundamental solution from the Hankel closed form
/// (i/4) (k / 2 pi r)^{d/2-1} H^{(1)}_{d/2-1}(k r), any d >= 2.
GreensValue helmholtz_closed_form(int d, double k, double r, Branch branch);

/// Fractional fundamental solution through the radial principal-value integral
///   k^{d-2s} (2 pi)^{-d/2} [ PV \int_0^inf t^{d-1} S_d(k r t) / (t^{2s} - 1) dt  +/- i pi/(2s) S_d(k r) ].
GreensValue phi_fractional_radial(const ProblemParams& params, double r,
                                  const QuadratureSpec& quad = {});

/// Kernel of (lambda - Delta)^{-1}: (2 pi)^{-d/2} (sqrt(lambda)/r)^{d/2-1} K_{d/2-1}(sqrt(lambda) r).
double yukawa_kernel(int d, double lambda, double r);

/// Real second term of the resolvent decomposition,
///   sin(s pi)/pi \int_0^inf lambda^s G_lambda(r) / (lambda^{2s} - 2 lambda^s k^{2s} cos(s pi) + k^{4s}) dlambda.
double lambda_correction(const ProblemParams& params, double r, const QuadratureSpec& quad = {},
                         double* est_error = nullptr);

/// Fractional fundamental solution through the resolvent decomposition
/// (k^{2(1-s)}/s) Phi_1 + lambda_correction.
GreensValue phi_fractional_decomp(const ProblemParams& params, double r,
                                  const QuadratureSpec& quad = {});

/// Leading far-field term P e^{+-ikr} / r^{(d-1)/2}.
GreensValue phi_far_asymptote(const ProblemParams& params, double r);

/// P = (k^{2(1-s)}/s) k^{(d-3)/2} e^{-i pi (d-3)/4} / (2^{(d+1)/2} pi^{(d-1)/2}).
cplx far_field_prefactor(const ProblemParams& params);

/// Point-based wrapper: evaluates the chosen route at r = |x|.
GreensValue phi_at_point(const ProblemParams& params, std::span<const double> x,
                         GreensMethod route, const QuadratureSpec& quad = {});

/// CSV export with columns r,re,im,est_error,method; one row per radius and route.
void write_radial_table(std::ostream& os, const ProblemParams& params,
                        std::span<const double> radii, const QuadratureSpec& quad = {});

} // namespace fracscat
