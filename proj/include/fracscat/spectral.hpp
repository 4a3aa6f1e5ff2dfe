#pragma once

#include "fracscat/fft.hpp"
#include "fracscat/grid.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace fracscat {

/// n^d periodic lattice of side L. Nodes sit at -L/2 + j L/n, or at cell centres
/// -L/2 + (j + 1/2) L/n; frequencies are (2 pi / L) m with m in [-n/2, n/2).
struct PeriodicGrid {
    int d = 2;
    int n = 64;
    double L = 2.0 * 3.141592653589793;
    bool cell_centered = false;

    void validate() const;
    std::size_t size() const;
    double spacing() const { return L / n; }
    std::vector<int> shape() const { return std::vector<int>(static_cast<std::size_t>(d), n); }
    void point(std::size_t idx, double* x) const;
    void frequency(std::size_t idx, double* xi) const;
    double frequency_norm(std::size_t idx) const;
    /// All node coordinates, flattened.
    std::vector<double> points() const;
    /// Smallest ||xi| - k| over the lattice.
    double shell_distance(double k) const;
};

enum class SymbolKind { riesz_s, riesz_2s, helmholtz_resolvent, frac_resolvent, bridge, shell_cutoff };

std::string_view to_string(SymbolKind k);

struct SymbolSpec {
    SymbolKind kind = SymbolKind::riesz_2s;
    double s = 0.5;
    double k = 1.0;
    double epsilon = 0.0;
    int j = 1;

    /// Multiplier at |xi|; throws ShellHit for resolvent kinds with epsilon = 0 on the shell.
    cplx value(double xi_norm) const;
};

/// (|xi|^{2s} - k^{2s}) / (|xi|^2 - k^2), with the value s k^{2s-2} on the shell.
double multiplier_value(double xi_norm, double s, double k);

/// chi_j: 0 outside [2^{-j-1}, 2^{j+1}], 1 on [2^{-j}, 2^j], C-infinity ramps in log2 r.
double cutoff_profile(int j, double r);

/// Unitary DFT on a periodic grid (Parseval holds without weights).
class PeriodicTransform {
  public:
    explicit PeriodicTransform(const PeriodicGrid& grid);

    void forward(std::span<cplx> data) const;
    void inverse(std::span<cplx> data) const;
    const PeriodicGrid& grid() const { return grid_; }

  private:
    PeriodicGrid grid_;
    FftPlan plan_;
    double scale_;
};

/// F^{-1} m(xi) F f.
std::vector<cplx> apply_multiplier(const PeriodicGrid& grid, std::span<const cplx> f,
                                   const std::function<cplx(std::span<const double>)>& m);
std::vector<cplx> apply_symbol(const PeriodicGrid& grid, std::span<const cplx> f, const SymbolSpec& sym);

enum class SolutionRoute { general, half_s };

struct ConstructedSolution {
    std::vector<cplx> u;
    double residual = 0.0;   ///< ||((-Delta)^s - k^{2s}) u - f||_2 / ||f||_2
    double epsilon = 0.0;    ///< absorption actually used
};

/// Solves ((-Delta)^s - k^{2s} - i eps) u = f on the lattice. `epsilon` < 0 selects 0 when
/// the shell misses the lattice and 1e-6 k^2 otherwise. The half_s route (s = 1/2)
/// solves the Helmholtz problem for w and returns u = (-Delta)^{1/2} w + k w.
ConstructedSolution construct_solution(const PeriodicGrid& grid, std::span<const cplx> f, double s, double k,
                                       SolutionRoute route, double epsilon = -1.0);

struct ProjectionReport {
    std::vector<cplx> f_j;
    double error = 0.0;          ///< ||f_j - f||
    double chain_split = 0.0;    ///< ||(1 - chi) F(chi f)|| + ||(1 - chi) f||
    double chain_expand = 0.0;   ///< ||(1 - chi) F((1 - chi) f)|| + ||(1 - chi) F f|| + ||(1 - chi) f||
    double bound = 0.0;          ///< 2 ||(1 - chi) f|| + ||(1 - chi) F f||
    double space_tail = 0.0;     ///< ||(1 - chi) f||
    double frequency_tail = 0.0; ///< ||(1 - chi) F f||
};

/// f_j = F^{-1} chi_j F(chi_j f), with chi_j applied radially in x and in xi.
ProjectionReport restricted_projection(const PeriodicGrid& grid, std::span<const cplx> f, int j);

struct ScanPoint {
    double lambda = 0.0;
    double lower_bound = 0.0;
    int trials = 0;
    double slope_partial = 0.0;
};

struct ScanResult {
    std::vector<ScanPoint> points;
    double slope = 0.0;
};

/// Randomized lower bounds of ||((-Delta)^s - lambda (1 + i eps))^{-1}||_{L^p -> L^q} on the
/// grid (`epsilon` is relative to lambda): random band-limited starts refined by
/// `ascent_steps` steps of the dual-exponent fixed-point iteration. Slope is the
/// least-squares fit of log bound against log lambda.
ScanResult resolvent_norm_scan(double s, double p, double q, std::span<const double> lambdas, double epsilon,
                               const PeriodicGrid& grid, int trials, std::uint64_t seed = 1,
                               int ascent_steps = 50);

/// Discrete L^p norm (sum |f|^p h^d)^{1/p}.
double lp_norm(std::span<const cplx> f, double p, double cell_volume);

} // namespace fracscat
