#pragma once

#include "fracscat/fft.hpp"
#include "fracscat/greens.hpp"
#include "fracscat/grid.hpp"
#include "fracscat/kernel_table.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fracscat {

/// Discrete Lippmann-Schwinger operator on the potential's grid:
///   (A x)_i = sum_j w(i - j) x_j,  w(o) = \int_{cell o} Phi_s(y) dy,
/// with the cone rule on cells with |o|^2 <= 4 and tensor Gauss rules beyond.
/// Products with A use an FFT circulant embedding of size 2n per axis.
class LSOperator {
  public:
    /// `eval_radius` widens the kernel table for later off-grid evaluation.
    LSOperator(PotentialGrid V, const ProblemParams& params, const QuadratureSpec& quad = {},
               double eval_radius = 0.0);

    const PotentialGrid& potential() const { return V_; }
    const ProblemParams& params() const { return params_; }
    const RadialKernel& kernel() const { return *kernel_; }
    std::size_t size() const { return V_.size(); }
    /// Grid indices where V != 0.
    const std::vector<std::size_t>& support() const { return support_; }

    /// Cell weight for an integer offset (in grid steps).
    cplx weight(std::span<const int> offset) const;
    /// Cell weight for a real offset x - y_j (in physical units); integer offsets
    /// reuse `weight`, others use tensor Gauss rules sized by distance.
    cplx weight_at(std::span<const double> delta) const;
    /// A[i][j].
    cplx entry(std::size_t i, std::size_t j) const;

    /// y = A x on the full grid.
    void apply(std::span<const cplx> x, std::span<cplx> y) const;
    /// A restricted to support rows and columns.
    Eigen::MatrixXcd support_matrix() const;
    /// Full N x N matrix (small grids only).
    Eigen::MatrixXcd dense_matrix() const;

  private:
    PotentialGrid V_;
    ProblemParams params_;
    QuadratureSpec quad_;
    std::shared_ptr<const RadialKernel> kernel_;
    std::vector<std::size_t> support_;
    std::vector<int> ext_;        // 2n per axis
    std::vector<cplx> stencil_;   // weights on the embedded grid, wrapped offsets
    std::vector<cplx> khat_;      // FFT of stencil_
    std::unique_ptr<FftPlan> plan_;

    std::size_t embedded_index(std::span<const int> offset) const;
};

/// Cell weight \int_{c + [-h/2, h/2]^d} Phi(|y|) dy for a cell centre `c` relative
/// to the target (cone rule near the target, tensor Gauss rules further out).
cplx cell_weight(const RadialKernel& kernel, double h, std::span<const double> c);

/// Spec-facing constructor; validates resolution h <= (2 pi / k) / 6.
LSOperator assemble_ls_operator(const PotentialGrid& V, const ProblemParams& params,
                                const QuadratureSpec& quad = {}, double eval_radius = 0.0);

/// Plane wave e^{i k x.theta} or a Herglotz superposition sum_m w_m g_m e^{i k x.theta_m}.
struct IncidentSource {
    std::vector<double> theta;              ///< plane: unit vector (d entries)
    std::vector<double> nodes;              ///< herglotz: flattened unit vectors
    std::vector<cplx> density;              ///< herglotz: g at the nodes
    std::vector<double> weights;            ///< herglotz: quadrature weights
    bool herglotz = false;

    static IncidentSource plane(std::vector<double> theta);
};

ComplexField incident_field(const ProblemParams& params, const IncidentSource& src,
                            std::span<const double> points);
ComplexField incident_field(const ProblemParams& params, const IncidentSource& src,
                            const PotentialGrid& grid);

struct SolveOptions {
    std::size_t dense_limit = 800;    ///< dense LU when |support| is at most this
    double gmres_tol = 1e-13;
    int gmres_restart = 80;
    int max_iterations = 3000;
    double residual_limit = 1e-10;
    double rcond_limit = 1e-12;
};

struct SolveResult {
    ComplexField total;
    ComplexField scattered;
    double residual = 0.0;    ///< ||(I - A diag V) u - u_in||_inf / ||u_in||_inf
    int iterations = 0;
    std::string method;       ///< "trivial", "dense_lu" or "gmres"
};

/// Solves (I - A diag V) u = u_in in contrast-source form (I - V A) z = V u_in on the
/// support, u = u_in + A z.
SolveResult solve_total_field(const LSOperator& op, const ComplexField& u_in,
                              const SolveOptions& opts = {});

/// Reusable solver: factors the support system once (dense path) for many incident fields.
class LSSolver {
  public:
    explicit LSSolver(const LSOperator& op, SolveOptions opts = {});
    ~LSSolver();
    LSSolver(LSSolver&&) noexcept;
    SolveResult solve(const ComplexField& u_in) const;
    const LSOperator& op() const { return *op_; }

  private:
    struct Dense;
    const LSOperator* op_;
    SolveOptions opts_;
    std::unique_ptr<Dense> dense_;
};

/// A diag(V) x on the full grid.
std::vector<cplx> apply_scattering(const LSOperator& op, std::span<const cplx> x);

/// Spectral radius estimate of A diag(V) by power iteration (steps x starts, max taken).
double neumann_margin(const LSOperator& op, std::uint64_t seed = 7, int steps = 20, int starts = 3);

/// u^sc(x) = sum_j w(x - y_j) V_j u_j at points at distance >= h from the support box.
ComplexField evaluate_scattered_at(const LSOperator& op, const ComplexField& u_total,
                                   std::span<const double> points);

/// Same sum without the support-distance check; callers guarantee x is not
/// inside a support cell unless it is a grid node.
void scattered_sum(const LSOperator& op, std::span<const cplx> vu, std::span<const double> points,
                   std::span<cplx> out);

} // namespace fracscat
