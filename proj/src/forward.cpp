#include "fracscat/forward.hpp"

#include "fracscat/cell_quadrature.hpp"
#include "fracscat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

namespace fracscat {

namespace {

constexpr double pi = std::numbers::pi;

int gauss_order(double dist2_in_cells) {
    if (dist2_in_cells <= 16.0)
        return 8;
    if (dist2_in_cells <= 64.0)
        return 6;
    if (dist2_in_cells <= 400.0)
        return 4;
    return 3;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double inf_norm(std::span<const cplx> v) {
    double m = 0.0;
    for (const auto& z : v)
        m = std::max(m, std::abs(z));
    return m;
}

// Sorted absolute offsets packed into one integer; radial symmetry of the kernel
// makes all cells of a class share a weight.
std::uint64_t class_key(std::span<const int> offset, std::vector<int>& scratch) {
    scratch.assign(offset.begin(), offset.end());
    for (auto& v : scratch)
        v = std::abs(v);
    std::sort(scratch.begin(), scratch.end());
    std::uint64_t key = 0;
    for (int v : scratch)
        key = key * 1000003ULL + static_cast<std::uint64_t>(v);
    return key;
}

cplx class_weight(const RadialKernel& kernel, double h, std::span<const int> offset) {
    std::vector<double> c(offset.size());
    for (std::size_t a = 0; a < offset.size(); ++a)
        c[a] = h * std::abs(offset[a]);
    std::sort(c.begin(), c.end());
    return cell_weight(kernel, h, c);
}

} // namespace

cplx cell_weight(const RadialKernel& kernel, double h, std::span<const double> c) {
    const int d = kernel.params().d;
    double r2 = 0.0;
    for (double v : c)
        r2 += v * v;
    const double q = r2 / (h * h);
    const RadialFn phi = [&kernel](double r) { return kernel(r); };
    if (q <= 4.0 + 1e-9)
        return cell_integral_cone(d, c, h, phi);
    return cell_integral_gauss(d, c, h, phi, gauss_order(q));
}

// ---------------------------------------------------------------------------
// LSOperator

LSOperator::LSOperator(PotentialGrid V, const ProblemParams& params, const QuadratureSpec& quad,
                       double eval_radius)
    : V_(std::move(V)), params_(params), quad_(quad) {
    params_.validate();
    V_.validate();
    if (V_.d != params_.d)
        throw ConfigError("potential.d", "grid dimension " + std::to_string(V_.d) +
                                             " does not match d = " + std::to_string(params_.d));
    const double lambda = 2.0 * pi / params_.k;
    if (V_.h > lambda / 6.0 * (1.0 + 1e-12))
        throw ResolutionError("forward", "grid spacing h = " + fmt(V_.h) +
                                             " exceeds (2 pi / k) / 6 = " + fmt(lambda / 6.0));
    const int d = V_.d;
    for (std::size_t i = 0; i < V_.size(); ++i)
        if (V_.samples[i] != 0.0)
            support_.push_back(i);

    double diag2 = 0.0;
    for (int n : V_.shape)
        diag2 += static_cast<double>(n) * n;
    const double r_max = std::max(1.05 * V_.h * std::sqrt(diag2) + 2.0 * V_.h, 1.05 * eval_radius);
    kernel_ = std::make_shared<const RadialKernel>(params_, 1e-3 * V_.h, r_max, quad_);

    ext_.resize(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        ext_[static_cast<std::size_t>(a)] = 2 * V_.shape[static_cast<std::size_t>(a)];
        total *= static_cast<std::size_t>(ext_[static_cast<std::size_t>(a)]);
    }
    stencil_.assign(total, cplx{});

    std::unordered_map<std::uint64_t, cplx> cache;
    std::vector<int> scratch, off(static_cast<std::size_t>(d));
    for (std::size_t e = 0; e < total; ++e) {
        std::size_t rem = e;
        bool skip = false;
        for (int a = d - 1; a >= 0; --a) {
            const auto ua = static_cast<std::size_t>(a);
            const int m = ext_[ua];
            int v = static_cast<int>(rem % static_cast<std::size_t>(m));
            rem /= static_cast<std::size_t>(m);
            const int n = V_.shape[ua];
            if (v == n) // unused wrap slot
                skip = true;
            off[ua] = v < n ? v : v - m;
        }
        if (skip)
            continue;
        const auto key = class_key(off, scratch);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, class_weight(*kernel_, V_.h, off)).first;
        stencil_[e] = it->second;
    }
    plan_ = std::make_unique<FftPlan>(ext_);
    khat_ = stencil_;
    plan_->forward(khat_);
    const double inv = 1.0 / static_cast<double>(total);
    for (auto& v : khat_)
        v *= inv;
}

std::size_t LSOperator::embedded_index(std::span<const int> offset) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < ext_.size(); ++a) {
        int v = offset[a];
        if (std::abs(v) >= V_.shape[a])
            throw DomainError("LSOperator: offset outside the grid stencil");
        if (v < 0)
            v += ext_[a];
        idx = idx * static_cast<std::size_t>(ext_[a]) + static_cast<std::size_t>(v);
    }
    return idx;
}

cplx LSOperator::weight(std::span<const int> offset) const {
    if (offset.size() != ext_.size())
        throw DomainError("LSOperator::weight: offset has wrong dimension");
    return stencil_[embedded_index(offset)];
}

cplx LSOperator::weight_at(std::span<const double> delta) const {
    const int d = V_.d;
    std::vector<int> off(static_cast<std::size_t>(d));
    bool lattice = true, inside = true;
    for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double t = delta[ua] / V_.h;
        const double r = std::round(t);
        if (std::abs(t - r) > 1e-9)
            lattice = false;
        off[ua] = static_cast<int>(r);
        if (std::abs(r) >= V_.shape[ua])
            inside = false;
    }
    if (lattice && inside)
        return weight(off);
    if (lattice)
        return class_weight(*kernel_, V_.h, off);
    std::vector<double> c(delta.begin(), delta.end());
    for (auto& v : c)
        v = -v; // cell centre relative to the target
    return cell_weight(*kernel_, V_.h, c);
}

cplx LSOperator::entry(std::size_t i, std::size_t j) const {
    const auto mi = V_.multi_index(i), mj = V_.multi_index(j);
    std::vector<int> off(mi.size());
    for (std::size_t a = 0; a < mi.size(); ++a)
        off[a] = mi[a] - mj[a];
    return weight(off);
}

void LSOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
    const std::size_t n = V_.size();
    if (x.size() != n || y.size() != n)
        throw DomainError("LSOperator::apply: vector size does not match the grid");
    const int d = V_.d;
    std::vector<cplx> buf(stencil_.size(), cplx{});
    // Scatter x into the lower corner of the embedded array.
    auto embed_index = [&](std::size_t i) {
        std::size_t e = 0, rem = i, stride = 1;
        for (int a = d - 1; a >= 0; --a) {
            const auto ua = static_cast<std::size_t>(a);
            const auto na = static_cast<std::size_t>(V_.shape[ua]);
            e += (rem % na) * stride;
            rem /= na;
            stride *= static_cast<std::size_t>(ext_[ua]);
        }
        return e;
    };
    for (std::size_t i = 0; i < n; ++i)
        buf[embed_index(i)] = x[i];
    plan_->forward(buf);
    for (std::size_t e = 0; e < buf.size(); ++e)
        buf[e] *= khat_[e];
    plan_->inverse(buf);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = buf[embed_index(i)];
}

Eigen::MatrixXcd LSOperator::support_matrix() const {
    const auto m = static_cast<Eigen::Index>(support_.size());
    Eigen::MatrixXcd A(m, m);
    std::vector<std::vector<int>> mi(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i)
        mi[i] = V_.multi_index(support_[i]);
    std::vector<int> off(static_cast<std::size_t>(V_.d));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            for (std::size_t a = 0; a < off.size(); ++a)
                off[a] = mi[static_cast<std::size_t>(i)][a] - mi[static_cast<std::size_t>(j)][a];
            A(i, j) = stencil_[embedded_index(off)];
        }
    return A;
}

Eigen::MatrixXcd LSOperator::dense_matrix() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXcd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            A(i, j) = entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return A;
}

LSOperator assemble_ls_operator(const PotentialGrid& V, const ProblemParams& params,
                                const QuadratureSpec& quad, double eval_radius) {
    return LSOperator(V, params, quad, eval_radius);
}

// ---------------------------------------------------------------------------
// Incident fields

IncidentSource IncidentSource::plane(std::vector<double> theta) {
    IncidentSource src;
    src.theta = std::move(theta);
    return src;
}

namespace {

void check_unit(std::span<const double> v, const char* what) {
    double n2 = 0.0;
    for (double x : v)
        n2 += x * x;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
        throw DomainError(std::string(what) + " is not a unit vector (|v| = " + fmt(std::sqrt(n2)) + ")");
}

} // namespace

ComplexField incident_field(const ProblemParams& params, const IncidentSource& src,
                            std::span<const double> points) {
    const int d = params.d;
    const auto ud = static_cast<std::size_t>(d);
    if (points.size() % ud != 0)
        throw DomainError("incident_field: point array is not a multiple of d");
    ComplexField out;
    out.d = d;
    out.role = FieldRole::incident;
    out.points.assign(points.begin(), points.end());
    const std::size_t n = points.size() / ud;
    out.values.assign(n, cplx{});
    const double k = params.k;
    auto wave = [&](const double* th, std::size_t i) {
        double ph = 0.0;
        for (std::size_t a = 0; a < ud; ++a)
            ph += points[i * ud + a] * th[a];
        return std::polar(1.0, k * ph);
    };
    if (!src.herglotz) {
        if (src.theta.size() != ud)
            throw DomainError("incident_field: direction has wrong dimension");
        check_unit(src.theta, "incident direction");
        for (std::size_t i = 0; i < n; ++i)
            out.values[i] = wave(src.theta.data(), i);
        return out;
    }
    const std::size_t m = src.density.size();
    if (src.nodes.size() != m * ud || src.weights.size() != m)
        throw DomainError("incident_field: Herglotz nodes, density and weights disagree in size");
    for (std::size_t j = 0; j < m; ++j)
        check_unit({src.nodes.data() + j * ud, ud}, "Herglotz node");
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc{};
        for (std::size_t j = 0; j < m; ++j)
            acc += src.weights[j] * src.density[j] * wave(src.nodes.data() + j * ud, i);
        out.values[i] = acc;
    }
    return out;
}

ComplexField incident_field(const ProblemParams& params, const IncidentSource& src,
                            const PotentialGrid& grid) {
    const auto grid_field = ComplexField::on_grid(grid, FieldRole::incident);
    return incident_field(params, src, grid_field.points);
}

// ---------------------------------------------------------------------------
// Solver

std::vector<cplx> apply_scattering(const LSOperator& op, std::span<const cplx> x) {
    const auto& V = op.potential();
    std::vector<cplx> vx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        vx[i] = V.samples[i] * x[i];
    std::vector<cplx> y(x.size());
    op.apply(vx, y);
    return y;
}

struct LSSolver::Dense {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    Eigen::MatrixXcd M;
};

namespace {

using Vec = Eigen::VectorXcd;

// z -> z - V_S (A z)_S on the support.
struct ContrastOperator {
    const LSOperator& op;
    mutable std::vector<cplx> full, out;

    explicit ContrastOperator(const LSOperator& o) : op(o), full(o.size()), out(o.size()) {}

    Vec operator()(const Vec& z) const {
        const auto& S = op.support();
        const auto& V = op.potential().samples;
        std::fill(full.begin(), full.end(), cplx{});
        for (std::size_t i = 0; i < S.size(); ++i)
            full[S[i]] = z[static_cast<Eigen::Index>(i)];
        op.apply(full, out);
        Vec r(z.size());
        for (std::size_t i = 0; i < S.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = z[static_cast<Eigen::Index>(i)] - V[S[i]] * out[S[i]];
        return r;
    }
};

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
int gmres(const ContrastOperator& M, const Vec& b, Vec& x, double tol, int restart, int max_iter) {
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        return 0;
    }
    const auto n = b.size();
    int iters = 0;
    const int m = restart;
    Eigen::MatrixXcd Q(n, m + 1);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<cplx> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m));
    while (iters < max_iter) {
        Vec r = b - M(x);
        double beta = r.norm();
        if (beta <= tol * bnorm)
            return iters;
        Q.col(0) = r / beta;
        Vec g = Vec::Zero(m + 1);
        g[0] = beta;
        H.setZero();
        int j = 0;
        for (; j < m && iters < max_iter; ++j, ++iters) {
            Vec w = M(Q.col(j));
            for (int i = 0; i <= j; ++i) {
                H(i, j) = Q.col(i).dot(w);
                w -= H(i, j) * Q.col(i);
            }
            H(j + 1, j) = w.norm();
            if (std::abs(H(j + 1, j)) > 0.0)
                Q.col(j + 1) = w / H(j + 1, j);
            for (int i = 0; i < j; ++i) {
                const cplx a = H(i, j), c = H(i + 1, j);
                H(i, j) = std::conj(cs[static_cast<std::size_t>(i)]) * a +
                          std::conj(sn[static_cast<std::size_t>(i)]) * c;
                H(i + 1, j) = -sn[static_cast<std::size_t>(i)] * a + cs[static_cast<std::size_t>(i)] * c;
            }
            const cplx a = H(j, j), c = H(j + 1, j);
            const double den = std::sqrt(std::norm(a) + std::norm(c));
            const cplx cj = den == 0.0 ? cplx{1.0} : a / den;
            const cplx sj = den == 0.0 ? cplx{} : c / den;
            cs[static_cast<std::size_t>(j)] = cj;
            sn[static_cast<std::size_t>(j)] = sj;
            H(j, j) = std::conj(cj) * a + std::conj(sj) * c;
            H(j + 1, j) = 0.0;
            g[j + 1] = -sj * g[j];
            g[j] = std::conj(cj) * g[j];
            if (std::abs(g[j + 1]) <= tol * bnorm) {
                ++j;
                ++iters;
                break;
            }
        }
        Vec y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        x += Q.leftCols(j) * y;
    }
    return iters;
}

} // namespace

LSSolver::LSSolver(const LSOperator& op, SolveOptions opts) : op_(&op), opts_(opts) {
    const auto& S = op.support();
    if (S.empty() || S.size() > opts_.dense_limit)
        return;
    dense_ = std::make_unique<Dense>();
    Eigen::MatrixXcd A = op.support_matrix();
    const auto m = static_cast<Eigen::Index>(S.size());
    dense_->M = Eigen::MatrixXcd::Identity(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        dense_->M.row(i) -= op.potential().samples[S[static_cast<std::size_t>(i)]] * A.row(i);
    dense_->lu.compute(dense_->M);
    const double rc = dense_->lu.rcond();
    if (!(rc >= opts_.rcond_limit))
        throw InteriorEigenvalue("forward", "Lippmann-Schwinger system is numerically singular (rcond = " +
                                                fmt(rc) + "); k^{2s} may be an eigenvalue of (-Delta)^s - V");
}

LSSolver::~LSSolver() = default;
LSSolver::LSSolver(LSSolver&&) noexcept = default;

SolveResult LSSolver::solve(const ComplexField& u_in) const {
    const LSOperator& op = *op_;
    const auto& V = op.potential();
    const std::size_t n = op.size();
    if (u_in.values.size() != n)
        throw DomainError("solve_total_field: incident field is not sampled on the potential grid");
    SolveResult res;
    res.total = u_in;
    res.total.role = FieldRole::total;
    res.scattered = u_in;
    res.scattered.role = FieldRole::scattered;
    const auto& S = op.support();
    if (S.empty()) {
        std::fill(res.scattered.values.begin(), res.scattered.values.end(), cplx{});
        res.method = "trivial";
        return res;
    }

    const auto m = static_cast<Eigen::Index>(S.size());
    Vec b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto g = S[static_cast<std::size_t>(i)];
        b[i] = V.samples[g] * u_in.values[g];
    }
    ContrastOperator M(op);
    Vec z = Vec::Zero(m);
    if (dense_) {
        z = dense_->lu.solve(b);
        for (int it = 0; it < 2; ++it) {
            const Vec r = b - dense_->M * z;
            z += dense_->lu.solve(r);
        }
        res.method = "dense_lu";
    } else {
        res.iterations = gmres(M, b, z, opts_.gmres_tol, opts_.gmres_restart, opts_.max_iterations);
        res.method = "gmres";
    }

    std::vector<cplx> zf(n, cplx{}), az(n);
    for (Eigen::Index i = 0; i < m; ++i)
        zf[S[static_cast<std::size_t>(i)]] = z[i];
    op.apply(zf, az);
    for (std::size_t i = 0; i < n; ++i) {
        res.scattered.values[i] = az[i];
        res.total.values[i] = u_in.values[i] + az[i];
    }

    const auto back = apply_scattering(op, res.total.values);
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        rmax = std::max(rmax, std::abs(res.total.values[i] - back[i] - u_in.values[i]));
    const double scale = inf_norm(u_in.values);
    res.residual = scale > 0.0 ? rmax / scale : rmax;
    if (!(res.residual <= opts_.residual_limit)) {
        if (!dense_ && res.iterations >= opts_.max_iterations)
            throw NonConvergence("forward", "GMRES did not reach the residual target in " +
                                                std::to_string(res.iterations) + " iterations",
                                 res.residual);
        throw ResidualTooLarge("forward", "Lippmann-Schwinger residual " + fmt(res.residual) +
                                              " exceeds " + fmt(opts_.residual_limit));
    }
    return res;
}

SolveResult solve_total_field(const LSOperator& op, const ComplexField& u_in, const SolveOptions& opts) {
    return LSSolver(op, opts).solve(u_in);
}

double neumann_margin(const LSOperator& op, std::uint64_t seed, int steps, int starts) {
    const auto& S = op.support();
    if (S.empty())
        return 0.0;
    const auto& V = op.potential().samples;
    const std::size_t n = op.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<cplx> full(n), out(n);
    double best = 0.0;
    for (int t = 0; t < starts; ++t) {
        std::vector<cplx> z(S.size());
        for (auto& v : z)
            v = {nd(rng), nd(rng)};
        double ratio = 0.0;
        for (int it = 0; it < steps; ++it) {
            double zn = 0.0;
            for (const auto& v : z)
                zn += std::norm(v);
            zn = std::sqrt(zn);
            if (zn == 0.0)
                break;
            std::fill(full.begin(), full.end(), cplx{});
            for (std::size_t i = 0; i < S.size(); ++i)
                full[S[i]] = z[i] / zn;
            op.apply(full, out);
            double wn = 0.0;
            for (std::size_t i = 0; i < S.size(); ++i) {
                z[i] = V[S[i]] * out[S[i]];
                wn += std::norm(z[i]);
            }
            ratio = std::sqrt(wn);
        }
        best = std::max(best, ratio);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Off-grid evaluation

void scattered_sum(const LSOperator& op, std::span<const cplx> vu, std::span<const double> points,
                   std::span<cplx> out) {
    const auto& V = op.potential();
    const int d = V.d;
    const auto ud = static_cast<std::size_t>(d);
    const std::size_t npts = points.size() / ud;
    if (vu.size() != op.size() || out.size() != npts)
        throw DomainError("scattered_sum: size mismatch");
    const auto& S = op.support();
    std::vector<std::vector<double>> ys(S.size(), std::vector<double>(ud));
    for (std::size_t j = 0; j < S.size(); ++j)
        V.point(S[j], ys[j].data());

#pragma omp parallel
    {
        std::unordered_map<std::uint64_t, cplx> cache;
        std::vector<int> off(ud), scratch;
        std::vector<double> delta(ud);
#pragma omp for schedule(dynamic, 16)
        for (std::size_t p = 0; p < npts; ++p) {
            const double* x = points.data() + p * ud;
            // Lattice-aligned targets reuse class weights.
            bool lattice = true;
            for (std::size_t a = 0; a < ud && lattice; ++a) {
                const double t = (x[a] - V.origin[a]) / V.h;
                lattice = std::abs(t - std::round(t)) <= 1e-9;
            }
            cplx acc{};
            for (std::size_t j = 0; j < S.size(); ++j) {
                for (std::size_t a = 0; a < ud; ++a)
                    delta[a] = x[a] - ys[j][a];
                cplx w;
                if (lattice) {
                    bool inside = true;
                    for (std::size_t a = 0; a < ud; ++a) {
                        off[a] = static_cast<int>(std::lround(delta[a] / V.h));
                        inside = inside && std::abs(off[a]) < V.shape[a];
                    }
                    if (inside) {
                        w = op.weight(off);
                    } else {
                        const auto key = class_key(off, scratch);
                        auto it = cache.find(key);
                        if (it == cache.end())
                            it = cache.emplace(key, class_weight(op.kernel(), V.h, off)).first;
                        w = it->second;
                    }
                } else {
                    w = op.weight_at(delta);
                }
                acc += w * vu[S[j]];
            }
            out[p] = acc;
        }
    }
}

ComplexField evaluate_scattered_at(const LSOperator& op, const ComplexField& u_total,
                                   std::span<const double> points) {
    const auto& V = op.potential();
    const auto ud = static_cast<std::size_t>(V.d);
    if (u_total.values.size() != op.size())
        throw DomainError("evaluate_scattered_at: total field is not sampled on the potential grid");
    if (points.size() % ud != 0)
        throw DomainError("evaluate_scattered_at: point array is not a multiple of d");
    ComplexField out;
    out.d = V.d;
    out.role = FieldRole::scattered;
    out.points.assign(points.begin(), points.end());
    const std::size_t npts = points.size() / ud;
    out.values.assign(npts, cplx{});
    if (op.support().empty())
        return out;
    const Box box = V.support_box();
    for (std::size_t p = 0; p < npts; ++p) {
        const double dist = box.distance(points.subspan(p * ud, ud));
        if (dist < V.h * (1.0 - 1e-9))
            throw PointInsideSupport("evaluate_scattered_at: point " + std::to_string(p) +
                                     " lies within h of the support box (distance " + fmt(dist) + ")");
    }
    std::vector<cplx> vu(op.size());
    for (std::size_t i = 0; i < vu.size(); ++i)
        vu[i] = V.samples[i] * u_total.values[i];
    scattered_sum(op, vu, points, out.values);
    return out;
}

} // namespace fracscat
