#include "fracscat/born.hpp"

#include "fracscat/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace fracscat {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Least-squares slope of log y against log x over positive entries.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2)
        return 0.0;
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

} // namespace

LebesgueExponents pick_exponents(int d, double s, double factor) {
    if (d < 3)
        throw DomainError("pick_exponents: d must be at least 3, got " + std::to_string(d));
    const double lo = d / (d + 1.0);
    const double hi = std::min(1.0, 0.5 * d);
    if (!(s > lo && s < hi))
        throw DomainError("pick_exponents: s must lie in (" + num(lo) + ", " + num(hi) + "), got " + num(s));
    if (!(factor > 0.0))
        throw DomainError("pick_exponents: factor must be positive");
    const double iq = (d - factor * s) / (2.0 * d);
    const double ip = 0.5 * (std::max(2.0 / (d + 1.0) + iq, (d + 1.0) / (2.0 * d)) + (2.0 * s / d + iq));
    LebesgueExponents e;
    e.p = 1.0 / ip;
    e.q = 1.0 / iq;
    e.decay = d * (ip - iq) - 2.0 * s;
    std::string why;
    if (!exponents_admissible(d, s, e, &why))
        throw DomainError("pick_exponents: factor " + num(factor) + " violates " + why);
    return e;
}

bool exponents_admissible(int d, double s, const LebesgueExponents& e, std::string* why) {
    const double ip = e.inv_p(), iq = e.inv_q();
    const double gap = ip - iq;
    const double tol = 1e-14;
    auto fail = [why](const char* msg) {
        if (why)
            *why = msg;
        return false;
    };
    if (!(e.p > 1.0 && e.q > e.p))
        return fail("1 < p < q");
    if (gap < 2.0 / (d + 1.0) - tol)
        return fail("1/p - 1/q >= 2/(d+1)");
    if (gap > 2.0 * s / d + tol)
        return fail("1/p - 1/q <= 2s/d");
    if (!(ip > (d + 1.0) / (2.0 * d)))
        return fail("1/p > (d+1)/(2d)");
    if (!(iq < (d - 1.0) / (2.0 * d)))
        return fail("1/q < (d-1)/(2d)");
    if (!(e.decay < 0.0))
        return fail("decay < 0");
    return true;
}

std::vector<double> orthogonal_direction(std::span<const double> m) {
    const std::size_t d = m.size();
    std::vector<double> out(d, 0.0);
    const double mn = norm(m);
    if (d == 0)
        return out;
    if (mn == 0.0) {
        out[d - 1] = 1.0;
        return out;
    }
    if (d == 2) {
        out[0] = -m[1] / mn;
        out[1] = m[0] / mn;
        return out;
    }
    // Gram-Schmidt against the axis least aligned with m.
    std::size_t axis = 0;
    for (std::size_t a = 1; a < d; ++a)
        if (std::abs(m[a]) < std::abs(m[axis]))
            axis = a;
    out[axis] = 1.0;
    const double c = m[axis] / (mn * mn);
    for (std::size_t a = 0; a < d; ++a)
        out[a] -= c * m[a];
    const double on = norm(out);
    for (double& v : out)
        v /= on;
    return out;
}

ProbeTriple probe_geometry(std::span<const double> m, double l_magnitude, std::span<const double> l_direction) {
    const std::size_t d = m.size();
    if (d < 2 || l_direction.size() != d)
        throw DomainError("probe_geometry: m and l_direction must share a dimension >= 2");
    if (!(l_magnitude > 0.0))
        throw DomainError("probe_geometry: |l| must be positive");
    const double dn = norm(l_direction);
    if (std::abs(dn - 1.0) > 1e-12)
        throw DomainError("probe_geometry: l_direction is not a unit vector");
    const double mn = norm(m);
    if (std::abs(dot(m, l_direction)) > 1e-12 * std::max(1.0, mn))
        throw DomainError("probe_geometry: l_direction is not orthogonal to m");
    ProbeTriple t;
    t.m.assign(m.begin(), m.end());
    t.l.resize(d);
    t.rho.resize(d);
    t.theta.resize(d);
    t.xhat.resize(d);
    t.k = std::hypot(mn, l_magnitude);
    for (std::size_t a = 0; a < d; ++a) {
        t.l[a] = l_magnitude * l_direction[a];
        t.rho[a] = m[a] + t.l[a];
        t.theta[a] = (m[a] - t.l[a]) / t.k;
        t.xhat[a] = -t.rho[a] / t.k;
    }
    return t;
}

std::vector<FourierSample> born_samples(const FarFieldSet& ff) {
    std::vector<FourierSample> out;
    out.reserve(ff.records.size());
    for (const auto& r : ff.records) {
        FourierSample fs;
        fs.xi.resize(r.xhat.size());
        for (std::size_t a = 0; a < r.xhat.size(); ++a)
            fs.xi[a] = r.k * (r.xhat[a] - r.theta[a]);
        fs.value = r.amp;
        fs.k_used = r.k;
        out.push_back(std::move(fs));
    }
    return out;
}

cplx fourier_quadrature(const PotentialGrid& V, std::span<const double> xi) {
    const auto d = static_cast<std::size_t>(V.d);
    if (xi.size() != d)
        throw DomainError("fourier_quadrature: frequency dimension differs from the grid");
    const double vol = std::pow(V.h, V.d);
    std::vector<double> y(d);
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < V.size(); ++i) {
        if (V.samples[i] == 0.0)
            continue;
        V.point(i, y.data());
        acc += V.samples[i] * std::polar(1.0, -dot(xi, y));
    }
    return vol * acc;
}

PotentialGrid reconstruct_potential(std::span<const FourierSample> samples, const TargetGrid& target,
                                    const ReconstructionOptions& opts) {
    const int d = target.d;
    const auto ud = static_cast<std::size_t>(d);
    if (d < 1 || target.shape.size() != ud || target.origin.size() != ud)
        throw DomainError("reconstruct_potential: target shape/origin do not match d");
    if (!(target.h > 0.0))
        throw DomainError("reconstruct_potential: target spacing must be positive");
    for (int n : target.shape)
        if (n < 2 || n % 2 != 0)
            throw DomainError("reconstruct_potential: target extents must be even and >= 2");
    if (!(opts.reg >= 0.0) || !(opts.window_cells > 0.0) || !(opts.window_shape > 0.0))
        throw DomainError("reconstruct_potential: reg must be >= 0 and the window positive");

    std::vector<double> dxi(ud);
    std::size_t N = 1;
    for (std::size_t a = 0; a < ud; ++a) {
        dxi[a] = 2.0 * std::numbers::pi / (target.shape[a] * target.h);
        N *= static_cast<std::size_t>(target.shape[a]);
    }
    // Node m (m_a in [-n/2, n/2)) in FFT ordering.
    auto node_index = [&](std::span<const long> m) {
        std::size_t idx = 0;
        for (std::size_t a = 0; a < ud; ++a) {
            const long n = target.shape[a];
            idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>((m[a] % n + n) % n);
        }
        return idx;
    };
    auto in_lattice = [&](std::span<const long> m) {
        for (std::size_t a = 0; a < ud; ++a)
            if (m[a] < -target.shape[a] / 2 || m[a] >= target.shape[a] / 2)
                return false;
        return true;
    };

    // Working sample list in lattice units, mirrored when symmetrizing.
    struct Pt {
        std::vector<double> u;   // xi_a / dxi_a
        cplx v;
    };
    std::vector<Pt> pts;
    pts.reserve(samples.size() * (opts.symmetrize ? 2 : 1));
    double rmax = 0.0;
    for (const auto& s : samples) {
        if (s.xi.size() != ud)
            throw DomainError("reconstruct_potential: sample dimension differs from the target");
        if (!std::isfinite(s.value.real()) || !std::isfinite(s.value.imag()))
            throw DomainError("reconstruct_potential: non-finite sample value");
        Pt p{std::vector<double>(ud), s.value};
        for (std::size_t a = 0; a < ud; ++a)
            p.u[a] = s.xi[a] / dxi[a];
        pts.push_back(p);
        if (opts.symmetrize) {
            for (double& v : p.u)
                v = -v;
            p.v = std::conj(p.v);
            pts.push_back(std::move(p));
        }
    }

    // Exact-node assignments and window accumulation.
    const std::size_t nb = ud + 1;
    std::vector<cplx> exact_sum(N, 0.0);
    std::vector<int> exact_count(N, 0);
    std::vector<Eigen::MatrixXd> normal(N);
    std::vector<Eigen::VectorXcd> rhs(N);
    std::vector<double> wsum(N, 0.0);
    std::vector<cplx> wval(N, 0.0);
    std::vector<int> wcount(N, 0);
    const double sigma = 0.25 * opts.window_shape * opts.window_cells;
    const int reach = static_cast<int>(std::ceil(opts.window_cells));
    std::vector<long> m(ud), base(ud);
    std::size_t in_range = 0;
    for (const auto& p : pts) {
        bool exact = true;
        double r2 = 0.0;
        for (std::size_t a = 0; a < ud; ++a) {
            const double rn = std::round(p.u[a]);
            m[a] = static_cast<long>(rn);
            if (std::abs(p.u[a] - rn) > 1e-9)
                exact = false;
            const double x = p.u[a] * dxi[a];
            r2 += x * x;
        }
        bool inside = true;
        for (std::size_t a = 0; a < ud; ++a)
            if (p.u[a] < -0.5 * target.shape[a] - 0.5 || p.u[a] > 0.5 * target.shape[a] - 0.5)
                inside = false;
        if (!inside)
            continue;
        ++in_range;
        rmax = std::max(rmax, std::sqrt(r2));
        if (exact && in_lattice(m)) {
            const std::size_t idx = node_index(m);
            exact_sum[idx] += p.v;
            ++exact_count[idx];
            continue;
        }
        for (std::size_t a = 0; a < ud; ++a)
            base[a] = static_cast<long>(std::floor(p.u[a])) - reach + 1;
        const std::size_t span = static_cast<std::size_t>(2 * reach);
        std::size_t total = 1;
        for (std::size_t a = 0; a < ud; ++a)
            total *= span;
        std::vector<double> delta(ud);
        for (std::size_t c = 0; c < total; ++c) {
            std::size_t rem = c;
            double dist2 = 0.0;
            for (std::size_t a = ud; a-- > 0;) {
                m[a] = base[a] + static_cast<long>(rem % span);
                rem /= span;
                delta[a] = p.u[a] - static_cast<double>(m[a]);
                dist2 += delta[a] * delta[a];
            }
            if (dist2 > opts.window_cells * opts.window_cells || !in_lattice(m))
                continue;
            const std::size_t idx = node_index(m);
            const double w = std::exp(-0.5 * dist2 / (sigma * sigma));
            if (normal[idx].size() == 0) {
                normal[idx] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
                rhs[idx] = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nb));
            }
            Eigen::VectorXd phi(static_cast<Eigen::Index>(nb));
            phi(0) = 1.0;
            for (std::size_t a = 0; a < ud; ++a)
                phi(static_cast<Eigen::Index>(a + 1)) = delta[a];
            normal[idx].noalias() += w * phi * phi.transpose();
            rhs[idx] += (w * p.v) * phi.cast<cplx>();
            wsum[idx] += w;
            wval[idx] += w * p.v;
            ++wcount[idx];
        }
    }

    if (!samples.empty()) {
        // Lattice nodes inside the sampled ball.
        std::size_t occupied = 0;
        std::vector<long> mm(ud);
        for (std::size_t idx = 0; idx < N; ++idx) {
            std::size_t rem = idx;
            double r2 = 0.0;
            for (std::size_t a = ud; a-- > 0;) {
                const long n = target.shape[a];
                long v = static_cast<long>(rem % static_cast<std::size_t>(n));
                rem /= static_cast<std::size_t>(n);
                if (v >= n / 2)
                    v -= n;
                const double x = static_cast<double>(v) * dxi[a];
                r2 += x * x;
            }
            if (std::sqrt(r2) <= rmax * (1.0 + 1e-12))
                ++occupied;
        }
        if (static_cast<double>(in_range) < 0.5 * static_cast<double>(occupied))
            throw CoverageError("born", std::to_string(in_range) + " samples for " + std::to_string(occupied) +
                                            " occupied lattice cells (need at least half)");
    }

    // Node values.
    std::vector<cplx> spec(N, 0.0);
    for (std::size_t idx = 0; idx < N; ++idx) {
        if (exact_count[idx] > 0) {
            spec[idx] = exact_sum[idx] / static_cast<double>(exact_count[idx]);
            continue;
        }
        if (wcount[idx] == 0)
            continue;
        const cplx constant = wval[idx] / (wsum[idx] + opts.reg);
        if (wcount[idx] < 2 * static_cast<int>(nb)) {
            spec[idx] = constant;
            continue;
        }
        Eigen::MatrixXd A = normal[idx];
        A.diagonal().array() += opts.reg;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
        if (ldlt.info() != Eigen::Success || !(dmin > 1e-6 * dmax)) {
            spec[idx] = constant;
            continue;
        }
        const Eigen::VectorXcd c = ldlt.solve(rhs[idx]);
        spec[idx] = c(0);
    }

    // V(x_j) = L^{-d} sum_m spec_m e^{i xi_m . x_j}, x_j = origin + h j.
    double volume = 1.0;
    for (std::size_t a = 0; a < ud; ++a)
        volume *= target.shape[a] * target.h;
    {
        std::vector<long> mm(ud);
        for (std::size_t idx = 0; idx < N; ++idx) {
            if (spec[idx] == 0.0)
                continue;
            std::size_t rem = idx;
            double phase = 0.0;
            for (std::size_t a = ud; a-- > 0;) {
                const long n = target.shape[a];
                long v = static_cast<long>(rem % static_cast<std::size_t>(n));
                rem /= static_cast<std::size_t>(n);
                if (v >= n / 2)
                    v -= n;
                phase += static_cast<double>(v) * dxi[a] * target.origin[a];
            }
            spec[idx] *= std::polar(1.0 / volume, phase);
        }
    }
    FftPlan plan(target.shape);
    plan.inverse(spec);

    PotentialGrid est;
    est.d = d;
    est.origin = target.origin;
    est.h = target.h;
    est.shape = target.shape;
    est.samples.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        est.samples[i] = spec[i].real();
    return est;
}

std::vector<FourierSample> lattice_probe_samples(const AmplitudeOracle& forward, const ProblemParams& params,
                                                 const TargetGrid& target) {
    params.validate();
    const auto ud = static_cast<std::size_t>(target.d);
    if (params.d != target.d || target.shape.size() != ud)
        throw DomainError("lattice_probe_samples: target dimension differs from params.d");
    std::vector<double> dxi(ud);
    std::size_t N = 1;
    for (std::size_t a = 0; a < ud; ++a) {
        dxi[a] = 2.0 * std::numbers::pi / (target.shape[a] * target.h);
        N *= static_cast<std::size_t>(target.shape[a]);
    }
    const double k = params.k;
    std::vector<FourierSample> out;
    std::vector<long> m(ud);
    std::vector<double> xi(ud), half(ud), theta(ud), xhat(ud);
    for (std::size_t idx = 0; idx < N; ++idx) {
        std::size_t rem = idx;
        for (std::size_t a = ud; a-- > 0;) {
            const long n = target.shape[a];
            m[a] = static_cast<long>(rem % static_cast<std::size_t>(n)) - n / 2;
            rem /= static_cast<std::size_t>(n);
        }
        // Keep the half space whose first nonzero index is positive.
        long lead = 0;
        for (long v : m)
            if (v != 0) {
                lead = v;
                break;
            }
        if (lead < 0)
            continue;
        double r2 = 0.0;
        for (std::size_t a = 0; a < ud; ++a) {
            xi[a] = static_cast<double>(m[a]) * dxi[a];
            half[a] = -0.5 * xi[a];
            r2 += xi[a] * xi[a];
        }
        const double r = std::sqrt(r2);
        if (r > 2.0 * k * (1.0 + 1e-12))
            continue;
        const double mn = 0.5 * r;
        const double lmag = std::sqrt(std::max(0.0, k * k - mn * mn));
        if (lmag > 1e-12 * k) {
            const auto t = probe_geometry(half, lmag, orthogonal_direction(half));
            theta = t.theta;
            xhat = t.xhat;
        } else {
            for (std::size_t a = 0; a < ud; ++a) {
                theta[a] = half[a] / mn;
                xhat[a] = -half[a] / mn;
            }
        }
        FourierSample fs;
        fs.xi = xi;
        fs.value = forward(params, theta, xhat);
        fs.k_used = k;
        out.push_back(std::move(fs));
    }
    return out;
}

AmplitudeOracle make_forward_oracle(const PotentialGrid& V, const QuadratureSpec& quad, const SolveOptions& solve) {
    struct Entry {
        LSOperator op;
        std::unique_ptr<LSSolver> solver;
    };
    struct Cache {
        std::mutex mu;
        std::map<std::pair<double, double>, std::shared_ptr<Entry>> entries;
    };
    auto cache = std::make_shared<Cache>();
    auto grid_pts = std::make_shared<std::vector<double>>(ComplexField::on_grid(V, FieldRole::incident).points);
    return [V, quad, solve, cache, grid_pts](const ProblemParams& params, std::span<const double> theta,
                                             std::span<const double> xhat) -> cplx {
        std::shared_ptr<Entry> entry;
        {
            std::lock_guard lock(cache->mu);
            auto& slot = cache->entries[{params.k, params.s}];
            if (!slot) {
                auto fresh = std::make_shared<Entry>(Entry{assemble_ls_operator(V, params, quad), nullptr});
                fresh->solver = std::make_unique<LSSolver>(fresh->op, solve);
                slot = std::move(fresh);
            }
            entry = slot;
        }
        const auto uin = incident_field(params, IncidentSource::plane({theta.begin(), theta.end()}), *grid_pts);
        const auto sol = entry->solver->solve(uin);
        return far_field_amplitude(V, sol.total, params, xhat)[0];
    };
}

StudyResult convergence_study(const PotentialGrid& V_true, double s, std::span<const std::vector<double>> m_set,
                              std::span<const double> l_magnitudes, const AmplitudeOracle& forward) {
    StudyResult out;
    const int d = V_true.d;
    if (d >= 3)
        out.exponents = pick_exponents(d, s);
    for (std::size_t i = 1; i < l_magnitudes.size(); ++i)
        if (!(l_magnitudes[i] > l_magnitudes[i - 1]))
            throw DomainError("convergence_study: |l| values must be increasing");
    if (m_set.empty())
        throw DomainError("convergence_study: empty m set");

    std::vector<cplx> truth(m_set.size());
    double scale = 0.0;
    for (std::size_t j = 0; j < m_set.size(); ++j) {
        if (m_set[j].size() != static_cast<std::size_t>(d))
            throw DomainError("convergence_study: m dimension differs from the potential");
        std::vector<double> xi(m_set[j].size());
        for (std::size_t a = 0; a < xi.size(); ++a)
            xi[a] = 2.0 * m_set[j][a];
        truth[j] = fourier_quadrature(V_true, xi);
        scale = std::max(scale, std::abs(truth[j]));
    }

    std::vector<double> ks, errs;
    for (double lmag : l_magnitudes) {
        StudyRow row;
        row.l_magnitude = lmag;
        try {
            for (std::size_t j = 0; j < m_set.size(); ++j) {
                const auto dir = orthogonal_direction(m_set[j]);
                const auto t = probe_geometry(m_set[j], lmag, dir);
                ProblemParams params;
                params.d = d;
                params.s = s;
                params.k = t.k;
                const cplx est = std::conj(forward(params, t.theta, t.xhat));
                row.k = std::max(row.k, t.k);
                row.err_abs = std::max(row.err_abs, std::abs(est - truth[j]));
            }
            row.err_rel = scale > 0.0 ? row.err_abs / scale : 0.0;
            ks.push_back(row.k);
            errs.push_back(row.err_abs);
            row.slope_so_far = loglog_slope(ks, errs);
        } catch (const Error& e) {
            row.failed = true;
            row.message = e.what();
        }
        out.rows.push_back(std::move(row));
    }
    out.slope = loglog_slope(ks, errs);
    return out;
}

} // namespace fracscat
