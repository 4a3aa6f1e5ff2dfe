#include "fracscat/farfield.hpp"

#include "fracscat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <tuple>

namespace fracscat {

namespace {

constexpr double pi = std::numbers::pi;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

double sphere_measure(int d) { return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d); }

void check_direction(std::span<const double> v, int d, const char* what) {
    if (static_cast<int>(v.size()) != d)
        throw FormatError(std::string(what) + " has " + std::to_string(v.size()) + " components, expected " +
                          std::to_string(d));
    double n2 = 0.0;
    for (double x : v)
        n2 += x * x;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
        throw DomainError(std::string(what) + " is not a unit vector");
}

} // namespace

std::vector<double> direction_set(int d, int n, double angle_offset) {
    if (n < 1)
        throw DomainError("direction_set: need at least one direction");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(d * n));
    if (d == 2) {
        for (int j = 0; j < n; ++j) {
            const double a = angle_offset + 2.0 * pi * j / n;
            out.push_back(std::cos(a));
            out.push_back(std::sin(a));
        }
        return out;
    }
    if (d == 3) {
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < n; ++j) {
            const double z = 1.0 - (2.0 * j + 1.0) / n;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = angle_offset + golden * j;
            out.push_back(rho * std::cos(a));
            out.push_back(rho * std::sin(a));
            out.push_back(z);
        }
        return out;
    }
    throw DomainError("direction_set: only d = 2 and d = 3 are supported");
}

std::vector<double> direction_weights(int d, int n) {
    return std::vector<double>(static_cast<std::size_t>(n), sphere_measure(d) / n);
}

void FarFieldSet::validate() const {
    const int d = meta.d;
    std::map<std::vector<double>, std::size_t> keys;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        check_direction(r.xhat, d, "record xhat");
        check_direction(r.theta, d, "record theta");
        if (!(r.k > 0.0) || !std::isfinite(r.k))
            throw FormatError("record " + std::to_string(i) + ": k must be positive and finite");
        if (!std::isfinite(r.amp.real()) || !std::isfinite(r.amp.imag()))
            throw FormatError("record " + std::to_string(i) + ": amplitude is not finite");
        std::vector<double> key{r.k};
        key.insert(key.end(), r.xhat.begin(), r.xhat.end());
        key.insert(key.end(), r.theta.begin(), r.theta.end());
        if (!keys.emplace(std::move(key), i).second)
            throw FormatError("record " + std::to_string(i) + ": duplicate (k, xhat, theta) key");
    }
}

std::vector<cplx> far_field_amplitude(const PotentialGrid& V, const ComplexField& u_total,
                                      const ProblemParams& params, std::span<const double> xhats,
                                      AmplitudeWeights weights) {
    const int d = V.d;
    const auto ud = static_cast<std::size_t>(d);
    if (params.d != d)
        throw DomainError("far_field_amplitude: grid dimension differs from params.d");
    if (u_total.values.size() != V.size())
        throw DomainError("far_field_amplitude: total field is not sampled on the potential grid");
    if (xhats.size() % ud != 0)
        throw DomainError("far_field_amplitude: direction array is not a multiple of d");
    const std::size_t m = xhats.size() / ud;
    for (std::size_t i = 0; i < m; ++i)
        check_direction(xhats.subspan(i * ud, ud), d, "xhat");

    std::vector<std::size_t> S;
    for (std::size_t j = 0; j < V.size(); ++j)
        if (V.samples[j] != 0.0)
            S.push_back(j);
    std::vector<double> ys(S.size() * ud);
    std::vector<cplx> vu(S.size());
    for (std::size_t j = 0; j < S.size(); ++j) {
        V.point(S[j], ys.data() + j * ud);
        vu[j] = V.samples[S[j]] * u_total.values[S[j]];
    }
    const double k = params.k;
    const double hd = std::pow(V.h, d);
    std::vector<cplx> out(m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
        const double* xh = xhats.data() + i * ud;
        double w = hd;
        if (weights == AmplitudeWeights::cell_average)
            for (std::size_t a = 0; a < ud; ++a)
                w *= sinc(0.5 * k * xh[a] * V.h);
        cplx acc{};
        for (std::size_t j = 0; j < S.size(); ++j) {
            double ph = 0.0;
            for (std::size_t a = 0; a < ud; ++a)
                ph += xh[a] * ys[j * ud + a];
            acc += std::polar(1.0, -k * ph) * vu[j];
        }
        out[i] = w * acc;
    }
    return out;
}

std::vector<cplx> herglotz_amplitude(const std::vector<std::vector<cplx>>& amps,
                                     std::span<const cplx> density, std::span<const double> weights) {
    if (amps.size() != density.size() || amps.size() != weights.size())
        throw DomainError("herglotz_amplitude: amplitude, density and weight counts differ");
    if (amps.empty())
        return {};
    std::vector<cplx> out(amps.front().size(), cplx{});
    for (std::size_t m = 0; m < amps.size(); ++m) {
        if (amps[m].size() != out.size())
            throw DomainError("herglotz_amplitude: ragged amplitude table");
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += weights[m] * density[m] * amps[m][i];
    }
    return out;
}

AsymptoticMatch asymptotic_match(const ProblemParams& params, const ComplexField& scattered,
                                 std::span<const cplx> amplitudes) {
    const int d = params.d;
    if (scattered.d != d)
        throw DomainError("asymptotic_match: sample dimension differs from params.d");
    if (scattered.size() != amplitudes.size())
        throw DomainError("asymptotic_match: sample and amplitude counts differ");
    const cplx P0 = far_field_prefactor(params);
    const cplx P = params.branch == Branch::outgoing ? P0 : std::conj(P0);
    const double k = params.k;
    double amax = 0.0;
    for (const auto& a : amplitudes)
        amax = std::max(amax, std::abs(a));
    AsymptoticMatch res;
    res.error.assign(amplitudes.size(), 0.0);
    res.skipped.assign(amplitudes.size(), false);
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        const auto x = scattered.point(i);
        double R2 = 0.0;
        for (double v : x)
            R2 += v * v;
        const double R = std::sqrt(R2);
        if (R < 10.0 / k * (1.0 - 1e-12))
            throw DomainError("asymptotic_match: sample radius below 10/k");
        if (std::abs(amplitudes[i]) <= 1e-14 * amax || amax == 0.0) {
            res.skipped[i] = true;
            continue;
        }
        const double decay = std::pow(R, -0.5 * (d - 1));
        const cplx predicted = P * std::polar(1.0, branch_sign(params.branch) * k * R) * decay * amplitudes[i];
        res.error[i] = std::abs(scattered.values[i] - predicted) / std::abs(P * amplitudes[i] * decay);
    }
    return res;
}

double symmetry_check(const FarFieldSet& ff) {
    auto key = [](double k, const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<long long> kk{std::llround(k * 1e9)};
        for (double v : a)
            kk.push_back(std::llround(v * 1e9));
        for (double v : b)
            kk.push_back(std::llround(v * 1e9));
        return kk;
    };
    std::map<std::vector<long long>, std::size_t> index;
    for (std::size_t i = 0; i < ff.records.size(); ++i) {
        const auto& r = ff.records[i];
        index.emplace(key(r.k, r.xhat, r.theta), i);
    }
    double worst = 0.0;
    std::size_t pairs = 0;
    for (const auto& r : ff.records) {
        std::vector<double> mx(r.xhat.size()), mt(r.theta.size());
        for (std::size_t a = 0; a < mx.size(); ++a) {
            mx[a] = -r.xhat[a];
            mt[a] = -r.theta[a];
        }
        const auto it = index.find(key(r.k, mx, mt));
        if (it == index.end())
            continue;
        ++pairs;
        worst = std::max(worst, std::abs(r.amp - ff.records[it->second].amp));
    }
    if (pairs == 0)
        throw DomainError("symmetry_check: no (xhat, theta) / (-xhat, -theta) pairs in the set");
    return worst;
}

namespace {

FarFieldSet synthesize(const PotentialGrid& V, const ProblemParams& params, std::span<const double> thetas,
                       std::span<const double> xhats, const SynthesisOptions& opts, bool paired) {
    const auto ud = static_cast<std::size_t>(params.d);
    if (thetas.size() % ud != 0 || xhats.size() % ud != 0)
        throw DomainError("synthesize_far_field: direction arrays are not multiples of d");
    const std::size_t nt = thetas.size() / ud, nx = xhats.size() / ud;
    if (paired && nt != nx)
        throw DomainError("synthesize_pairs: theta and xhat counts differ");
    FarFieldSet ff;
    ff.meta.d = params.d;
    ff.meta.s = params.s;
    const LSOperator op(V, params, opts.quad);
    const LSSolver solver(op, opts.solve);
    const auto grid_pts = ComplexField::on_grid(V, FieldRole::incident).points;
    for (std::size_t t = 0; t < nt; ++t) {
        std::vector<double> th(thetas.begin() + static_cast<std::ptrdiff_t>(t * ud),
                               thetas.begin() + static_cast<std::ptrdiff_t>((t + 1) * ud));
        const auto uin = incident_field(params, IncidentSource::plane(th), grid_pts);
        const auto sol = solver.solve(uin);
        const auto xs = paired ? xhats.subspan(t * ud, ud) : xhats;
        const auto amps = far_field_amplitude(V, sol.total, params, xs, opts.weights);
        for (std::size_t i = 0; i < amps.size(); ++i) {
            FarFieldRecord r;
            r.k = params.k;
            r.xhat.assign(xs.begin() + static_cast<std::ptrdiff_t>(i * ud),
                          xs.begin() + static_cast<std::ptrdiff_t>((i + 1) * ud));
            r.theta = th;
            r.amp = amps[i];
            ff.records.push_back(std::move(r));
        }
    }
    return ff;
}

} // namespace

FarFieldSet synthesize_far_field(const PotentialGrid& V, const ProblemParams& params,
                                 std::span<const double> thetas, std::span<const double> xhats,
                                 const SynthesisOptions& opts) {
    return synthesize(V, params, thetas, xhats, opts, false);
}

FarFieldSet synthesize_pairs(const PotentialGrid& V, const ProblemParams& params,
                             std::span<const double> thetas, std::span<const double> xhats,
                             const SynthesisOptions& opts) {
    return synthesize(V, params, thetas, xhats, opts, true);
}

} // namespace fracscat
