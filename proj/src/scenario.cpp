#include "fracscat/scenario.hpp"

#include "fracscat/acceptance.hpp"
#include "fracscat/born.hpp"
#include "fracscat/errors.hpp"
#include "fracscat/io.hpp"
#include "fracscat/spectral.hpp"

#include <nlohmann/json.hpp>
#include <omp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace fracscat {

namespace {

using json = nlohmann::ordered_json;
using std::numbers::pi;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Typed access to one YAML mapping, remembering which keys were consumed.
class Section {
  public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
    }

    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
    void allow(const std::string& key) { seen_.insert(key); }

    template <class T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        if (!has(key))
            return;
        try {
            out = node_[key].as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(key), "cannot convert '" + scalar(key) + "' to the expected type");
        }
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(has(key) ? node_[key] : YAML::Node(), where(key));
    }

    /// Rejects keys that were never requested.
    void finish() const {
        if (!node_ || !node_.IsMap())
            return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key))
                throw ConfigError(where(key), "unknown key");
        }
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;

    std::string scalar(const std::string& key) const {
        const auto n = node_[key];
        if (n.IsScalar())
            return n.Scalar();
        std::ostringstream ss;
        ss << n;
        return ss.str();
    }
};

AmplitudeWeights parse_weights(const std::string& s, const std::string& field) {
    if (s == "midpoint")
        return AmplitudeWeights::midpoint;
    if (s == "cell_average")
        return AmplitudeWeights::cell_average;
    throw ConfigError(field, "expected midpoint or cell_average, got '" + s + "'");
}

std::string weights_name(AmplitudeWeights w) { return w == AmplitudeWeights::midpoint ? "midpoint" : "cell_average"; }

double lambda_of(const ProblemParams& p) { return 2.0 * pi / p.k; }

double potential_extent(const PotentialSpec& ps) {
    double c = 0.0;
    for (double v : ps.center)
        c = std::max(c, std::abs(v));
    return c + (ps.kind == "gaussian" ? ps.cutoff : ps.radius);
}

/// Potential grid for the scenario; `k_resolve` sets the wavelength used for automatic spacing.
PotentialGrid build_potential(const Scenario& sc, double k_resolve) {
    const auto& ps = sc.potential;
    if (ps.kind == "file") {
        auto f = read_potential(ps.path);
        if (f.grid.d != sc.params.d)
            throw ConfigError("potential.path", "file dimension " + std::to_string(f.grid.d) + " differs from params.d");
        f.grid.validate();
        return std::move(f.grid);
    }
    const int d = sc.params.d;
    const double extent = potential_extent(ps);
    double h = sc.grid.h;
    if (h == 0.0)
        h = std::min(2.0 * pi / k_resolve / sc.grid.points_per_wavelength, extent / 6.0);
    int n = sc.grid.n;
    if (n == 0) {
        n = 2 * static_cast<int>(std::ceil(extent / h)) + 3;
        if (n % 2 == 0)
            ++n;
    }
    std::vector<double> center = ps.center.empty() ? std::vector<double>(static_cast<std::size_t>(d), 0.0) : ps.center;
    const auto f = ps.kind == "gaussian" ? gaussian_bump(ps.amp, ps.sigma, ps.cutoff, center)
                                         : smooth_bump(ps.amp, ps.radius, center);
    auto V = PotentialGrid::centered(d, n, h, f);
    V.validate();
    return V;
}

std::vector<std::vector<double>> default_m_set(int d) {
    if (d == 2)
        return {{1.0, 0.0}, {0.0, 1.5}, {0.8, 0.8}, {-2.0, 1.0}};
    return {{1.0, 0.0, 0.0}, {0.0, 1.5, 0.0}, {0.8, 0.8, 0.8}, {0.0, 0.0, 2.5}};
}

TargetGrid target_of(const Scenario& sc) {
    const int d = sc.params.d;
    const auto ud = static_cast<std::size_t>(d);
    TargetGrid t;
    t.d = d;
    t.h = sc.invert.target_L / sc.invert.target_n;
    t.origin.assign(ud, -0.5 * sc.invert.target_L);
    t.shape.assign(ud, sc.invert.target_n);
    return t;
}

double relative_l2(const PotentialGrid& est, const PotentialGrid& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (est.samples[i] - ref.samples[i]) * (est.samples[i] - ref.samples[i]);
        den += ref.samples[i] * ref.samples[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string json_number_list(const std::vector<double>& v) {
    json j = json::array();
    for (double x : v)
        j.push_back(x);
    return j.dump();
}

} // namespace

std::string_view to_string(Task t) {
    switch (t) {
    case Task::greens: return "greens";
    case Task::forward: return "forward";
    case Task::farfield: return "farfield";
    case Task::invert: return "invert";
    case Task::resolvent_scan: return "resolvent-scan";
    case Task::verify: return "verify";
    case Task::inspect: return "inspect";
    }
    return "unknown";
}

Task parse_task(std::string_view name) {
    static const std::map<std::string, Task, std::less<>> table{
        {"greens", Task::greens},       {"greens-eval", Task::greens},         {"forward", Task::forward},
        {"farfield", Task::farfield},   {"invert", Task::invert},              {"resolvent-scan", Task::resolvent_scan},
        {"resolvent_scan", Task::resolvent_scan}, {"verify", Task::verify},    {"inspect", Task::inspect}};
    const auto it = table.find(name);
    if (it == table.end())
        throw ConfigError("task", "unknown task '" + std::string(name) + "'");
    return it->second;
}

std::string PotentialSpec::describe() const {
    std::ostringstream ss;
    if (kind == "file")
        ss << "file:" << path;
    else if (kind == "gaussian")
        ss << "gaussian(amp=" << num(amp) << ",sigma=" << num(sigma) << ",cutoff=" << num(cutoff) << ")";
    else
        ss << "bump(amp=" << num(amp) << ",radius=" << num(radius) << ")";
    if (kind != "file" && !center.empty())
        ss << "@" << json_number_list(center);
    return ss.str();
}

Scenario parse_scenario(const std::string& yaml, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml);
    } catch (const YAML::Exception& e) {
        throw ConfigError(origin, std::string("YAML parse error: ") + e.what());
    }
    Scenario sc;
    Section top(root, "");
    top.read("name", sc.name);
    top.allow("task");
    if (top.has("task")) {
        std::string t;
        top.read("task", t);
        sc.task = parse_task(t);
    }
    top.read("seed", sc.seed);
    top.read("threads", sc.threads);
    std::string out = sc.out.string();
    top.read("output", out);
    sc.out = out;

    auto params = top.sub("params");
    params.read("d", sc.params.d);
    params.read("s", sc.params.s);
    params.read("k", sc.params.k);
    std::string branch = "outgoing";
    params.read("branch", branch);
    if (branch == "outgoing")
        sc.params.branch = Branch::outgoing;
    else if (branch == "incoming")
        sc.params.branch = Branch::incoming;
    else
        throw ConfigError("params.branch", "expected outgoing or incoming, got '" + branch + "'");
    params.finish();

    auto pot = top.sub("potential");
    pot.read("kind", sc.potential.kind);
    pot.read("amp", sc.potential.amp);
    pot.read("radius", sc.potential.radius);
    pot.read("sigma", sc.potential.sigma);
    pot.read("cutoff", sc.potential.cutoff);
    pot.read("center", sc.potential.center);
    pot.read("path", sc.potential.path);
    pot.finish();
    if (sc.potential.kind == "file" && !sc.potential.path.empty()) {
        std::filesystem::path p = sc.potential.path;
        if (p.is_relative() && origin != "config" && std::filesystem::path(origin).has_parent_path())
            sc.potential.path = (std::filesystem::path(origin).parent_path() / p).string();
    }

    auto grid = top.sub("grid");
    grid.read("h", sc.grid.h);
    grid.read("points_per_wavelength", sc.grid.points_per_wavelength);
    grid.read("n", sc.grid.n);
    grid.finish();

    auto solver = top.sub("solver");
    solver.read("dense_limit", sc.solve.dense_limit);
    solver.read("gmres_tol", sc.solve.gmres_tol);
    solver.read("gmres_restart", sc.solve.gmres_restart);
    solver.read("max_iterations", sc.solve.max_iterations);
    solver.read("residual_limit", sc.solve.residual_limit);
    solver.read("rcond_limit", sc.solve.rcond_limit);
    solver.finish();

    auto quad = top.sub("quadrature");
    quad.read("pole_window", sc.quad.pole_window);
    quad.read("tail_periods", sc.quad.tail_periods);
    quad.read("abs_tol", sc.quad.abs_tol);
    quad.read("rel_tol", sc.quad.rel_tol);
    quad.read("lambda_max", sc.quad.lambda_max);
    quad.finish();

    auto greens = top.sub("greens");
    greens.read("radii", sc.radii);
    greens.finish();

    auto fwd = top.sub("forward");
    fwd.read("theta", sc.theta);
    fwd.finish();

    auto ff = top.sub("farfield");
    ff.read("n_theta", sc.n_theta);
    ff.read("n_xhat", sc.n_xhat);
    std::string weights = "midpoint";
    ff.read("weights", weights);
    sc.weights = parse_weights(weights, "farfield.weights");
    ff.finish();

    auto inv = top.sub("invert");
    inv.read("mode", sc.invert.mode);
    inv.read("input", sc.invert.input);
    inv.read("target_n", sc.invert.target_n);
    inv.read("target_L", sc.invert.target_L);
    inv.read("reg", sc.invert.reg);
    inv.read("symmetrize", sc.invert.symmetrize);
    inv.read("l_magnitudes", sc.invert.l_magnitudes);
    inv.read("m_set", sc.invert.m_set);
    inv.finish();
    if (!sc.invert.input.empty() && origin != "config") {
        std::filesystem::path p = sc.invert.input;
        if (p.is_relative() && std::filesystem::path(origin).has_parent_path())
            sc.invert.input = (std::filesystem::path(origin).parent_path() / p).string();
    }

    auto res = top.sub("resolvent");
    res.read("exponents", sc.resolvent.exponents);
    res.read("p", sc.resolvent.p);
    res.read("q", sc.resolvent.q);
    res.read("lambdas", sc.resolvent.lambdas);
    res.read("epsilon", sc.resolvent.epsilon);
    res.read("n", sc.resolvent.n);
    res.read("L", sc.resolvent.L);
    res.read("trials", sc.resolvent.trials);
    res.finish();

    auto ver = top.sub("verify");
    ver.read("slow", sc.slow);
    ver.read("inputs", sc.verify_inputs);
    ver.read("only", sc.verify_only);
    ver.finish();

    top.finish();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

void apply_environment(Scenario& sc) {
    if (const char* out = std::getenv("FRACSCAT_OUT"); out && *out)
        sc.out = out;
    if (const char* th = std::getenv("FRACSCAT_THREADS"); th && *th) {
        char* end = nullptr;
        const long v = std::strtol(th, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096)
            throw ConfigError("FRACSCAT_THREADS", std::string("expected a positive integer, got '") + th + "'");
        sc.threads = static_cast<int>(v);
    }
}

void Scenario::validate(Task t) const {
    const int d = params.d;
    if (d < 2 || d > 3)
        throw ConfigError("params.d", "must be 2 or 3, got " + std::to_string(d));
    const double lo = d / (d + 1.0), hi = std::min(1.0, 0.5 * d);
    const std::string interval = "(d/(d+1), min(1, d/2)) = (" + num(lo) + ", " + num(hi) + ")";
    if (!(params.s > 0.0 && params.s <= 1.0))
        throw ConfigError("params.s", "must lie in (0, 1]; the admissible interval for d = " + std::to_string(d) +
                                          " is " + interval + ", got " + num(params.s));
    if (!(params.k > 0.0) || !std::isfinite(params.k))
        throw ConfigError("params.k", "must be positive, got " + num(params.k));
    const bool theory = t == Task::forward || t == Task::farfield || t == Task::invert;
    if (theory && d >= 3 && !(params.s > lo && params.s < hi))
        throw ConfigError("params.s", "must lie in the admissible interval " + interval + ", got " + num(params.s));
    if (threads < 0)
        throw ConfigError("threads", "must be non-negative");
    quad.validate();

    const bool needs_potential = t == Task::forward || t == Task::farfield ||
                                 (t == Task::invert && invert.mode != "file");
    if (needs_potential) {
        const auto& ps = potential;
        if (ps.kind != "bump" && ps.kind != "gaussian" && ps.kind != "file")
            throw ConfigError("potential.kind", "expected bump, gaussian or file, got '" + ps.kind + "'");
        if (ps.kind == "file") {
            if (ps.path.empty())
                throw ConfigError("potential.path", "required for kind = file");
            if (!std::filesystem::exists(ps.path))
                throw ConfigError("potential.path", "no such file '" + ps.path + "'");
        } else {
            if (!std::isfinite(ps.amp))
                throw ConfigError("potential.amp", "must be finite");
            if (ps.kind == "bump" && !(ps.radius > 0.0))
                throw ConfigError("potential.radius", "must be positive");
            if (ps.kind == "gaussian" && (!(ps.sigma > 0.0) || !(ps.cutoff > 0.0)))
                throw ConfigError("potential.sigma", "sigma and cutoff must be positive");
            if (!ps.center.empty() && ps.center.size() != static_cast<std::size_t>(d))
                throw ConfigError("potential.center", "needs " + std::to_string(d) + " entries");
        }
        if (grid.h < 0.0)
            throw ConfigError("grid.h", "must be non-negative");
        if (grid.h > 0.0 && t != Task::invert && grid.h > lambda_of(params) / 6.0 * (1.0 + 1e-12))
            throw ConfigError("grid.h", "exceeds (2 pi / k) / 6 = " + num(lambda_of(params) / 6.0));
        if (grid.h == 0.0 && !(grid.points_per_wavelength >= 6.0))
            throw ConfigError("grid.points_per_wavelength", "must be at least 6");
        if (grid.n < 0 || (grid.n > 0 && grid.n < 3))
            throw ConfigError("grid.n", "must be 0 (automatic) or at least 3");
    }
    if (t == Task::verify)
        for (int id : verify_only)
            if (id < 1 || id > acceptance_count)
                throw ConfigError("verify.only", "criterion ids run from 1 to " + std::to_string(acceptance_count) +
                                                     ", got " + std::to_string(id));
    if (t == Task::greens) {
        if (radii.empty())
            throw ConfigError("greens.radii", "must list at least one radius");
        for (double r : radii)
            if (!(r > 0.0))
                throw ConfigError("greens.radii", "radii must be positive");
    }
    if (t == Task::forward && !theta.empty()) {
        if (theta.size() != static_cast<std::size_t>(d))
            throw ConfigError("forward.theta", "needs " + std::to_string(d) + " entries");
        double n2 = 0.0;
        for (double v : theta)
            n2 += v * v;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
            throw ConfigError("forward.theta", "must be a unit vector");
    }
    if ((t == Task::farfield || t == Task::forward) && (n_theta < 1 || n_xhat < 1))
        throw ConfigError("farfield.n_theta", "direction counts must be positive");
    if (t == Task::invert) {
        const auto& iv = invert;
        if (iv.mode != "file" && iv.mode != "probes" && iv.mode != "study")
            throw ConfigError("invert.mode", "expected file, probes or study, got '" + iv.mode + "'");
        if (iv.mode == "file" && iv.input.empty())
            throw ConfigError("invert.input", "required for mode = file");
        if (iv.mode == "file" && !std::filesystem::exists(iv.input))
            throw ConfigError("invert.input", "no such file '" + iv.input + "'");
        if (iv.target_n < 2 || iv.target_n % 2 != 0)
            throw ConfigError("invert.target_n", "must be even and >= 2");
        if (!(iv.target_L > 0.0))
            throw ConfigError("invert.target_L", "must be positive");
        if (!(iv.reg >= 0.0))
            throw ConfigError("invert.reg", "must be non-negative");
        if (iv.mode == "study") {
            if (iv.l_magnitudes.empty())
                throw ConfigError("invert.l_magnitudes", "must not be empty");
            for (std::size_t i = 0; i < iv.l_magnitudes.size(); ++i)
                if (!(iv.l_magnitudes[i] > 0.0) || (i > 0 && !(iv.l_magnitudes[i] > iv.l_magnitudes[i - 1])))
                    throw ConfigError("invert.l_magnitudes", "must be positive and increasing");
            for (const auto& m : iv.m_set)
                if (m.size() != static_cast<std::size_t>(d))
                    throw ConfigError("invert.m_set", "every vector needs " + std::to_string(d) + " entries");
        }
    }
    if (t == Task::resolvent_scan) {
        const auto& r = resolvent;
        if (r.exponents != "picked" && r.exponents != "uniform" && r.exponents != "explicit")
            throw ConfigError("resolvent.exponents", "expected picked, uniform or explicit");
        if (r.exponents == "explicit" && !(r.p > 1.0 && r.q > r.p))
            throw ConfigError("resolvent.p", "explicit exponents need 1 < p < q");
        if (r.exponents != "explicit" && !(d >= 3 && params.s > lo && params.s < hi))
            throw ConfigError("params.s", "picked exponents need d >= 3 and s in the admissible interval " + interval);
        if (!(r.epsilon > 0.0))
            throw ConfigError("resolvent.epsilon", "must be positive");
        if (r.lambdas.size() < 2)
            throw ConfigError("resolvent.lambdas", "need at least two values");
        for (double l : r.lambdas)
            if (!(l > 0.0))
                throw ConfigError("resolvent.lambdas", "values must be positive");
        if (r.n < 4 || r.n % 2 != 0)
            throw ConfigError("resolvent.n", "must be even and >= 4");
        if (!(r.L > 0.0))
            throw ConfigError("resolvent.L", "must be positive");
        if (r.trials < 1)
            throw ConfigError("resolvent.trials", "must be positive");
    }
}

std::string Scenario::canonical() const {
    json j;
    j["params"] = {{"d", params.d}, {"s", params.s}, {"k", params.k},
                   {"branch", params.branch == Branch::outgoing ? "outgoing" : "incoming"}};
    j["potential"] = potential.describe();
    j["grid"] = {{"h", grid.h}, {"points_per_wavelength", grid.points_per_wavelength}, {"n", grid.n}};
    j["solver"] = {{"dense_limit", solve.dense_limit},       {"gmres_tol", solve.gmres_tol},
                   {"gmres_restart", solve.gmres_restart},   {"max_iterations", solve.max_iterations},
                   {"residual_limit", solve.residual_limit}, {"rcond_limit", solve.rcond_limit}};
    j["quadrature"] = {{"pole_window", quad.pole_window}, {"tail_periods", quad.tail_periods},
                       {"abs_tol", quad.abs_tol},         {"rel_tol", quad.rel_tol},
                       {"lambda_max", quad.lambda_max}};
    j["greens"] = {{"radii", radii}};
    j["forward"] = {{"theta", theta}};
    j["farfield"] = {{"n_theta", n_theta}, {"n_xhat", n_xhat}, {"weights", weights_name(weights)}};
    j["invert"] = {{"mode", invert.mode},
                   {"input", invert.input},
                   {"target_n", invert.target_n},
                   {"target_L", invert.target_L},
                   {"reg", invert.reg},
                   {"symmetrize", invert.symmetrize},
                   {"l_magnitudes", invert.l_magnitudes},
                   {"m_set", invert.m_set}};
    j["resolvent"] = {{"exponents", resolvent.exponents}, {"p", resolvent.p},         {"q", resolvent.q},
                      {"lambdas", resolvent.lambdas},     {"epsilon", resolvent.epsilon}, {"n", resolvent.n},
                      {"L", resolvent.L},                 {"trials", resolvent.trials}};
    j["seed"] = seed;
    j["slow"] = slow;
    j["verify_only"] = verify_only;
    return j.dump();
}

std::string Scenario::hash() const { return settings_hash(canonical()); }

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const DomainError*>(&e))
        return 2;
    return 3;
}

std::string inspect_dataset(const std::filesystem::path& path) {
    const auto kind = detect_dataset(path);
    std::ostringstream ss;
    if (kind == "potential") {
        const auto f = read_potential(path);
        const auto& g = f.grid;
        ss << "potential file " << path.string() << "\n";
        ss << "  role          " << to_string(f.role) << "\n";
        ss << "  settings hash " << (f.settings_hash.empty() ? "-" : f.settings_hash) << "\n";
        ss << "  d             " << g.d << "\n  shape        ";
        for (int n : g.shape)
            ss << " " << n;
        ss << "\n  h             " << num(g.h) << "\n  origin       ";
        for (double o : g.origin)
            ss << " " << num(o);
        std::size_t nonzero = 0;
        double lo = 0.0, hi = 0.0;
        for (double v : g.samples) {
            nonzero += v != 0.0 ? 1 : 0;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        ss << "\n  samples       " << g.samples.size() << " (" << nonzero << " nonzero)\n";
        ss << "  range         [" << num(lo) << ", " << num(hi) << "]\n";
        return ss.str();
    }
    if (kind == "farfield") {
        const auto ff = read_farfield(path);
        std::set<double> ks;
        double amax = 0.0;
        for (const auto& r : ff.records) {
            ks.insert(r.k);
            amax = std::max(amax, std::abs(r.amp));
        }
        ss << "far-field set " << path.string() << "\n";
        ss << "  d             " << ff.meta.d << "\n  s             " << num(ff.meta.s) << "\n";
        ss << "  potential     " << (ff.meta.potential_id.empty() ? "-" : ff.meta.potential_id) << "\n";
        ss << "  settings hash " << (ff.meta.settings_hash.empty() ? "-" : ff.meta.settings_hash) << "\n";
        ss << "  records       " << ff.records.size() << "\n  k values     ";
        for (double k : ks)
            ss << " " << num(k);
        ss << "\n  max |amp|     " << num(amax) << "\n";
        return ss.str();
    }
    throw FormatError(path.string() + ": not a potential file or far-field CSV with sidecar");
}

RunReport run_scenario(const Scenario& sc, Task task, std::ostream& log) {
    if (sc.task && *sc.task != task)
        throw ConfigError("task", "config is for '" + std::string(to_string(*sc.task)) + "', subcommand asked for '" +
                                      std::string(to_string(task)) + "'");
    sc.validate(task);
    if (sc.threads > 0)
        omp_set_num_threads(sc.threads);
    const std::string hash = sc.hash();
    RunReport rep;
    json summary;
    summary["name"] = sc.name;
    summary["task"] = std::string(to_string(task));
    summary["settings_hash"] = hash;
    json results;
    auto artifact = [&](const std::filesystem::path& p) { rep.artifacts.push_back(p); };
    const auto& out = sc.out;
    const ProblemParams& params = sc.params;
    log << "fracscat " << to_string(task) << " '" << sc.name << "' settings_hash=" << hash << "\n";

    switch (task) {
    case Task::greens: {
        std::string csv = hash_comment(hash) + "r,radial_re,radial_im,radial_err,decomp_re,decomp_im,decomp_err,rel_gap\n";
        double worst = 0.0;
        for (double r : sc.radii) {
            const auto a = phi_fractional_radial(params, r, sc.quad);
            const auto b = phi_fractional_decomp(params, r, sc.quad);
            const double gap = std::abs(a.value - b.value) / std::abs(b.value);
            worst = std::max(worst, gap);
            csv += fmt17(r) + "," + fmt17(a.value.real()) + "," + fmt17(a.value.imag()) + "," + fmt17(a.est_error) + "," +
                   fmt17(b.value.real()) + "," + fmt17(b.value.imag()) + "," + fmt17(b.est_error) + "," + fmt17(gap) +
                   "\n";
        }
        write_text(out / "greens.csv", csv);
        artifact(out / "greens.csv");
        results["max_relative_gap"] = worst;
        log << "max relative gap between routes: " << num(worst) << "\n";
        break;
    }
    case Task::forward: {
        const auto V = build_potential(sc, params.k);
        const auto op = assemble_ls_operator(V, params, sc.quad);
        const double margin = neumann_margin(op, sc.seed);
        std::vector<double> th = sc.theta;
        if (th.empty()) {
            th.assign(static_cast<std::size_t>(params.d), 0.0);
            th.back() = 1.0;
        }
        const auto sol = solve_total_field(op, incident_field(params, IncidentSource::plane(th), V), sc.solve);
        write_potential(out / "potential.fwpot", V, FieldRole::potential, hash);
        write_field_csv(out / "total_field.csv", sol.total, hash);
        write_field_csv(out / "scattered_field.csv", sol.scattered, hash);
        const auto xh = direction_set(params.d, sc.n_xhat);
        const auto amps = far_field_amplitude(V, sol.total, params, xh, sc.weights);
        FarFieldSet ff;
        ff.meta = {params.d, params.s, sc.potential.describe(), hash};
        const auto ud = static_cast<std::size_t>(params.d);
        for (std::size_t i = 0; i < amps.size(); ++i) {
            FarFieldRecord rec;
            rec.k = params.k;
            rec.xhat.assign(xh.begin() + static_cast<std::ptrdiff_t>(i * ud),
                            xh.begin() + static_cast<std::ptrdiff_t>((i + 1) * ud));
            rec.theta = th;
            rec.amp = amps[i];
            ff.records.push_back(std::move(rec));
        }
        write_farfield(out / "farfield.csv", ff);
        for (const char* f : {"potential.fwpot", "total_field.csv", "scattered_field.csv", "farfield.csv"})
            artifact(out / f);
        results["support_size"] = op.support().size();
        results["neumann_margin"] = margin;
        results["method"] = sol.method;
        results["iterations"] = sol.iterations;
        results["residual"] = sol.residual;
        log << "support " << op.support().size() << " nodes, margin " << num(margin) << ", " << sol.method
            << " residual " << num(sol.residual) << "\n";
        break;
    }
    case Task::farfield: {
        const auto V = build_potential(sc, params.k);
        SynthesisOptions so{sc.solve, sc.quad, sc.weights};
        auto ff = synthesize_far_field(V, params, direction_set(params.d, sc.n_theta), direction_set(params.d, sc.n_xhat),
                                       so);
        ff.meta.potential_id = sc.potential.describe();
        ff.meta.settings_hash = hash;
        write_farfield(out / "farfield.csv", ff);
        artifact(out / "farfield.csv");
        results["records"] = ff.records.size();
        try {
            const double sym = symmetry_check(ff);
            results["symmetry_discrepancy"] = sym;
            log << "symmetry discrepancy " << num(sym) << "\n";
        } catch (const DomainError&) {
            results["symmetry_discrepancy"] = nullptr;
            log << "no antipodal (xhat, theta) pairs; symmetry not checked\n";
        }
        log << ff.records.size() << " records written\n";
        break;
    }
    case Task::invert: {
        const auto target = target_of(sc);
        ReconstructionOptions ro;
        ro.reg = sc.invert.reg;
        ro.symmetrize = sc.invert.symmetrize;
        if (sc.invert.mode == "study") {
            std::vector<std::vector<double>> ms = sc.invert.m_set.empty() ? default_m_set(params.d) : sc.invert.m_set;
            double m2 = 0.0;
            for (const auto& m : ms) {
                double n2 = 0.0;
                for (double v : m)
                    n2 += v * v;
                m2 = std::max(m2, n2);
            }
            const double kmax = std::sqrt(m2 + sc.invert.l_magnitudes.back() * sc.invert.l_magnitudes.back());
            const auto V = build_potential(sc, kmax);
            const auto study = convergence_study(V, params.s, ms, sc.invert.l_magnitudes,
                                                 make_forward_oracle(V, sc.quad, sc.solve));
            std::string csv = hash_comment(hash) + "k,l,err_abs,err_rel,slope_so_far,status\n";
            for (const auto& r : study.rows)
                csv += fmt17(r.k) + "," + fmt17(r.l_magnitude) + "," + fmt17(r.err_abs) + "," + fmt17(r.err_rel) + "," +
                       fmt17(r.slope_so_far) + "," + (r.failed ? "failed" : "ok") + "\n";
            write_text(out / "study.csv", csv);
            artifact(out / "study.csv");
            results["slope"] = study.slope;
            if (params.d >= 3)
                results["decay"] = study.exponents.decay;
            for (const auto& r : study.rows)
                log << "|l|=" << num(r.l_magnitude) << " k=" << num(r.k) << " err=" << num(r.err_abs)
                    << (r.failed ? " FAILED: " + r.message : "") << "\n";
            log << "fitted slope " << num(study.slope) << "\n";
            break;
        }
        std::vector<FourierSample> samples;
        std::optional<PotentialGrid> V;
        if (sc.invert.mode == "file") {
            const auto ff = read_farfield(sc.invert.input);
            if (ff.meta.d != params.d)
                throw ConfigError("invert.input", "far-field dimension differs from params.d");
            samples = born_samples(ff);
        } else {
            V = build_potential(sc, params.k);
            samples = lattice_probe_samples(make_forward_oracle(*V, sc.quad, sc.solve), params, target);
        }
        const auto est = reconstruct_potential(samples, target, ro);
        write_potential(out / "estimate.fwpot", est, FieldRole::estimate, hash);
        write_potential_csv(out / "estimate.csv", est, hash);
        artifact(out / "estimate.fwpot");
        artifact(out / "estimate.csv");
        results["samples"] = samples.size();
        if (sc.invert.mode == "probes" && sc.potential.kind != "file") {
            const auto f = sc.potential.kind == "gaussian"
                               ? gaussian_bump(sc.potential.amp, sc.potential.sigma, sc.potential.cutoff,
                                               sc.potential.center)
                               : smooth_bump(sc.potential.amp, sc.potential.radius, sc.potential.center);
            const auto truth = PotentialGrid::sample(params.d, target.origin, target.h, target.shape, f);
            const double err = relative_l2(est, truth);
            results["relative_l2_error"] = err;
            log << "relative L2 error " << num(err) << "\n";
        }
        log << samples.size() << " samples reconstructed on a " << target.shape[0] << "^" << params.d << " grid\n";
        break;
    }
    case Task::resolvent_scan: {
        const auto& r = sc.resolvent;
        double p = r.p, q = r.q;
        if (r.exponents != "explicit") {
            const auto e = pick_exponents(params.d, params.s);
            q = e.q;
            p = r.exponents == "picked" ? e.p : 1.0 / (1.0 / e.q + 2.0 * params.s / params.d);
        }
        const PeriodicGrid g{params.d, r.n, r.L, false};
        const auto scan = resolvent_norm_scan(params.s, p, q, r.lambdas, r.epsilon, g, r.trials, sc.seed);
        std::string csv = hash_comment(hash) + "lambda,lower_bound,trials,slope_partial\n";
        for (const auto& pt : scan.points)
            csv += fmt17(pt.lambda) + "," + fmt17(pt.lower_bound) + "," + std::to_string(pt.trials) + "," +
                   fmt17(pt.slope_partial) + "\n";
        write_text(out / "scan.csv", csv);
        artifact(out / "scan.csv");
        const double predicted = params.d / (2.0 * params.s) * (1.0 / p - 1.0 / q) - 1.0;
        results["p"] = p;
        results["q"] = q;
        results["slope"] = scan.slope;
        results["predicted_slope"] = predicted;
        log << "p=" << num(p) << " q=" << num(q) << " slope " << num(scan.slope) << " (exponent " << num(predicted)
            << ")\n";
        break;
    }
    case Task::verify: {
        if (!sc.verify_inputs.empty()) {
            std::set<std::string> hashes;
            for (const auto& in : sc.verify_inputs) {
                const auto kind = detect_dataset(in);
                if (kind == "potential")
                    hashes.insert(read_potential(in).settings_hash);
                else if (kind == "farfield")
                    hashes.insert(read_farfield(in).meta.settings_hash);
                else
                    throw ConfigError("verify.inputs", "'" + in + "' is not a fracscat dataset");
            }
            if (hashes.size() > 1)
                throw ConfigError("verify.inputs", "inputs carry " + std::to_string(hashes.size()) +
                                                       " different settings hashes");
        }
        AcceptanceOptions ao;
        ao.slow = sc.slow;
        ao.only = sc.verify_only;
        ao.seed = sc.seed;
        ao.on_result = [&log](const CriterionResult& r) { log << format_result(r) << "\n" << std::flush; };
        const auto res = run_acceptance(ao);
        std::string csv = hash_comment(hash) + "id,name,passed,detail\n";
        int failed = 0;
        for (const auto& r : res) {
            failed += r.passed ? 0 : 1;
            std::string detail = r.detail;
            std::replace(detail.begin(), detail.end(), ',', ';');
            csv += std::to_string(r.id) + "," + r.name + "," + (r.passed ? "1" : "0") + "," + detail + "\n";
        }
        write_text(out / "acceptance.csv", csv);
        artifact(out / "acceptance.csv");
        results["passed"] = static_cast<int>(res.size()) - failed;
        results["failed"] = failed;
        rep.exit_code = failed == 0 ? 0 : 4;
        log << (res.size() - static_cast<std::size_t>(failed)) << "/" << res.size() << " criteria passed\n";
        break;
    }
    case Task::inspect:
        throw ConfigError("task", "inspect takes a dataset path, not a scenario");
    }

    summary["results"] = results;
    json arts = json::array();
    for (const auto& a : rep.artifacts)
        arts.push_back(a.filename().string());
    summary["artifacts"] = arts;
    rep.summary = summary.dump(2) + "\n";
    write_text(out / "summary.json", rep.summary);
    rep.artifacts.push_back(out / "summary.json");
    return rep;
}

} // namespace fracscat
