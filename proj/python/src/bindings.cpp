#include "fracscat/acceptance.hpp"
#include "fracscat/born.hpp"
#include "fracscat/errors.hpp"
#include "fracscat/farfield.hpp"
#include "fracscat/forward.hpp"
#include "fracscat/greens.hpp"
#include "fracscat/grid.hpp"
#include "fracscat/io.hpp"
#include "fracscat/scenario.hpp"
#include "fracscat/spectral.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace fracscat;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

std::vector<double> flat(const RealArray& a) {
    return {a.data(), a.data() + a.size()};
}

/// Flattens an (N, d) or (d,) array of directions after checking the trailing extent.
std::vector<double> directions(const RealArray& a, int d, const char* what) {
    if (a.ndim() == 0 || a.ndim() > 2 || a.shape(a.ndim() - 1) != d)
        throw DomainError(std::string(what) + " must have shape (N, " + std::to_string(d) + ")");
    return flat(a);
}

py::array_t<double> samples_array(const PotentialGrid& g) {
    std::vector<py::ssize_t> shape(g.shape.begin(), g.shape.end());
    py::array_t<double> out(shape);
    std::copy(g.samples.begin(), g.samples.end(), out.mutable_data());
    return out;
}

py::array_t<cplx> complex_array(const std::vector<cplx>& v, std::vector<py::ssize_t> shape) {
    py::array_t<cplx> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> points_array(const ComplexField& f) {
    py::array_t<double> out({static_cast<py::ssize_t>(f.size()), static_cast<py::ssize_t>(f.d)});
    std::copy(f.points.begin(), f.points.end(), out.mutable_data());
    return out;
}

PotentialGrid grid_from_numpy(const RealArray& samples, double h, std::vector<double> origin) {
    PotentialGrid g;
    g.d = static_cast<int>(samples.ndim());
    g.h = h;
    for (int a = 0; a < g.d; ++a)
        g.shape.push_back(static_cast<int>(samples.shape(a)));
    if (origin.empty())
        for (int a = 0; a < g.d; ++a)
            origin.push_back(-0.5 * (g.shape[static_cast<std::size_t>(a)] - 1) * h);
    g.origin = std::move(origin);
    g.samples = flat(samples);
    g.validate();
    return g;
}

py::dict farfield_dict(const FarFieldSet& ff) {
    const std::size_t n = ff.records.size();
    const auto d = static_cast<py::ssize_t>(ff.meta.d);
    py::array_t<double> k(static_cast<py::ssize_t>(n));
    py::array_t<double> xhat({static_cast<py::ssize_t>(n), d}), theta({static_cast<py::ssize_t>(n), d});
    py::array_t<cplx> amp(static_cast<py::ssize_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = ff.records[i];
        k.mutable_data()[i] = r.k;
        amp.mutable_data()[i] = r.amp;
        std::copy(r.xhat.begin(), r.xhat.end(), xhat.mutable_data() + i * ff.meta.d);
        std::copy(r.theta.begin(), r.theta.end(), theta.mutable_data() + i * ff.meta.d);
    }
    py::dict out;
    out["d"] = ff.meta.d;
    out["s"] = ff.meta.s;
    out["potential_id"] = ff.meta.potential_id;
    out["settings_hash"] = ff.meta.settings_hash;
    out["k"] = k;
    out["xhat"] = xhat;
    out["theta"] = theta;
    out["amp"] = amp;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings for the fracscat C++ library";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::enum_<Branch>(m, "Branch")
        .value("outgoing", Branch::outgoing)
        .value("incoming", Branch::incoming);

    py::enum_<GreensMethod>(m, "GreensMethod")
        .value("radial_pv", GreensMethod::radial_pv)
        .value("decomposition", GreensMethod::decomposition)
        .value("classical_closed", GreensMethod::classical_closed)
        .value("asymptote", GreensMethod::asymptote);

    py::class_<ProblemParams>(m, "ProblemParams")
        .def(py::init([](int d, double s, double k, Branch branch) {
                 ProblemParams p{d, s, k, branch};
                 p.validate();
                 return p;
             }),
             py::arg("d") = 3, py::arg("s") = 0.8, py::arg("k") = 1.0, py::arg("branch") = Branch::outgoing)
        .def_readwrite("d", &ProblemParams::d)
        .def_readwrite("s", &ProblemParams::s)
        .def_readwrite("k", &ProblemParams::k)
        .def_readwrite("branch", &ProblemParams::branch)
        .def("validate_theory", &ProblemParams::validate_theory)
        .def("__repr__", [](const ProblemParams& p) {
            std::ostringstream os;
            os << "ProblemParams(d=" << p.d << ", s=" << p.s << ", k=" << p.k << ", branch="
               << (p.branch == Branch::outgoing ? "outgoing" : "incoming") << ")";
            return os.str();
        });

    m.def(
        "greens",
        [](const ProblemParams& p, double r, GreensMethod method) {
            p.validate();
            GreensValue v;
            switch (method) {
            case GreensMethod::radial_pv: v = phi_fractional_radial(p, r); break;
            case GreensMethod::decomposition: v = phi_fractional_decomp(p, r); break;
            case GreensMethod::classical_closed: v = phi_classical(p, r); break;
            case GreensMethod::asymptote: v = phi_far_asymptote(p, r); break;
            }
            return py::make_tuple(v.value, v.est_error);
        },
        py::arg("params"), py::arg("r"), py::arg("method") = GreensMethod::radial_pv,
        "Radial Green's function value and its error estimate.");

    m.def("far_field_prefactor", &far_field_prefactor, py::arg("params"));

    py::class_<PotentialGrid>(m, "PotentialGrid")
        .def(py::init(&grid_from_numpy), py::arg("samples"), py::arg("h"),
             py::arg("origin") = std::vector<double>{})
        .def_static(
            "bump",
            [](int d, int n, double h, double amp, double radius) {
                return PotentialGrid::centered(d, n, h, smooth_bump(amp, radius));
            },
            py::arg("d"), py::arg("n"), py::arg("h"), py::arg("amp"), py::arg("radius"),
            "Centred smooth compactly supported bump sampled on an n^d grid.")
        .def_readonly("d", &PotentialGrid::d)
        .def_readonly("h", &PotentialGrid::h)
        .def_readonly("origin", &PotentialGrid::origin)
        .def_readonly("shape", &PotentialGrid::shape)
        .def_property_readonly("samples", &samples_array)
        .def("max_abs", &PotentialGrid::max_abs);

    m.def(
        "solve",
        [](const PotentialGrid& V, const ProblemParams& p, const RealArray& theta) {
            const auto th = directions(theta, p.d, "theta");
            SolveResult sol;
            {
                py::gil_scoped_release release;
                const LSOperator op(V, p);
                sol = solve_total_field(op, incident_field(p, IncidentSource::plane(th), V));
            }
            py::dict out;
            out["points"] = points_array(sol.total);
            out["total"] = complex_array(sol.total.values, {static_cast<py::ssize_t>(sol.total.size())});
            out["scattered"] =
                complex_array(sol.scattered.values, {static_cast<py::ssize_t>(sol.scattered.size())});
            out["residual"] = sol.residual;
            out["iterations"] = sol.iterations;
            out["method"] = sol.method;
            return out;
        },
        py::arg("potential"), py::arg("params"), py::arg("theta"),
        "Solve the Lippmann-Schwinger equation for one plane-wave incidence.");

    m.def(
        "far_field",
        [](const PotentialGrid& V, const ProblemParams& p, const RealArray& thetas, const RealArray& xhats) {
            const auto th = directions(thetas, p.d, "thetas");
            const auto xh = directions(xhats, p.d, "xhats");
            FarFieldSet ff;
            {
                py::gil_scoped_release release;
                ff = synthesize_far_field(V, p, th, xh);
            }
            const auto nt = static_cast<py::ssize_t>(th.size() / static_cast<std::size_t>(p.d));
            const auto nx = static_cast<py::ssize_t>(xh.size() / static_cast<std::size_t>(p.d));
            std::vector<cplx> amps;
            amps.reserve(ff.records.size());
            for (const auto& r : ff.records)
                amps.push_back(r.amp);
            return complex_array(amps, {nt, nx});
        },
        py::arg("potential"), py::arg("params"), py::arg("thetas"), py::arg("xhats"),
        "Far-field amplitudes as an (n_theta, n_xhat) complex array.");

    m.def("direction_set", [](int d, int n) {
        const auto v = direction_set(d, n);
        py::array_t<double> out({static_cast<py::ssize_t>(v.size() / static_cast<std::size_t>(d)),
                                 static_cast<py::ssize_t>(d)});
        std::copy(v.begin(), v.end(), out.mutable_data());
        return out;
    }, py::arg("d"), py::arg("n"));

    m.def(
        "pick_exponents",
        [](int d, double s) {
            const auto e = pick_exponents(d, s);
            return py::make_tuple(e.p, e.q, e.decay);
        },
        py::arg("d"), py::arg("s"), "Lebesgue pair (p, q) and the decay rate used by the Born estimate.");

    m.def(
        "probe_geometry",
        [](const std::vector<double>& mvec, double l_magnitude, const std::vector<double>& l_direction) {
            const auto dir = l_direction.empty() ? orthogonal_direction(mvec) : l_direction;
            const auto t = probe_geometry(mvec, l_magnitude, dir);
            py::dict out;
            out["m"] = t.m;
            out["l"] = t.l;
            out["rho"] = t.rho;
            out["theta"] = t.theta;
            out["xhat"] = t.xhat;
            out["k"] = t.k;
            return out;
        },
        py::arg("m"), py::arg("l_magnitude"), py::arg("l_direction") = std::vector<double>{});

    m.def("multiplier_value", &multiplier_value, py::arg("xi_norm"), py::arg("s"), py::arg("k"));

    m.def(
        "construct_solution",
        [](const ComplexArray& f, double L, double s, double k, bool half_s, double epsilon) {
            if (f.ndim() < 1 || f.ndim() > 3)
                throw DomainError("f must be a 1, 2 or 3 dimensional array");
            const int n = static_cast<int>(f.shape(0));
            for (int a = 1; a < f.ndim(); ++a)
                if (f.shape(a) != n)
                    throw DomainError("f must have equal extents on every axis");
            const PeriodicGrid grid{static_cast<int>(f.ndim()), n, L, false};
            const std::vector<cplx> data(f.data(), f.data() + f.size());
            const auto sol = construct_solution(grid, data, s, k,
                                                half_s ? SolutionRoute::half_s : SolutionRoute::general, epsilon);
            std::vector<py::ssize_t> shape(f.shape(), f.shape() + f.ndim());
            return py::make_tuple(complex_array(sol.u, shape), sol.residual, sol.epsilon);
        },
        py::arg("f"), py::arg("L"), py::arg("s"), py::arg("k"), py::arg("half_s") = false,
        py::arg("epsilon") = -1.0,
        "Periodic solution of ((-Delta)^s - k^{2s}) u = f on [-L/2, L/2)^d; returns (u, residual, epsilon).");

    m.def(
        "reconstruct",
        [](const std::filesystem::path& farfield_csv, int n, double L, double reg) {
            const auto ff = read_farfield(farfield_csv);
            const auto samples = born_samples(ff);
            TargetGrid t;
            const auto ud = static_cast<std::size_t>(ff.meta.d);
            t.h = L / n;
            t.origin.assign(ud, -0.5 * L);
            t.shape.assign(ud, n);
            ReconstructionOptions opts;
            opts.reg = reg;
            return samples_array(reconstruct_potential(samples, t, opts));
        },
        py::arg("farfield_csv"), py::arg("n") = 64, py::arg("L") = 4.0, py::arg("reg") = 1e-8,
        "Born estimate of the potential on an n^d grid of side L from a far-field file.");

    m.def(
        "write_potential",
        [](const std::filesystem::path& path, const PotentialGrid& g, const std::string& hash) {
            write_potential(path, g, FieldRole::potential, hash);
        },
        py::arg("path"), py::arg("grid"), py::arg("settings_hash") = "");

    m.def(
        "read_potential",
        [](const std::filesystem::path& path) {
            const auto f = read_potential(path);
            return py::make_tuple(f.grid, std::string(to_string(f.role)), f.settings_hash);
        },
        py::arg("path"), "Returns (grid, role, settings_hash).");

    m.def("read_farfield", [](const std::filesystem::path& path) { return farfield_dict(read_farfield(path)); },
          py::arg("path"));

    py::class_<CriterionResult>(m, "AcceptanceResult")
        .def_readonly("id", &CriterionResult::id)
        .def_readonly("name", &CriterionResult::name)
        .def_readonly("passed", &CriterionResult::passed)
        .def_readonly("detail", &CriterionResult::detail)
        .def_readonly("seconds", &CriterionResult::seconds)
        .def("__repr__", &format_result);

    m.def(
        "run_acceptance",
        [](std::vector<int> only, bool slow, std::uint64_t seed) {
            AcceptanceOptions opts;
            opts.only = std::move(only);
            opts.slow = slow;
            opts.seed = seed;
            py::gil_scoped_release release;
            return run_acceptance(opts);
        },
        py::arg("only") = std::vector<int>{}, py::arg("slow") = false, py::arg("seed") = 1);

    m.def(
        "run_scenario",
        [](const std::filesystem::path& config, const std::string& task, const std::filesystem::path& out) {
            auto sc = load_scenario(config);
            apply_environment(sc);
            if (!out.empty())
                sc.out = out;
            const Task t = task.empty() ? sc.task.value_or(Task::forward) : parse_task(task);
            std::ostringstream log;
            const auto rep = run_scenario(sc, t, log);
            return py::make_tuple(rep.exit_code, log.str());
        },
        py::arg("config"), py::arg("task") = "", py::arg("out") = std::filesystem::path{},
        "Run a scenario file; returns (exit_code, log).");
}
