#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sulphsim/run.hpp"

namespace py = pybind11;
using namespace sulphsim;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(v.size());
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

// nodal field as an (ny, nx) array, row j holding x2 = j hy
py::array_t<double> to_grid_array(const std::vector<double>& v, const Grid2D& g) {
    py::array_t<double> out({g.ny(), g.nx()});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

EdgeTags edge_tags(const std::vector<Edge>& exposed) {
    EdgeTags tags = EdgeTags::all_isolated();
    for (Edge e : exposed) tags[e] = EdgeTag::Exposed;
    return tags;
}

KeyValues to_key_values(const py::dict& d) {
    KeyValues kv;
    for (const auto& item : d) kv.emplace_back(py::str(item.first), py::str(item.second));
    return kv;
}

py::dict result_dict(const RunResult& r) {
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["message"] = r.message;
    d["steps_done"] = r.steps_done;
    d["invariants_passed"] = r.invariants_passed;
    d["violation_count"] = r.violation_count;
    d["threshold_step"] = r.threshold_step;
    d["early_step"] = r.early_step;
    d["early_edge_gradient"] = r.early_edge_gradient;
    std::vector<std::string> paths;
    for (const auto& p : r.artifacts) paths.push_back(p.string());
    d["artifacts"] = paths;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Marble sulphation with surface rugosity";
    m.attr("__version__") = code_version();

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

    py::enum_<NuLaw>(m, "NuLaw").value("Linear", NuLaw::Linear).value("Parabolic", NuLaw::Parabolic);
    py::enum_<ConstraintMode>(m, "ConstraintMode")
        .value("Free", ConstraintMode::Free)
        .value("Box", ConstraintMode::Box);
    py::enum_<Edge>(m, "Edge")
        .value("Left", Edge::Left)
        .value("Right", Edge::Right)
        .value("Bottom", Edge::Bottom)
        .value("Top", Edge::Top);

    py::class_<PhysParams>(m, "PhysParams")
        .def(py::init<>())
        .def_readwrite("A", &PhysParams::A)
        .def_readwrite("B", &PhysParams::B)
        .def_readwrite("lam", &PhysParams::lambda)
        .def_readwrite("C0", &PhysParams::C0)
        .def_readwrite("S0", &PhysParams::S0)
        .def_readwrite("sbar", &PhysParams::sbar)
        .def_readwrite("g", &PhysParams::g)
        .def_readwrite("R0", &PhysParams::R0)
        .def_readwrite("nu_law", &PhysParams::nu_law)
        .def_readwrite("nu0", &PhysParams::nu0)
        .def_readwrite("nul", &PhysParams::nul)
        .def_readwrite("rl", &PhysParams::rl)
        .def_readwrite("weibull_m", &PhysParams::weibull_m)
        .def_readwrite("weibull_r0", &PhysParams::weibull_r0)
        .def_readwrite("constraint_mode", &PhysParams::constraint_mode)
        .def_readwrite("psi", &PhysParams::psi)
        .def_readwrite("forcing", &PhysParams::forcing);

    m.def("validate_params", [](const PhysParams& p, bool global_bound) { return validate(p, global_bound); },
          py::arg("params"), py::arg("global_bound") = true);
    m.def("porosity", &porosity, py::arg("c"), py::arg("params"));
    m.def("nu_eval", &nu_eval, py::arg("r"), py::arg("params"));
    m.def("g_reaction", &g_reaction, py::arg("r"), py::arg("c"), py::arg("s"), py::arg("params"));
    m.def("ghat", &ghat, py::arg("r"), py::arg("c"), py::arg("s"), py::arg("params"));
    m.def(
        "project_box",
        [](double r_trial, double dt, const PhysParams& p) {
            const BoxProjection b = project_box(r_trial, dt, p);
            return py::make_tuple(b.r, b.xi);
        },
        py::arg("r_trial"), py::arg("dt"), py::arg("params"));
    m.def("c_update_exact", &c_update_exact, py::arg("c"), py::arg("s"), py::arg("dt"), py::arg("params"));
    m.def("weibull_sample", &weibull_sample, py::arg("u"), py::arg("r0"), py::arg("m"));
    m.def(
        "uniform_stream",
        [](std::uint64_t seed, std::size_t n) {
            Rng rng(seed);
            std::vector<double> v(n);
            for (double& x : v) x = rng.uniform_open();
            return to_array(v);
        },
        py::arg("seed"), py::arg("n"));

    py::class_<Grid2D>(m, "Grid2D")
        .def_property_readonly("nx", &Grid2D::nx)
        .def_property_readonly("ny", &Grid2D::ny)
        .def_property_readonly("hx", &Grid2D::hx)
        .def_property_readonly("hy", &Grid2D::hy)
        .def("__len__", &Grid2D::size);
    m.def(
        "build_grid",
        [](int nx, int ny, const std::vector<Edge>& exposed) { return build_grid(nx, ny, edge_tags(exposed)); },
        py::arg("nx"), py::arg("ny"), py::arg("exposed") = std::vector<Edge>{Edge::Left});
    m.def(
        "exposed_trace",
        [](const Grid2D& g) {
            const BoundaryTrace t = exposed_trace(g);
            py::dict d;
            d["edge"] = t.edge;
            d["nodes"] = t.nodes;
            d["weights"] = to_array(t.weights);
            d["x1"] = to_array(t.x1);
            d["x2"] = to_array(t.x2);
            return d;
        },
        py::arg("grid"));
    m.def(
        "extract_profile",
        [](const std::vector<double>& field, const Grid2D& g, const std::string& axis, double at) {
            if (axis == "x1") return extract_profile(field, g, VerticalLine{at});
            if (axis == "x2") return extract_profile(field, g, HorizontalLine{at});
            throw py::value_error("axis must be 'x1' or 'x2'");
        },
        py::arg("field"), py::arg("grid"), py::arg("axis"), py::arg("at"));

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("phys", &RunConfig::phys)
        .def_readwrite("nx", &RunConfig::nx)
        .def_readwrite("ny", &RunConfig::ny)
        .def_readwrite("dt", &RunConfig::dt)
        .def_readwrite("n_steps", &RunConfig::n_steps)
        .def_readwrite("picard_iters", &RunConfig::picard_iters)
        .def_readwrite("seed", &RunConfig::seed)
        .def("set", [](RunConfig& c, const std::string& key, const std::string& value) { apply_setting(c, key, value); })
        .def("get", [](const RunConfig& c, const std::string& key) { return format_setting(c, key); })
        .def("validate", [](const RunConfig& c) { return validate(c); })
        .def("to_ini", [](const RunConfig& c) { return to_ini(c); })
        .def("__eq__", &RunConfig::operator==);
    m.def(
        "parse_config", [](const std::string& text, const py::dict& overrides) {
            return parse_config(text, to_key_values(overrides));
        },
        py::arg("text") = "", py::arg("overrides") = py::dict());
    m.def("config_keys", &config_keys);

    py::class_<Simulation>(m, "Simulation")
        .def(py::init<RunConfig>(), py::arg("config"))
        .def(
            "advance",
            [](Simulation& sim, int steps) {
                for (int k = 0; k < steps; ++k) sim.advance();
            },
            py::arg("steps") = 1)
        .def_property_readonly("step", &Simulation::step_index)
        .def_property_readonly("t", [](const Simulation& sim) { return sim.state().t; })
        .def_property_readonly("grid", &Simulation::grid, py::return_value_policy::reference_internal)
        .def_property_readonly("s", [](const Simulation& sim) { return to_grid_array(sim.state().s, sim.grid()); })
        .def_property_readonly("c", [](const Simulation& sim) { return to_grid_array(sim.state().c, sim.grid()); })
        .def_property_readonly("r", [](const Simulation& sim) { return to_array(sim.state().r); })
        .def_property_readonly("xi", [](const Simulation& sim) { return to_array(sim.state().xi); })
        .def_property_readonly("invariants_passed", [](const Simulation& sim) { return sim.report().passed(); })
        .def_property_readonly("balance_relative",
                               [](const Simulation& sim) { return sim.last_step().balance.relative(); })
        .def("max_edge_gradient", &Simulation::max_edge_gradient);

    m.def(
        "run",
        [](const RunConfig& cfg) {
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run(cfg);
            }
            return result_dict(res);
        },
        py::arg("config"));

    m.def(
        "mms_convergence",
        [](const std::string& study, int levels, const PhysParams& params) {
            if (study != "spatial" && study != "temporal") throw py::value_error("study must be 'spatial' or 'temporal'");
            MmsOptions opts;
            opts.params = params;
            ConvergenceTable table;
            {
                py::gil_scoped_release release;
                table = mms_convergence(study == "spatial" ? MmsStudy::Spatial : MmsStudy::Temporal, levels, opts);
            }
            py::list rows;
            for (const ConvergenceRow& r : table.rows) {
                py::dict d;
                d["level"] = r.level;
                d["h_or_dt"] = r.h_or_dt;
                d["err_L2"] = r.err_l2;
                d["err_max"] = r.err_max;
                d["order_L2"] = r.order_l2;
                d["order_max"] = r.order_max;
                rows.append(d);
            }
            return rows;
        },
        py::arg("study"), py::arg("levels"), py::arg("params") = PhysParams{});
}
