#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridwave/defect_zoo.hpp"
#include "gridwave/edge_ode.hpp"
#include "gridwave/inequality_lab.hpp"
#include "gridwave/io.hpp"
#include "gridwave/isoperimetry.hpp"
#include "gridwave/nls.hpp"
#include "gridwave/path_cover.hpp"

namespace py = pybind11;
using namespace gridwave;

namespace {

py::tuple edge_tuple(const EdgeId& e) { return py::make_tuple(e.o == Orient::H ? "H" : "V", e.i, e.j); }

py::dict ground_state_dict(const GroundStateResult& r, double p, double mu) {
    py::dict d;
    d["energy"] = r.energy;
    d["level"] = r.level;
    d["lambda"] = r.lambda;
    d["mass"] = r.mass;
    d["converged"] = r.converged;
    d["iterations"] = r.iterations;
    d["el_residual"] = r.el_residual;
    d["kirchhoff_residual"] = r.kirchhoff_residual;
    d["lambda_identity_gap"] = lambda_identity_check(r, p, mu).gap;
    d["border_mass"] = r.border_mass;
    d["values"] = r.u.values();
    return d;
}

}  // namespace

PYBIND11_MODULE(_gridwave, m) {
    m.doc() = "Defected grids, isoperimetric searches and NLS ground states";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    py::class_<Window>(m, "Window")
        .def(py::init<int, int, int, int>(), py::arg("xmin"), py::arg("xmax"), py::arg("ymin"), py::arg("ymax"))
        .def_static("parse", &Window::parse)
        .def_static("square", &Window::square)
        .def_readonly("xmin", &Window::xmin)
        .def_readonly("xmax", &Window::xmax)
        .def_readonly("ymin", &Window::ymin)
        .def_readonly("ymax", &Window::ymax)
        .def("__str__", &Window::str)
        .def("__repr__", [](const Window& w) { return "Window('" + w.str() + "')"; });

    py::class_<DefectedGrid>(m, "Grid")
        .def_property_readonly("window", &DefectedGrid::window)
        .def_property_readonly("removed_edges", [](const DefectedGrid& g) {
            py::list out;
            for (const auto& e : g.removed_edges()) out.append(edge_tuple(e));
            return out;
        })
        .def("connected", &DefectedGrid::connected)
        .def("degree", [](const DefectedGrid& g, int x, int y) { return g.degree({x, y}); })
        .def("to_json", [](const DefectedGrid& g) { return dump_json(grid_to_json(g)); });

    m.def("generator_kinds", &generator_kinds);
    m.def(
        "_make_grid",
        [](const std::string& kind, const Window& w, const std::string& params) {
            return materialize({kind, nlohmann::json::parse(params)}, w);
        },
        py::arg("kind"), py::arg("window"), py::arg("params") = "{}");
    m.def("_grid_from_json", [](const std::string& text) { return grid_from_json(nlohmann::json::parse(text)); });
    m.def("make_block", &make_block);

    m.def("identify_defects", [](const DefectedGrid& g) {
        py::list out;
        for (const auto& d : identify_defects(g)) {
            py::dict item;
            item["edge_count"] = d.edges.size();
            item["boundary_edge_count"] = d.boundary.size();
            item["truncated"] = d.truncated;
            out.append(item);
        }
        return out;
    });

    m.def(
        "search_violation",
        [](const DefectedGrid& g, int restarts, int steps, std::uint64_t seed, int threads) {
            IsoConfig cfg;
            cfg.restarts = restarts;
            cfg.steps = steps;
            cfg.seed = seed;
            cfg.threads = threads;
            auto r = search_violation(g, cfg);
            py::dict d;
            d["best_ratio"] = r.best_ratio;
            d["area"] = r.area;
            d["perimeter"] = r.perimeter;
            d["search_mode"] = r.search_mode;
            return d;
        },
        py::arg("grid"), py::arg("restarts") = 16, py::arg("steps") = 40000, py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "staircase_bound",
        [](int ring) {
            auto b = staircase_counting_bound(ring, staircase_grid(staircase_window(ring)));
            py::dict d;
            d["available"] = b.available;
            d["required"] = b.required;
            d["repetitions"] = b.repetitions;
            d["mean"] = b.mean;
            return d;
        },
        py::arg("ring"));

    m.def(
        "solve_ground_state",
        [](const DefectedGrid& g, double p, double mu, int mesh_m, int n_starts, std::uint64_t seed, int threads) {
            SolverConfig cfg;
            cfg.mesh_m = mesh_m;
            cfg.n_starts = n_starts;
            cfg.seed = seed;
            cfg.threads = threads;
            GroundStateResult r;
            {
                py::gil_scoped_release release;
                r = solve_ground_state(g, p, mu, cfg);
            }
            return ground_state_dict(r, p, mu);
        },
        py::arg("grid"), py::arg("p"), py::arg("mu"), py::arg("mesh_m") = 8, py::arg("n_starts") = 5,
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "critical_mass",
        [](const DefectedGrid& g, double p, int mesh_m, int threads) {
            CriticalMassConfig cfg;
            cfg.solver.mesh_m = mesh_m;
            cfg.solver.threads = threads;
            CriticalMassResult r;
            {
                py::gil_scoped_release release;
                r = estimate_critical_mass(g, p, cfg);
            }
            py::dict d;
            d["mu_star_bisect"] = r.mu_star_bisect;
            d["mu_star_gn"] = r.mu_star_gn;
            d["mu_hi"] = r.mu_hi;
            d["samples"] = r.samples;
            return d;
        },
        py::arg("grid"), py::arg("p"), py::arg("mesh_m") = 16, py::arg("threads") = 1);

    m.def(
        "integrate_ivp",
        [](double p, double lambda, double a, double b, int n) {
            auto t = integrate_ivp({p, lambda, a, b}, n);
            py::dict d;
            d["x"] = t.x;
            d["u"] = t.u;
            d["du"] = t.du;
            d["error_estimate"] = t.error_estimate;
            d["positive"] = t.positive;
            return d;
        },
        py::arg("p"), py::arg("lam"), py::arg("a"), py::arg("b"), py::arg("n") = 1000);

    m.def("discriminant", [](const std::vector<double>& lambdas) {
        auto r = f_lambda_positivity(lambdas);
        py::dict d;
        d["min_margin"] = r.min_margin;
        d["max_rel_gap"] = r.max_rel_gap;
        std::vector<double> lf, yf;
        for (const auto& row : r.rows) {
            lf.push_back(row.lambda_form);
            yf.push_back(row.y_form);
        }
        d["lambda_form"] = lf;
        d["y_form"] = yf;
        return d;
    });

    m.def(
        "probe_inequality",
        [](const std::string& id, const DefectedGrid& g, const std::string& family, int count, double p,
           std::uint64_t seed, int threads) {
            FamilySpec fam;
            fam.kind = parse_family(family);
            fam.count = count;
            fam.p = p;
            fam.threads = threads;
            auto r = probe_inequality(parse_inequality(id), g, fam, seed);
            py::dict d;
            d["best_ratio"] = r.best_ratio;
            d["witness_index"] = r.witness_index;
            d["witness_label"] = r.witness_label;
            d["ratios"] = r.ratios;
            return d;
        },
        py::arg("inequality"), py::arg("grid"), py::arg("family") = "tents", py::arg("count") = 200, py::arg("p") = 4.0,
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "exp_trial",
        [](const DefectedGrid& g, double eps, double mu) {
            auto t = exp_trial_field(g, eps, mu);
            py::dict d;
            d["kappa"] = t.kappa;
            d["l2_sq"] = t.l2_sq;
            d["deriv_l2_sq"] = t.deriv_l2_sq;
            d["border_ratio"] = t.border_ratio;
            return d;
        },
        py::arg("grid"), py::arg("eps"), py::arg("mu"));
    m.def("exp_trial_radius", &exp_trial_radius);

    m.def(
        "z2_negativity_probe",
        [](const DefectedGrid& g, double p, double mu, double eps_min) {
            auto z = z2_negativity_probe(g, p, mu, eps_min);
            py::dict d;
            d["found"] = z.found;
            d["eps_star"] = z.eps_star;
            d["energy"] = z.energy;
            d["periods"] = z.periods;
            d["sweep"] = z.sweep;
            return d;
        },
        py::arg("grid"), py::arg("p"), py::arg("mu"), py::arg("eps_min") = 1e-3);
}
