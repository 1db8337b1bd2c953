#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hjflow/asymptotics.hpp"
#include "hjflow/config.hpp"
#include "hjflow/experiment.hpp"
#include "hjflow/operators.hpp"
#include "hjflow/spectral.hpp"

namespace py = pybind11;
using namespace hjflow;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
// pybind11 holders cannot be pointers to const.
using PyGrid = std::shared_ptr<Grid>;

PyGrid held(GridPtr g) { return std::const_pointer_cast<Grid>(std::move(g)); }

Field to_field(const GridPtr& g, const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array of nodal values");
  return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Field& f) { return Array(static_cast<py::ssize_t>(f.size()), f.data().data()); }

py::dict series_dict(const TimeSeries& s) {
  const auto n = static_cast<py::ssize_t>(s.records.size());
  Array t(n), M(n), m(n), Lut(n), grad(n), dev(n), meanF(n), sup_h(n), dt(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& r = s.records[i];
    t.mutable_at(i) = r.t;
    M.mutable_at(i) = r.M;
    m.mutable_at(i) = r.m;
    Lut.mutable_at(i) = r.Lut;
    grad.mutable_at(i) = r.grad_sup;
    dev.mutable_at(i) = r.xnorm_dev;
    meanF.mutable_at(i) = r.meanF;
    sup_h.mutable_at(i) = r.sup_h;
    dt.mutable_at(i) = r.dt;
  }
  py::dict d;
  d["t"] = t;
  d["M"] = M;
  d["m"] = m;
  d["Lut"] = Lut;
  d["grad_sup"] = grad;
  d["xnorm_dev"] = dev;
  d["meanF"] = meanF;
  d["sup_h"] = sup_h;
  d["dt"] = dt;
  return d;
}

py::list verdict_list(const std::vector<Verdict>& vs) {
  py::list out;
  for (const auto& v : vs) out.append(py::make_tuple(v.name, v.pass, v.measured, v.threshold));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Neumann viscous Hamilton-Jacobi solver";

  py::class_<Grid, PyGrid>(mod, "Grid")
      .def_static("interval", [](double l, int n) { return held(Grid::interval(l, n)); }, py::arg("length"), py::arg("n"))
      .def_static("rectangle", [](double lx, double ly, int nx, int ny) { return held(Grid::rectangle(lx, ly, nx, ny)); },
                  py::arg("lx"), py::arg("ly"), py::arg("nx"), py::arg("ny"))
      .def_static(
          "union_of_rectangles",
          [](const std::vector<std::array<double, 4>>& rects, double h) {
            std::vector<Rect> rs;
            for (const auto& r : rects) rs.push_back({r[0], r[1], r[2], r[3]});
            return held(Grid::union_of_rectangles(rs, h));
          },
          py::arg("rects"), py::arg("h"))
      .def_property_readonly("kind", [](const Grid& g) { return to_string(g.kind()); })
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("h", &Grid::h)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("measure", &Grid::measure)
      .def_property_readonly("id", &Grid::id)
      .def_property_readonly("weights",
                             [](const Grid& g) { return Array(static_cast<py::ssize_t>(g.size()), g.weights().data()); })
      .def("positions", [](const Grid& g) {
        Array out({static_cast<py::ssize_t>(g.size()), static_cast<py::ssize_t>(g.dim())});
        auto a = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < g.size(); ++k) {
          const auto x = g.position(k);
          for (int d = 0; d < g.dim(); ++d) a(k, d) = x[d];
        }
        return out;
      });

  mod.def(
      "laplacian", [](const PyGrid& g, const Array& u) { return to_array(laplacian_apply(*g, to_field(g, u))); },
      py::arg("grid"), py::arg("u"));
  mod.def(
      "gradient",
      [](const PyGrid& g, const Array& u) {
        const VectorField v = gradient(*g, to_field(g, u));
        Array out({static_cast<py::ssize_t>(v.size()), static_cast<py::ssize_t>(v.dim())});
        std::copy(v.data().begin(), v.data().end(), out.mutable_data());
        return out;
      },
      py::arg("grid"), py::arg("u"));
  mod.def(
      "solve_helmholtz",
      [](const PyGrid& g, double alpha, const Array& rhs) {
        return to_array(solve_helmholtz(*g, alpha, to_field(g, rhs)));
      },
      py::arg("grid"), py::arg("alpha"), py::arg("rhs"));
  mod.def(
      "solve_robin_aux", [](const PyGrid& g, double K) { return to_array(solve_robin_aux(g, K)); }, py::arg("grid"),
      py::arg("K") = 1.0);
  mod.def(
      "discrete_lambda", [](const PyGrid& g) { return discrete_lambda(g); }, py::arg("grid"));
  mod.def(
      "second_neumann_eigenvalue",
      [](const PyGrid& g) {
        const auto r = second_neumann_eigenvalue(g);
        return py::make_tuple(r.lambda, to_array(r.eigenvector), r.residual_norm, r.iterations);
      },
      py::arg("grid"));
  mod.def(
      "heat_semigroup",
      [](const PyGrid& g, const Array& v, double t) { return to_array(heat_semigroup_apply(g, to_field(g, v), t)); },
      py::arg("grid"), py::arg("v"), py::arg("t"));
  mod.def(
      "fit_log_linear",
      [](const std::vector<double>& t, const std::vector<double>& dev) {
        const auto f = fit_log_linear(t, dev);
        return py::make_tuple(f.rate, f.prefactor, f.residual);
      },
      py::arg("t"), py::arg("dev"));

  mod.def(
      "run_experiment",
      [](const std::string& text, bool write_files) {
        const auto manifest = parse_config(text);
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = run_experiment(manifest, write_files);
        }
        py::list runs;
        for (const auto& o : rep.runs) {
          py::dict d;
          d["id"] = o.config.id;
          d["error"] = o.error;
          if (o.error.empty()) {
            d["status"] = to_string(o.result.status);
            d["lambda"] = o.lambda;
            d["rate"] = o.fit ? py::cast(o.fit->rate) : py::none();
            d["c"] = o.c.c;
            d["prefactor"] = o.prefactor;
            d["series"] = series_dict(o.result.series);
            d["final"] = to_array(o.result.final_state.u);
          } else {
            d["status"] = "error";
          }
          d["verdicts"] = verdict_list(o.verdicts);
          runs.append(d);
        }
        py::dict out;
        out["kind"] = to_string(rep.kind);
        out["runs"] = runs;
        out["verdicts"] = verdict_list(rep.verdicts);
        out["passed"] = rep.pass();
        return out;
      },
      py::arg("config_text"), py::arg("write_files") = false,
      "Parse an experiment config and execute it; returns runs, verdicts and the overall result.");
}
