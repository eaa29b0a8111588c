#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reachkit/cli.hpp"
#include "reachkit/config.hpp"
#include "reachkit/errors.hpp"
#include "reachkit/eval.hpp"
#include "reachkit/field_io.hpp"
#include "reachkit/icl.hpp"
#include "reachkit/parallel.hpp"
#include "reachkit/reachability.hpp"
#include "reachkit/tasks.hpp"

namespace py = pybind11;
using namespace reachkit;

namespace {

py::array_t<double> field_array(const ScalarField& f) {
  const Grid3& g = f.grid();
  py::array_t<double> out({g.count(0), g.count(1), g.count(2)});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::array_t<bool> mask_array(const BoolMask& m) {
  const Grid3& g = m.grid();
  py::array_t<bool> out({g.count(0), g.count(1), g.count(2)});
  bool* dst = out.mutable_data();
  for (std::size_t n = 0; n < m.size(); ++n) dst[n] = m[n];
  return out;
}

void check_shape(const Grid3& g, const py::buffer_info& b) {
  if (b.ndim != 3 || static_cast<std::size_t>(b.shape[0]) != g.count(0) ||
      static_cast<std::size_t>(b.shape[1]) != g.count(1) || static_cast<std::size_t>(b.shape[2]) != g.count(2)) {
    throw ShapeError("array shape does not match the grid");
  }
}

ScalarField field_from(const Grid3& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  check_shape(g, a.request());
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

BoolMask mask_from(const Grid3& g, py::array_t<bool, py::array::c_style | py::array::forcecast> a) {
  check_shape(g, a.request());
  std::vector<std::uint8_t> bits(a.data(), a.data() + a.size());
  return BoolMask(g, std::move(bits));
}

py::dict report_dict(const ClassificationReport& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["iou"] = r.iou;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["fn"] = r.fn;
  d["tn"] = r.tn;
  d["support"] = r.support;
  d["restriction"] = r.restriction;
  return d;
}

}  // namespace

PYBIND11_MODULE(_reachkit, m) {
  m.doc() = "Reachability and inverse constraint learning on Dubins grids";
  m.attr("__version__") = kVersion;

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_RuntimeError);

  py::class_<State>(m, "State")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("theta") = 0.0)
      .def_readwrite("x", &State::x)
      .def_readwrite("y", &State::y)
      .def_readwrite("theta", &State::theta)
      .def("__repr__", [](const State& s) {
        return "State(" + std::to_string(s.x) + ", " + std::to_string(s.y) + ", " + std::to_string(s.theta) + ")";
      });

  py::class_<Grid3>(m, "Grid3")
      .def(py::init([](std::size_t nx, std::size_t ny, std::size_t nt, double half_width) {
             return Grid3::square(nx, ny, nt, half_width);
           }),
           py::arg("nx"), py::arg("ny"), py::arg("ntheta"), py::arg("half_width") = 4.0)
      .def_property_readonly("shape", [](const Grid3& g) { return py::make_tuple(g.count(0), g.count(1), g.count(2)); })
      .def_property_readonly("size", &Grid3::size)
      .def("spacing", &Grid3::spacing)
      .def("state", py::overload_cast<std::size_t, std::size_t, std::size_t>(&Grid3::state, py::const_))
      .def("nearest", &Grid3::nearest)
      .def("__eq__", &Grid3::operator==);

  py::class_<ControlAffineModel>(m, "Model")
      .def_readonly("name", &ControlAffineModel::name)
      .def_readonly("v_nominal", &ControlAffineModel::v_nominal)
      .def_property_readonly("action_box", [](const ControlAffineModel& c) { return py::make_tuple(c.action.lo, c.action.hi); })
      .def_property_readonly("disturbance_box",
                             [](const ControlAffineModel& c) { return py::make_tuple(c.disturbance.lo, c.disturbance.hi); })
      .def("hamiltonian", [](const ControlAffineModel& c, const State& s, const Vec3& p) {
        return hamiltonian(c, s, p).value;
      });
  m.def("preset", py::overload_cast<std::string_view>(&preset), py::arg("name"));
  m.def("preset_names", &preset_names);

  py::class_<Obstacle>(m, "Obstacle")
      .def(py::init<double, double, double>(), py::arg("cx") = 0.0, py::arg("cy") = 0.0, py::arg("radius") = 1.0)
      .def_readwrite("cx", &Obstacle::cx)
      .def_readwrite("cy", &Obstacle::cy)
      .def_readwrite("radius", &Obstacle::radius);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tolerance", &SolverOptions::tolerance)
      .def_readwrite("cfl", &SolverOptions::cfl)
      .def_readwrite("max_iters", &SolverOptions::max_iters);

  m.def(
      "failure_sdf", [](const Obstacle& o, const Grid3& g) { return field_array(failure_sdf(o, g)); }, py::arg("obstacle"),
      py::arg("grid"));
  m.def(
      "failure_mask", [](const Obstacle& o, const Grid3& g) { return mask_array(failure_mask(o, g)); },
      py::arg("obstacle"), py::arg("grid"));
  m.def(
      "solve_brt",
      [](const ControlAffineModel& model, const Grid3& g, const Obstacle& o, const SolverOptions& opt) {
        const BRTResult r = [&] {
          py::gil_scoped_release release;
          return solve_brt(model, failure_sdf(o, g), opt);
        }();
        py::dict d;
        d["value"] = field_array(r.value);
        d["unsafe"] = mask_array(r.unsafe);
        d["iterations"] = r.iterations;
        d["residual"] = r.residual;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("model"), py::arg("grid"), py::arg("obstacle") = Obstacle{}, py::arg("options") = SolverOptions{},
      "Avoid BRT of a circular obstacle; returns value, unsafe mask and convergence info.");
  m.def(
      "brt_of_set",
      [](const ControlAffineModel& model, const Grid3& g, py::array_t<bool> target, const SolverOptions& opt) {
        return mask_array(brt_of_set(model, mask_from(g, target), opt).unsafe);
      },
      py::arg("model"), py::arg("grid"), py::arg("target"), py::arg("options") = SolverOptions{});
  m.def(
      "brute_force_brt",
      [](const ControlAffineModel& model, const Grid3& g, const Obstacle& o, int na, int nd, double dt) {
        return mask_array(brute_force_brt(model, failure_mask(o, g), na, nd, dt));
      },
      py::arg("model"), py::arg("grid"), py::arg("obstacle") = Obstacle{}, py::arg("n_actions") = 3,
      py::arg("n_disturbances") = 3, py::arg("dt") = 0.2);

  py::class_<Task>(m, "Task")
      .def(py::init([](int id, const State& start, std::array<double, 2> goal, double r) {
             return Task{id, start, goal, r};
           }),
           py::arg("id"), py::arg("start"), py::arg("goal"), py::arg("goal_radius") = 0.3)
      .def_readwrite("id", &Task::id)
      .def_readwrite("start", &Task::start)
      .def_readwrite("goal", &Task::goal)
      .def_readwrite("goal_radius", &Task::goal_radius);
  m.def("ring_tasks", &ring_tasks, py::arg("count"), py::arg("ring_radius") = 3.0, py::arg("goal_radius") = 0.3,
        py::arg("seed") = 1, py::arg("max_offset") = 0.25);

  py::class_<MdpParams>(m, "MdpParams")
      .def(py::init<>())
      .def_readwrite("dt", &MdpParams::dt)
      .def_readwrite("horizon", &MdpParams::horizon)
      .def_readwrite("tau", &MdpParams::tau)
      .def_readwrite("penalty", &MdpParams::penalty)
      .def_readwrite("goal_bonus", &MdpParams::goal_bonus)
      .def_readwrite("action_samples", &MdpParams::action_samples)
      .def_property(
          "disturbance", [](const MdpParams& p) { return to_string(p.disturbance); },
          [](MdpParams& p, const std::string& s) { p.disturbance = disturbance_mode_from(s); })
      .def_property(
          "transition", [](const MdpParams& p) { return to_string(p.scheme); },
          [](MdpParams& p, const std::string& s) { p.scheme = transition_scheme_from(s); });

  py::class_<TabularMDP>(m, "TabularMDP")
      .def(py::init<Grid3, ControlAffineModel, MdpParams>(), py::arg("grid"), py::arg("model"),
           py::arg("params") = MdpParams{})
      .def_property_readonly("grid", &TabularMDP::grid)
      .def_property_readonly("n_actions", [](const TabularMDP& t) { return t.actions().size(); })
      .def(
          "expert_density",
          [](const TabularMDP& t, const std::vector<Task>& tasks, py::array_t<bool> constraint) {
            const BoolMask c = mask_from(t.grid(), constraint);
            return field_array(expert_density(t, tasks, c, t.params().penalty, t.params().tau));
          },
          py::arg("tasks"), py::arg("constraint"), "Summed soft-optimal occupancy of the tasks under a constraint.")
      .def(
          "solve",
          [](const TabularMDP& t, const Task& task, py::array_t<bool> constraint) {
            const BoolMask c = mask_from(t.grid(), constraint);
            const auto sol = soft_cvi(t, task, c);
            py::dict d;
            d["value"] = field_array(sol.value);
            d["visitation"] = field_array(visitation_exact(t, sol.policy, task));
            d["expected_return"] = expected_return(t, sol.policy, task);
            return d;
          },
          py::arg("task"), py::arg("constraint"), "Soft-optimal policy summary for one task under a constraint mask.");

  m.def(
      "run_icl",
      [](const TabularMDP& mdp, const std::vector<Task>& tasks, py::array_t<bool> failure, int epochs, double threshold) {
        ICLConfig cfg;
        cfg.tasks = tasks;
        cfg.epochs = epochs;
        cfg.threshold = threshold;
        cfg.penalty = mdp.params().penalty;
        cfg.tau = mdp.params().tau;
        const BoolMask f = mask_from(mdp.grid(), failure);
        ICLHistory h = [&] {
          py::gil_scoped_release release;
          return run_mt_icl(cfg, mdp, f);
        }();
        py::list constraints;
        for (const auto& c : h.constraints) constraints.append(field_array(c.values));
        py::dict d;
        d["constraints"] = constraints;
        d["unsafe"] = mask_array(h.constraints.back().unsafe());
        d["expert_density"] = field_array(h.expert_density);
        d["learner_mixture"] = field_array(learner_mixture(h));
        return d;
      },
      py::arg("mdp"), py::arg("tasks"), py::arg("failure"), py::arg("epochs") = 5, py::arg("threshold") = 0.6,
      "Multi-task inverse constraint learning from exact soft-optimal experts.");

  m.def(
      "classification_report",
      [](py::array_t<bool> pred, py::array_t<bool> labels, std::optional<py::array_t<bool>> restriction) {
        const auto info = pred.request();
        if (info.ndim != 3) throw ShapeError("expected a 3-d mask");
        const Grid3 g = Grid3::square(info.shape[0], info.shape[1], info.shape[2]);
        std::optional<BoolMask> r;
        if (restriction) r = mask_from(g, *restriction);
        return report_dict(classification_report(mask_from(g, pred), mask_from(g, labels), r));
      },
      py::arg("predicted"), py::arg("labels"), py::arg("restriction") = py::none());

  m.def(
      "read_field",
      [](const std::filesystem::path& p) { return field_array(read_field(p)); }, py::arg("path"));
  m.def(
      "read_mask", [](const std::filesystem::path& p) { return mask_array(read_mask(p)); }, py::arg("path"));
  m.def(
      "write_field",
      [](const std::filesystem::path& p, const Grid3& g, py::array_t<double> a) { write_field(p, field_from(g, a)); },
      py::arg("path"), py::arg("grid"), py::arg("values"));
  m.def(
      "write_mask",
      [](const std::filesystem::path& p, const Grid3& g, py::array_t<bool> a) { write_mask(p, mask_from(g, a)); },
      py::arg("path"), py::arg("grid"), py::arg("mask"));
  m.def("read_grid", &read_grid, py::arg("path"));

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);
  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "reachkit");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        py::gil_scoped_release release;
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool with the given arguments; returns its exit code.");
}
