#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "navvi/error.hpp"
#include "navvi/feedback.hpp"
#include "navvi/gateway.hpp"
#include "navvi/navmesh.hpp"
#include "navvi/planner.hpp"
#include "navvi/sim_loop.hpp"
#include "navvi/world_model.hpp"

namespace py = pybind11;
using namespace navvi;

namespace {

py::tuple xz(Vec2 v) { return py::make_tuple(v.x, v.z); }

py::list points(const std::vector<Vec2>& pts) {
  py::list out;
  for (Vec2 p : pts) out.append(xz(p));
  return out;
}

py::dict frame_dict(const FeedbackFrame& f) {
  py::list cues;
  for (const AudioCue& c : f.cues) {
    cues.append(py::dict(py::arg("kind") = std::string(to_string(c.kind)), py::arg("hour") = c.hour,
                         py::arg("text") = c.text(), py::arg("t") = c.t));
  }
  return py::dict(py::arg("haptic_left") = f.haptic.left, py::arg("haptic_right") = f.haptic.right,
                  py::arg("zone") = std::string(to_string(f.haptic.zone)), py::arg("cues") = cues,
                  py::arg("path") = points(f.path_polyline));
}

ControlScript script_arg(const std::string& script) {
  return script == "autopilot" ? autopilot_script() : load_control_script_file(script);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Warehouse teleoperation navigation simulator core";
  m.attr("WIRE_VERSION") = std::string(kWireVersion);

  auto error = py::register_exception<Error>(m, "NavviError", PyExc_RuntimeError);
  py::register_exception<SceneParseError>(m, "SceneParseError", error.ptr());
  py::register_exception<SceneValidationError>(m, "SceneValidationError", error.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", error.ptr());
  py::register_exception<UnreachableError>(m, "UnreachableError", error.ptr());
  py::register_exception<ContractError>(m, "ContractError", error.ptr());
  py::register_exception<WireError>(m, "WireError", error.ptr());

  py::class_<SceneDescription>(m, "Scene")
      .def_readonly("name", &SceneDescription::name)
      .def_property_readonly("floor", [](const SceneDescription& s) { return py::make_tuple(xz(s.floor.min), xz(s.floor.max)); })
      .def_property_readonly("spawn", [](const SceneDescription& s) { return xz(s.robot.spawn.position); })
      .def_property_readonly("goal", [](const SceneDescription& s) { return xz(s.goal.position); })
      .def_property_readonly("static_ids", [](const SceneDescription& s) {
        std::vector<std::string> ids;
        for (const auto& o : s.statics) ids.push_back(o.id);
        return ids;
      })
      .def_property_readonly("agent_ids", [](const SceneDescription& s) {
        std::vector<std::string> ids;
        for (const auto& a : s.agents) ids.push_back(a.id);
        return ids;
      })
      .def("to_json", &serialize_scene);

  m.def("load_scene", &load_scene_arg, py::arg("name_or_path"), py::arg("scene_dir") = std::string("scenes"),
        "Load a scene file, or a scene name inside scene_dir.");
  m.def("parse_scene", [](const std::string& text) { return load_scene_text(text); }, py::arg("text"));

  py::class_<NavMesh>(m, "NavMesh")
      .def("__len__", &NavMesh::size)
      .def_property_readonly("vertices", [](const NavMesh& n) { return points(n.vertices); })
      .def_readonly("triangles", &NavMesh::triangles)
      .def_readonly("neighbors", &NavMesh::neighbors)
      .def_property_readonly("total_area", &NavMesh::total_area)
      .def("to_json", &dump_navmesh);

  m.def("build_navmesh", [](const SceneDescription& s) { return build_navmesh(s); }, py::arg("scene"));

  m.def(
      "plan",
      [](const SceneDescription& scene, std::pair<double, double> start, std::pair<double, double> goal,
         double threshold) {
        const NavMeshRuntime rt(scene);
        const auto [path, stats] = plan(rt, {start.first, start.second}, {{goal.first, goal.second}, threshold},
                                        PlannerConfig{});
        return py::dict(py::arg("waypoints") = points(path.waypoints), py::arg("length") = path.total_cost,
                        py::arg("corridor") = path.corridor, py::arg("nodes_expanded") = stats.nodes_expanded);
      },
      py::arg("scene"), py::arg("start"), py::arg("goal"), py::arg("threshold") = 1.0,
      "Plan on the static mesh of the scene; raises UnreachableError when no route exists.");

  m.def("intensity", [](double d) { return intensity(d); }, py::arg("distance"));
  m.def("clock_hour", &clock_hour_from_bearing, py::arg("degrees"));

  py::class_<Simulation>(m, "Simulation")
      .def(py::init([](const SceneDescription& scene, std::uint64_t seed) {
             TickConfig cfg;
             cfg.seed = seed;
             return Simulation(scene, cfg);
           }),
           py::arg("scene"), py::arg("seed") = 0)
      .def(
          "tick",
          [](Simulation& sim, double axis_x, double axis_y) {
            return frame_dict(sim.tick({axis_x, axis_y, sim.clock()}));
          },
          py::arg("axis_x") = 0.0, py::arg("axis_y") = 0.0)
      .def("autopilot_tick", [](Simulation& sim, Autopilot& pilot) { return frame_dict(sim.tick(pilot.steer(sim))); })
      .def("set_goal", [](Simulation& sim, std::pair<double, double> p) { sim.set_goal({p.first, p.second}); })
      .def("close", [](Simulation& sim) { sim.close(); })
      .def_property_readonly("clock", &Simulation::clock)
      .def_property_readonly("position", [](const Simulation& s) { return xz(s.robot().pose.position); })
      .def_property_readonly("heading", [](const Simulation& s) { return s.robot().pose.heading; })
      .def_property_readonly("speed", [](const Simulation& s) { return s.robot().speed; })
      .def_property_readonly("status", [](const Simulation& s) { return std::string(to_string(s.status())); })
      .def_property_readonly("path", [](const Simulation& s) {
        return s.path() ? py::object(points(s.path()->waypoints)) : py::object(py::none());
      })
      .def_property_readonly("shelf_collisions", [](const Simulation& s) { return s.log().shelf_collisions(); })
      .def_property_readonly("obstacle_collisions", [](const Simulation& s) { return s.log().obstacle_collisions(); })
      .def("csv", [](const Simulation& s) { return s.log().finalize(); });

  py::class_<Autopilot>(m, "Autopilot").def(py::init<>());

  m.def(
      "run_headless",
      [](const SceneDescription& scene, const std::string& script, double time_cap, std::uint64_t seed) {
        TickConfig cfg;
        cfg.seed = seed;
        const HeadlessResult r = run_headless(scene, script_arg(script), cfg, time_cap);
        return py::dict(py::arg("status") = std::string(to_string(r.log.status())), py::arg("ticks") = r.ticks,
                        py::arg("replans") = r.replans, py::arg("elapsed") = r.log.elapsed(),
                        py::arg("shelf_collisions") = r.log.shelf_collisions(),
                        py::arg("obstacle_collisions") = r.log.obstacle_collisions(),
                        py::arg("csv") = r.log.finalize());
      },
      py::arg("scene"), py::arg("script") = std::string("autopilot"), py::arg("time_cap") = 600.0,
      py::arg("seed") = 0, "Run a session without a client; script is 'autopilot' or a script file path.");

  m.def(
      "decode_control",
      [](const std::string& text) {
        const ControlMessage c = decode_control(text);
        return py::dict(py::arg("type") = std::string(to_string(c.kind)), py::arg("axis_x") = c.axis_x,
                        py::arg("axis_y") = c.axis_y, py::arg("scene") = c.scene, py::arg("point") = xz(c.point));
      },
      py::arg("text"));
}
