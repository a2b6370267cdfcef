#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "navvi/bench.hpp"
#include "navvi/error.hpp"
#include "navvi/gateway.hpp"
#include "navvi/server.hpp"
#include "navvi/sim_loop.hpp"

using namespace navvi;

namespace {

int write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return 1;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warehouse teleoperation navigation simulator", "navvi"};
  app.require_subcommand(1);

  std::string scene_dir;

  auto* serve = app.add_subcommand("serve", "Serve the simulation over WebSocket");
  int port = 8765;
  double tick_hz = 50.0, snapshot_hz = 20.0;
  std::uint64_t seed = 0;
  std::string bind = "0.0.0.0";
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--scene-dir", scene_dir, "Scene directory (default: $NAVVI_SCENE_DIR, then ./scenes)");
  serve->add_option("--tick-hz", tick_hz, "Simulation rate")->check(CLI::PositiveNumber);
  serve->add_option("--snapshot-hz", snapshot_hz, "Snapshot broadcast rate")->check(CLI::PositiveNumber);
  serve->add_option("--seed", seed, "Session seed");
  serve->add_option("--bind", bind, "Listen address");

  auto* run = app.add_subcommand("run", "Run a headless session and write the event CSV");
  std::string scene, script = "autopilot", log_out = "-";
  double time_cap = 600.0;
  run->add_option("--scene", scene, "Scene name or file")->required();
  run->add_option("--script", script, "Control script file, or 'autopilot'");
  run->add_option("--seed", seed, "Session seed");
  run->add_option("--log-out", log_out, "CSV destination ('-' for stdout)");
  run->add_option("--time-cap", time_cap, "Sim-time limit in seconds")->check(CLI::PositiveNumber);
  run->add_option("--scene-dir", scene_dir, "Scene directory for names");

  auto* bake = app.add_subcommand("bake", "Build the navmesh and dump it as JSON");
  std::string mesh_out = "-";
  bake->add_option("--scene", scene, "Scene name or file")->required();
  bake->add_option("--mesh-out", mesh_out, "Mesh destination ('-' for stdout)");
  bake->add_option("--scene-dir", scene_dir, "Scene directory for names");

  auto* bench = app.add_subcommand("bench", "Measure plan latency on random queries");
  std::size_t queries = 1000;
  bench->add_option("--scene", scene, "Scene name or file")->required();
  bench->add_option("--queries", queries, "Number of plan queries")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "Query seed");
  bench->add_option("--scene-dir", scene_dir, "Scene directory for names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    const std::string dir = scene_dir_or_default(scene_dir);
    if (*serve) {
      GatewayConfig cfg{dir, tick_hz, snapshot_hz, seed};
      WebSocketServer server(cfg, static_cast<std::uint16_t>(port), bind);
      std::cout << "navvi serving " << kWireVersion << " on ws://" << bind << ":" << server.port()
                << " (scenes: " << dir << ")" << std::endl;
      server.run(true);
      return 0;
    }
    if (*run) {
      const SceneDescription sd = load_scene_arg(scene, dir);
      const ControlScript cs = script == "autopilot" ? autopilot_script() : load_control_script_file(script);
      TickConfig cfg;
      cfg.seed = seed;
      const HeadlessResult res = run_headless(sd, cs, cfg, time_cap);
      if (int rc = write_output(log_out, res.log.finalize())) return rc;
      const auto el = res.log.elapsed();
      std::fprintf(stderr,
                   "status=%s ticks=%llu elapsed_s=%s shelf_collisions=%d obstacle_collisions=%d replans=%zu\n",
                   std::string(to_string(res.log.status())).c_str(),
                   static_cast<unsigned long long>(res.ticks), el ? format_fixed3(*el).c_str() : "-",
                   res.log.shelf_collisions(), res.log.obstacle_collisions(), res.replans);
      return 0;
    }
    if (*bake) {
      const SceneDescription sd = load_scene_arg(scene, dir);
      return write_output(mesh_out, dump_navmesh(build_navmesh(sd)) + "\n");
    }
    if (*bench) {
      const SceneDescription sd = load_scene_arg(scene, dir);
      std::cout << "scene: " << sd.name << "\n" << format_bench_report(bench_planner(sd, queries, seed));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
