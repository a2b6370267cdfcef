#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "navvi/error.hpp"
#include "navvi/sim_loop.hpp"

using namespace navvi;
using navvi::testing::empty_scene;
using navvi::testing::make_static;
using navvi::testing::rect;

namespace {

DynamicAgent parked(std::string id, Vec2 at, double radius) {
  DynamicAgent a;
  a.id = std::move(id);
  a.kind = AgentKind::forklift;
  a.radius = radius;
  a.script = {{at, 0.0}};
  return a;
}

int count(const SessionLog& log, EventKind k) {
  int n = 0;
  for (const auto& e : log.events()) n += e.kind == k;
  return n;
}

}  // namespace

TEST_CASE("apply_control kinematics") {
  const auto scene = empty_scene(10.0, 10.0);
  RobotState r;
  r.pose = {{5.0, 5.0}, 0.0};

  auto still = apply_control(r, {0.0, 0.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {});
  CHECK(still.robot.pose.position == r.pose.position);
  CHECK(still.robot.pose.heading == 0.0);
  CHECK(still.robot.speed == 0.0);

  auto fwd = apply_control(r, {0.0, 1.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {});
  CHECK(fwd.robot.pose.position.x == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(fwd.robot.pose.position.z - 5.0 == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(fwd.robot.speed == doctest::Approx(1.5));
  CHECK(fwd.blockers.empty());

  auto turn = apply_control(r, {1.0, 0.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {});
  CHECK(turn.robot.pose.heading == doctest::Approx(0.03));

  auto back = apply_control(r, {0.0, -1.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {});
  CHECK(back.robot.pose.position.z - 5.0 == doctest::Approx(-0.03));

  auto clamped = apply_control(r, {3.0, 7.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {});
  CHECK(clamped.robot.pose.heading == doctest::Approx(0.03));
  CHECK(distance(clamped.robot.pose.position, r.pose.position) == doctest::Approx(0.03));
}

TEST_CASE("apply_control stops at a wall") {
  auto scene = empty_scene(10.0, 10.0);
  scene.statics.push_back(make_static("wall", StaticCategory::wall, rect(0.0, 6.0, 10.0, 6.5)));
  RobotState r;
  r.pose = {{5.0, 5.0}, 0.0};
  std::vector<Contact> last;
  for (int i = 0; i < 200; ++i) {
    auto m = apply_control(r, {0.0, 1.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {});
    CHECK(m.robot.pose.position.z <= 6.0 - 0.35 + 1e-12);
    r = m.robot;
    last = m.blockers;
  }
  CHECK(r.pose.position.z == doctest::Approx(6.0 - 0.35).epsilon(1e-9));
  CHECK(r.speed == doctest::Approx(0.0));
  REQUIRE(last.size() == 1);
  CHECK(last[0].id == "wall");
  CHECK(last[0].category == ContactCategory::obstacle);

  // The tick reports the contact once.
  auto s2 = scene;
  s2.robot.spawn = {{5.0, 5.0}, 0.0};
  s2.goal.position = {5.0, 9.0};
  Simulation sim(s2);
  for (int i = 0; i < 100; ++i) sim.tick({0.0, 1.0});
  CHECK(sim.robot().pose.position.z == doctest::Approx(6.0 - 0.35).epsilon(1e-9));
  CHECK(sim.log().obstacle_collisions() == 1);
  CHECK(count(sim.log(), EventKind::collision_obstacle) == 1);
}

TEST_CASE("apply_control stops at agent discs and the floor edge") {
  const auto scene = empty_scene(10.0, 10.0);
  const AgentDisc agent{"fork", {5.0, 7.0}, 1.0};
  RobotState r;
  r.pose = {{5.0, 5.0}, 0.0};
  for (int i = 0; i < 100; ++i) {
    r = apply_control(r, {0.0, 1.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {&agent, 1}).robot;
  }
  CHECK(distance(r.pose.position, agent.center) == doctest::Approx(1.35).epsilon(1e-9));

  r.pose = {{5.0, 9.0}, 0.0};
  for (int i = 0; i < 100; ++i) {
    r = apply_control(r, {0.0, 1.0, 0.0}, 0.02, 1.5, 1.5, 0.35, scene, {}).robot;
  }
  CHECK(r.pose.position.z == doctest::Approx(10.0 - 0.35));
}

TEST_CASE("clock advances by dt") {
  Simulation sim(empty_scene(10.0, 10.0));
  for (int i = 0; i < 7; ++i) sim.tick({});
  CHECK(sim.ticks() == 7);
  CHECK(sim.clock() == doctest::Approx(0.14));
  TickConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(Simulation(empty_scene(10.0, 10.0), bad), ContractError);
}

TEST_CASE("empty scene forward input produces no contact or proximity events") {
  auto scene = empty_scene(20.0, 20.0);
  scene.robot.spawn = {{2.0, 2.0}, 0.0};
  scene.goal.position = {18.0, 18.0};
  Simulation sim(scene);
  for (int i = 0; i < 50; ++i) {
    const FeedbackFrame& f = sim.tick({0.0, 1.0});
    CHECK(f.haptic.left == 0.0);
    CHECK(f.haptic.right == 0.0);
  }
  CHECK(sim.robot().pose.position.z == doctest::Approx(2.0 + 50 * 0.03));
  for (const auto& e : sim.log().events()) {
    CHECK(e.kind != EventKind::collision_obstacle);
    CHECK(e.kind != EventKind::collision_shelf);
    CHECK(e.kind != EventKind::proximity_obstacle);
    CHECK(e.kind != EventKind::proximity_shelf);
  }
}

TEST_CASE("autopilot reaches the goal on an empty scene") {
  const auto scene = empty_scene(12.0, 8.0);
  const auto res = run_headless(scene, autopilot_script());
  CHECK(res.log.status() == SessionStatus::goal_reached);
  CHECK(res.log.shelf_collisions() == 0);
  CHECK(res.log.obstacle_collisions() == 0);
  REQUIRE(res.log.goal_time());
  CHECK(*res.log.goal_time() < 20.0);
  CHECK(res.replans >= 1);
}

TEST_CASE("goal clears the path and is announced once") {
  auto scene = empty_scene(10.0, 10.0);
  scene.robot.spawn = {{5.0, 2.0}, 0.0};
  scene.goal.position = {5.0, 5.0};
  Simulation sim(scene);
  int goal_cues = 0;
  bool reached = false;
  for (int i = 0; i < 500 && !reached; ++i) {
    const FeedbackFrame& f = sim.tick({0.0, 1.0});
    for (const auto& c : f.cues) goal_cues += c.kind == CueKind::goal_reached;
    if (sim.status() == SessionStatus::goal_reached) {
      reached = true;
      CHECK(f.path_polyline.empty());
      CHECK_FALSE(sim.path().has_value());
      CHECK(distance(sim.robot().pose.position, scene.goal.position) < 1.0);
    }
  }
  REQUIRE(reached);
  CHECK(goal_cues == 1);
  CHECK(count(sim.log(), EventKind::goal_reached) == 1);
  CHECK_THROWS_AS(sim.tick({}), ContractError);
}

TEST_CASE("an idle robot gets a stuck cue") {
  Simulation sim(empty_scene(10.0, 10.0));
  int stuck = 0;
  for (int i = 0; i < 200; ++i) {
    for (const auto& c : sim.tick({}).cues) stuck += c.kind == CueKind::stuck;
  }
  CHECK(stuck == 1);
  CHECK(sim.status() == SessionStatus::running);
}

TEST_CASE("an unreachable goal sets status stuck and retries") {
  auto scene = empty_scene(10.0, 10.0);
  scene.statics.push_back(make_static("wall", StaticCategory::wall, rect(0.0, 4.0, 10.0, 5.0)));
  Simulation sim(scene);
  for (int i = 0; i < 30; ++i) sim.tick({});
  CHECK(sim.status() == SessionStatus::stuck);
  CHECK_FALSE(sim.path().has_value());
  int failed = 0;
  for (const auto& e : sim.log().events()) {
    if (e.kind != EventKind::replan) continue;
    for (const auto& [k, v] : e.detail) failed += k == "result" && v == "failed";
  }
  CHECK(failed == 3);  // t = 0.02, 0.28 (retry interval 0.25), 0.54
}

TEST_CASE("path follows a moved goal") {
  Simulation sim(empty_scene(10.0, 10.0));
  sim.tick({});
  REQUIRE(sim.path());
  sim.set_goal({9.0, 1.0});
  sim.tick({});
  REQUIRE(sim.path());
  CHECK(sim.path()->waypoints.back() == Vec2{9.0, 1.0});
}

TEST_CASE("a parked agent near the path is carved and felt") {
  auto scene = empty_scene(12.0, 6.0);
  scene.robot.spawn = {{1.0, 3.0}, std::numbers::pi / 2};
  scene.goal.position = {11.0, 3.0};
  scene.agents.push_back(parked("fork", {6.0, 3.0}, 1.0));
  Simulation sim(scene);
  const FeedbackFrame& f = sim.tick({});
  REQUIRE(sim.path());
  CHECK(sim.path()->waypoints.size() >= 3);
  CHECK(f.haptic.zone == Zone::center);
  CHECK(f.haptic.left > 0.0);
  CHECK(f.haptic.left == f.haptic.right);
  CHECK(count(sim.log(), EventKind::proximity_obstacle) == 1);

  const auto res = run_headless(scene, autopilot_script());
  CHECK(res.log.status() == SessionStatus::goal_reached);
  CHECK(res.log.obstacle_collisions() == 0);
}

TEST_CASE("headless runs are byte-identical") {
  auto scene = empty_scene(14.0, 10.0);
  scene.statics.push_back(make_static("box", StaticCategory::box, rect(6.0, 3.0, 8.0, 7.0)));
  DynamicAgent w;
  w.id = "worker";
  w.radius = 0.3;
  w.script = {{{10.0, 1.0}, 0.8}, {{10.0, 9.0}, 0.8}};
  w.loop = true;
  scene.agents.push_back(w);
  const auto a = run_headless(scene, autopilot_script()).log.finalize();
  const auto b = run_headless(scene, autopilot_script()).log.finalize();
  CHECK(a == b);
  CHECK(parse_session_csv(a).finalize() == a);
}

TEST_CASE("manual scripts end with the script") {
  std::istringstream in(R"({"format": "navvi-script/1", "inputs": [
      {"t": 0, "axis_x": 0, "axis_y": 1}, {"t": 1.0, "axis_x": 0, "axis_y": 0}]})");
  const ControlScript s = load_control_script(in);
  CHECK_FALSE(s.autopilot);
  CHECK(s.end_time() == 1.0);
  CHECK(s.sample(0.5).axis_y == 1.0);
  CHECK(s.sample(1.0).axis_y == 0.0);
  const auto res = run_headless(empty_scene(10.0, 10.0), s);
  CHECK(res.log.status() == SessionStatus::running);
  CHECK(res.log.end_time() == doctest::Approx(1.0));
  CHECK(res.log.end_position().z == doctest::Approx(1.0 + 50 * 0.03));
}

TEST_CASE("time cap closes with timeout") {
  std::istringstream in(R"({"format": "navvi-script/1", "duration_s": 100,
      "inputs": [{"t": 0, "axis_x": 0, "axis_y": 0}]})");
  const auto res = run_headless(empty_scene(10.0, 10.0), load_control_script(in), {}, 0.5);
  CHECK(res.log.status() == SessionStatus::timeout);
  CHECK(res.log.end_time() == doctest::Approx(0.5));
}

TEST_CASE("script parse errors name the field") {
  auto err = [](const char* text) {
    std::istringstream in(text);
    try {
      load_control_script(in);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(err("{").find("JSON") != std::string::npos);
  CHECK(err(R"({"format": "x"})").find("$.format") != std::string::npos);
  CHECK(err(R"({"format": "navvi-script/1", "inputs": [{"t": 0, "axis_x": 0}]})")
            .find("$.inputs[0].axis_y") != std::string::npos);
  CHECK(err(R"({"format": "navvi-script/1", "inputs": [{"t": 1, "axis_x": 0, "axis_y": 0},
            {"t": 0, "axis_x": 0, "axis_y": 0}]})")
            .find("$.inputs[1].t") != std::string::npos);
  CHECK(err(R"({"format": "navvi-script/1"})").find("$.inputs") != std::string::npos);
  std::istringstream ok(R"({"format": "navvi-script/1", "autopilot": true})");
  CHECK(load_control_script(ok).autopilot);
}
