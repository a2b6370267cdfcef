#include <cstdlib>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "navvi/gateway.hpp"

using namespace navvi;
using nlohmann::json;

namespace {

std::string code_of(const std::string& text) {
  const json j = json::parse(text);
  return j.value("type", "") == "error" ? j.at("code").get<std::string>() : std::string();
}

std::vector<json> of_type(const std::vector<Outgoing>& out, const std::string& type) {
  std::vector<json> r;
  for (const auto& o : out) {
    json j = json::parse(o.text);
    if (j.at("type") == type) r.push_back(std::move(j));
  }
  return r;
}

GatewayConfig test_config() {
  GatewayConfig c;
  c.scene_dir = NAVVI_TEST_SCENE_DIR;
  return c;
}

}  // namespace

TEST_CASE("snapshot round trip") {
  Snapshot s;
  s.seq = 42;
  s.clock = 1.0 / 3.0;
  s.robot_position = {1.25, -0.1};
  s.robot_heading = -2.5;
  s.speed = 1.5;
  s.agents.push_back({"fork", "forklift", {3.0, 4.0}, {0.0, -1.0}, 1.0});
  s.path_polyline = {{0.1, 0.2}, {3.3, 4.4}, {1e-17, 7.0}};
  s.haptic_left = 0.5849625007211562;
  s.haptic_right = 0.0;
  s.haptic_zone = "left";
  s.cues.push_back({"direction", 3, "3 o'clock", 0.02});
  s.cues.push_back({"goal_reached", 0, "You have reached your destination", 9.5});
  s.shelf_collisions = 2;
  s.obstacle_collisions = 1;
  s.status = "goal_reached";
  s.goal = {9.0, 9.0};
  const std::string text = encode_snapshot(s);
  CHECK(decode_snapshot(text) == s);
  CHECK(encode_snapshot(decode_snapshot(text)) == text);
  CHECK(json::parse(text).at("v") == "navvi-wire/1");
}

TEST_CASE("control message round trip and clamping") {
  for (const ControlMessage& m :
       {ControlMessage{ControlKind::axes, 0.25, -1.0, "", {}},
        ControlMessage{ControlKind::load_scene, 0, 0, "warehouse_a", {}},
        ControlMessage{ControlKind::start, 0, 0, "", {}}, ControlMessage{ControlKind::reset, 0, 0, "", {}},
        ControlMessage{ControlKind::set_goal, 0, 0, "", {3.5, 4.5}}}) {
    CHECK(decode_control(encode_control(m)) == m);
  }
  const auto m = decode_control(R"({"v":"navvi-wire/1","type":"axes","axis_x":5,"axis_y":-2.5})");
  CHECK(m.axis_x == 1.0);
  CHECK(m.axis_y == -1.0);
}

TEST_CASE("malformed control messages carry codes") {
  auto code = [](std::string_view text) {
    try {
      decode_control(text);
    } catch (const WireError& e) {
      return e.code();
    }
    return std::string();
  };
  CHECK(code("not json") == "malformed_json");
  CHECK(code("[1,2]") == "malformed_json");
  CHECK(code(R"({"type":"start"})") == "version_mismatch");
  CHECK(code(R"({"v":"navvi-wire/0","type":"start"})") == "version_mismatch");
  CHECK(code(R"({"v":"navvi-wire/1","type":"jump"})") == "unknown_type");
  CHECK(code(R"({"v":"navvi-wire/1"})") == "bad_field");
  CHECK(code(R"({"v":"navvi-wire/1","type":"axes","axis_x":"1","axis_y":0})") == "bad_field");
  CHECK(code(R"({"v":"navvi-wire/1","type":"set_goal","x":1})") == "bad_field");
  CHECK(code(R"({"v":"navvi-wire/1","type":"load_scene","name":3})") == "bad_field");
}

TEST_CASE("scene names resolve inside the scene directory") {
  CHECK(resolve_scene_path("scenes", "warehouse_a") == "scenes/warehouse_a.json");
  CHECK_THROWS_AS(resolve_scene_path("scenes", "../etc/passwd"), WireError);
  CHECK_THROWS_AS(resolve_scene_path("scenes", ".hidden"), WireError);
  CHECK_THROWS_AS(resolve_scene_path("scenes", ""), WireError);
  CHECK(load_scene_arg("empty_room", NAVVI_TEST_SCENE_DIR).name == "empty_room");
  CHECK(load_scene_arg(std::string(NAVVI_TEST_SCENE_DIR) + "/empty_room.json", "nowhere").name ==
        "empty_room");
  CHECK_THROWS_AS(load_scene_arg("missing", NAVVI_TEST_SCENE_DIR), Error);
}

TEST_CASE("scene dir falls back to the environment") {
  ::setenv("NAVVI_SCENE_DIR", "/tmp/somewhere", 1);
  CHECK(scene_dir_or_default("") == "/tmp/somewhere");
  CHECK(scene_dir_or_default("given") == "given");
  ::unsetenv("NAVVI_SCENE_DIR");
  CHECK(scene_dir_or_default("") == "scenes");
}

TEST_CASE("first client drives, the next observes until the driver leaves") {
  GatewayCore core(test_config());
  const auto a = core.connect();
  const auto b = core.connect();
  CHECK(json::parse(a[0].text).at("role") == "driver");
  CHECK(json::parse(b[0].text).at("role") == "observer");
  CHECK(core.driver() == a[0].client);

  const auto denied = core.receive(b[0].client, encode_control({ControlKind::start}));
  REQUIRE(denied.size() == 1);
  CHECK(code_of(denied[0].text) == "not_driver");

  const auto promoted = core.disconnect(a[0].client);
  REQUIRE(promoted.size() == 1);
  CHECK(promoted[0].client == b[0].client);
  CHECK(json::parse(promoted[0].text).at("role") == "driver");
  CHECK(core.receive(b[0].client, encode_control({ControlKind::start})).empty());
}

TEST_CASE("malformed messages get an error reply and the session continues") {
  GatewayCore core(test_config());
  const auto id = core.connect()[0].client;
  const auto r = core.receive(id, "{oops");
  REQUIRE(r.size() == 1);
  CHECK(r[0].client == id);
  CHECK(code_of(r[0].text) == "malformed_json");
  CHECK(core.receive(id, encode_control({ControlKind::load_scene, 0, 0, "empty_room", {}})).empty());
  core.step();
  CHECK(core.simulation() != nullptr);
}

TEST_CASE("scene and session errors") {
  GatewayCore core(test_config());
  const auto id = core.connect()[0].client;
  core.receive(id, encode_control({ControlKind::start}));
  CHECK(code_of(core.step().at(0).text) == "no_scene");
  core.receive(id, encode_control({ControlKind::load_scene, 0, 0, "nope", {}}));
  CHECK(code_of(core.step().at(0).text) == "scene_not_found");
  core.receive(id, encode_control({ControlKind::load_scene, 0, 0, "../scenes/empty_room", {}}));
  CHECK(code_of(core.step().at(0).text) == "scene_not_found");
}

TEST_CASE("messages apply at tick boundaries, latest axes win") {
  GatewayConfig cfg = test_config();
  cfg.snapshot_hz = 50.0;
  GatewayCore core(cfg);
  const auto id = core.connect()[0].client;
  core.receive(id, encode_control({ControlKind::load_scene, 0, 0, "empty_room", {}}));
  core.receive(id, encode_control({ControlKind::start}));
  core.receive(id, encode_control({ControlKind::axes, 0.0, -1.0, "", {}}));
  core.receive(id, encode_control({ControlKind::axes, 0.0, 1.0, "", {}}));
  CHECK(core.simulation() == nullptr);
  const auto out = core.step();
  REQUIRE(of_type(out, "scene").size() == 1);
  const auto snaps = of_type(out, "snapshot");
  REQUIRE(snaps.size() == 1);
  const Snapshot s = decode_snapshot(snaps[0].dump());
  CHECK(s.speed == doctest::Approx(1.5));
  CHECK(s.robot_position.z == doctest::Approx(1.0 + 0.03));
  CHECK(s.clock == doctest::Approx(0.02));
}

TEST_CASE("snapshots are decimated and sequence numbers increase") {
  GatewayCore core(test_config());  // 50 Hz ticks, 20 Hz snapshots
  const auto id = core.connect()[0].client;
  core.receive(id, encode_control({ControlKind::load_scene, 0, 0, "empty_room", {}}));
  core.receive(id, encode_control({ControlKind::start}));
  std::vector<Snapshot> snaps;
  for (int i = 0; i < 100; ++i) {
    for (const auto& j : of_type(core.step(), "snapshot")) snaps.push_back(decode_snapshot(j.dump()));
  }
  CHECK(snaps.size() == 40);
  for (std::size_t i = 0; i < snaps.size(); ++i) CHECK(snaps[i].seq == i + 1);
  int cues = 0;
  for (const auto& s : snaps) cues += static_cast<int>(s.cues.size());
  CHECK(cues == static_cast<int>(std::count_if(
                    core.simulation()->log().events().begin(), core.simulation()->log().events().end(),
                    [](const InteractionEvent& e) { return e.kind == EventKind::cue_emitted; })));
}

TEST_CASE("reset restores the spawn and set_goal moves the goal") {
  GatewayConfig cfg = test_config();
  cfg.snapshot_hz = 50.0;
  GatewayCore core(cfg);
  const auto id = core.connect()[0].client;
  core.receive(id, encode_control({ControlKind::load_scene, 0, 0, "empty_room", {}}));
  core.receive(id, encode_control({ControlKind::start}));
  core.receive(id, encode_control({ControlKind::axes, 0.0, 1.0, "", {}}));
  for (int i = 0; i < 10; ++i) core.step();
  CHECK(core.simulation()->clock() == doctest::Approx(0.2));
  core.receive(id, encode_control({ControlKind::reset}));
  core.receive(id, encode_control({ControlKind::set_goal, 0, 0, "", {2.0, 6.0}}));
  const auto snaps = of_type(core.step(), "snapshot");
  REQUIRE(snaps.size() == 1);
  const Snapshot s = decode_snapshot(snaps[0].dump());
  CHECK(s.clock == 0.0);
  CHECK(s.robot_position == Vec2{1.0, 1.0});
  CHECK(s.goal == Vec2{2.0, 6.0});
  CHECK_FALSE(core.started());
}
