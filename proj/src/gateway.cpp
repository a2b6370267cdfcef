#include "navvi/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include <nlohmann/json.hpp>

namespace navvi {

using nlohmann::json;

namespace {

constexpr std::string_view kControlNames[] = {"axes", "load_scene", "start", "reset", "set_goal"};

json envelope(std::string_view type) {
  return {{"v", kWireVersion}, {"type", type}};
}

json point(Vec2 p) { return json::array({p.x, p.z}); }

Vec2 to_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw WireError("bad_field", "expected [x, z]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

double number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw WireError("bad_field", std::string("field '") + key + "' must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw WireError("bad_field", std::string("field '") + key + "' must be finite");
  return v;
}

std::string text(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw WireError("bad_field", std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

json parse_envelope(std::string_view raw, std::string& type) {
  json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw WireError("malformed_json", "message is not a JSON object");
  const auto v = doc.find("v");
  if (v == doc.end() || *v != std::string(kWireVersion)) {
    throw WireError("version_mismatch", "expected \"v\": \"" + std::string(kWireVersion) + "\"");
  }
  const auto t = doc.find("type");
  if (t == doc.end() || !t->is_string()) throw WireError("bad_field", "field 'type' must be a string");
  type = t->get<std::string>();
  return doc;
}

double clamp_axis(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

std::string_view to_string(ControlKind k) { return kControlNames[static_cast<int>(k)]; }

std::string encode_snapshot(const Snapshot& s) {
  json doc = envelope("snapshot");
  doc["seq"] = s.seq;
  doc["clock"] = s.clock;
  doc["robot"] = {{"x", s.robot_position.x},
                  {"z", s.robot_position.z},
                  {"heading", s.robot_heading},
                  {"speed", s.speed}};
  json agents = json::array();
  for (const auto& a : s.agents) {
    agents.push_back({{"id", a.id},
                      {"kind", a.kind},
                      {"x", a.position.x},
                      {"z", a.position.z},
                      {"vx", a.velocity.x},
                      {"vz", a.velocity.z},
                      {"radius", a.radius}});
  }
  doc["agents"] = agents;
  json path = json::array();
  for (Vec2 p : s.path_polyline) path.push_back(point(p));
  doc["path"] = path;
  doc["haptic"] = {{"left", s.haptic_left}, {"right", s.haptic_right}, {"zone", s.haptic_zone}};
  json cues = json::array();
  for (const auto& c : s.cues) {
    cues.push_back({{"kind", c.kind}, {"hour", c.hour}, {"text", c.text}, {"t", c.t}});
  }
  doc["cues"] = cues;
  doc["counters"] = {{"shelf_collisions", s.shelf_collisions},
                     {"obstacle_collisions", s.obstacle_collisions}};
  doc["status"] = s.status;
  doc["goal"] = point(s.goal);
  return doc.dump();
}

Snapshot decode_snapshot(std::string_view raw) {
  std::string type;
  const json doc = parse_envelope(raw, type);
  if (type != "snapshot") throw WireError("unknown_type", "expected a snapshot, got '" + type + "'");
  try {
    Snapshot s;
    s.seq = doc.at("seq").get<std::uint64_t>();
    s.clock = doc.at("clock").get<double>();
    const json& r = doc.at("robot");
    s.robot_position = {r.at("x").get<double>(), r.at("z").get<double>()};
    s.robot_heading = r.at("heading").get<double>();
    s.speed = r.at("speed").get<double>();
    for (const json& a : doc.at("agents")) {
      s.agents.push_back({a.at("id").get<std::string>(),
                          a.at("kind").get<std::string>(),
                          {a.at("x").get<double>(), a.at("z").get<double>()},
                          {a.at("vx").get<double>(), a.at("vz").get<double>()},
                          a.at("radius").get<double>()});
    }
    for (const json& p : doc.at("path")) s.path_polyline.push_back(to_point(p));
    const json& h = doc.at("haptic");
    s.haptic_left = h.at("left").get<double>();
    s.haptic_right = h.at("right").get<double>();
    s.haptic_zone = h.at("zone").get<std::string>();
    for (const json& c : doc.at("cues")) {
      s.cues.push_back({c.at("kind").get<std::string>(), c.at("hour").get<int>(),
                        c.at("text").get<std::string>(), c.at("t").get<double>()});
    }
    const json& k = doc.at("counters");
    s.shelf_collisions = k.at("shelf_collisions").get<int>();
    s.obstacle_collisions = k.at("obstacle_collisions").get<int>();
    s.status = doc.at("status").get<std::string>();
    s.goal = to_point(doc.at("goal"));
    return s;
  } catch (const json::exception& e) {
    throw WireError("bad_field", std::string("snapshot: ") + e.what());
  }
}

std::string encode_control(const ControlMessage& m) {
  json doc = envelope(to_string(m.kind));
  switch (m.kind) {
    case ControlKind::axes:
      doc["axis_x"] = m.axis_x;
      doc["axis_y"] = m.axis_y;
      break;
    case ControlKind::load_scene: doc["name"] = m.scene; break;
    case ControlKind::set_goal:
      doc["x"] = m.point.x;
      doc["z"] = m.point.z;
      break;
    case ControlKind::start:
    case ControlKind::reset: break;
  }
  return doc.dump();
}

ControlMessage decode_control(std::string_view raw) {
  std::string type;
  const json doc = parse_envelope(raw, type);
  ControlMessage m;
  if (type == "axes") {
    m.kind = ControlKind::axes;
    m.axis_x = clamp_axis(number(doc, "axis_x"));
    m.axis_y = clamp_axis(number(doc, "axis_y"));
  } else if (type == "load_scene") {
    m.kind = ControlKind::load_scene;
    m.scene = text(doc, "name");
  } else if (type == "start") {
    m.kind = ControlKind::start;
  } else if (type == "reset") {
    m.kind = ControlKind::reset;
  } else if (type == "set_goal") {
    m.kind = ControlKind::set_goal;
    m.point = {number(doc, "x"), number(doc, "z")};
  } else {
    throw WireError("unknown_type", "unknown message type '" + type + "'");
  }
  return m;
}

std::string encode_error(std::string_view code, std::string_view message) {
  json doc = envelope("error");
  doc["code"] = code;
  doc["message"] = message;
  return doc.dump();
}

std::string encode_hello(std::uint64_t client, bool driver) {
  json doc = envelope("hello");
  doc["client"] = client;
  doc["role"] = driver ? "driver" : "observer";
  return doc.dump();
}

std::string encode_role(bool driver) {
  json doc = envelope("role");
  doc["role"] = driver ? "driver" : "observer";
  return doc.dump();
}

std::string encode_scene(const SceneDescription& scene) {
  json doc = envelope("scene");
  doc["scene"] = json::parse(serialize_scene(scene));
  return doc.dump();
}

Snapshot make_snapshot(const Simulation& sim, std::uint64_t seq, std::vector<SnapshotCue> cues) {
  Snapshot s;
  s.seq = seq;
  s.clock = sim.clock();
  s.robot_position = sim.robot().pose.position;
  s.robot_heading = sim.robot().pose.heading;
  s.speed = sim.robot().speed;
  const auto states = sim.agent_states();
  for (std::size_t i = 0; i < sim.agents().size(); ++i) {
    const auto& a = sim.agents()[i];
    s.agents.push_back({a.id, std::string(to_string(sim.scene().agents[i].kind)), a.center,
                        states[i].velocity, a.radius});
  }
  const FeedbackFrame& f = sim.frame();
  s.path_polyline = f.path_polyline;
  s.haptic_left = f.haptic.left;
  s.haptic_right = f.haptic.right;
  s.haptic_zone = std::string(to_string(f.haptic.zone));
  s.cues = std::move(cues);
  s.shelf_collisions = sim.log().shelf_collisions();
  s.obstacle_collisions = sim.log().obstacle_collisions();
  s.status = std::string(to_string(sim.status()));
  s.goal = sim.scene().goal.position;
  return s;
}

std::string resolve_scene_path(const std::string& dir, const std::string& name) {
  if (name.empty() || name.front() == '.' || name.find_first_of("/\\") != std::string::npos) {
    throw WireError("scene_not_found", "invalid scene name '" + name + "'");
  }
  return (dir.empty() ? std::string(".") : dir) + "/" + name + ".json";
}

std::string scene_dir_or_default(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NAVVI_SCENE_DIR"); env && *env) return env;
  return "scenes";
}

SceneDescription load_scene_arg(const std::string& arg, const std::string& dir) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) return load_scene_file(arg);
  const std::string path = resolve_scene_path(dir, arg);
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error("scene '" + arg + "' not found (looked for " + path + ")");
  }
  return load_scene_file(path);
}

// ---------------------------------------------------------------------------

GatewayCore::GatewayCore(GatewayConfig config) : config_(std::move(config)) {
  if (!(config_.tick_hz > 0.0) || !(config_.snapshot_hz > 0.0)) {
    throw ContractError("tick and snapshot rates must be positive");
  }
}

TickConfig GatewayCore::tick_config() const {
  TickConfig c;
  c.dt = 1.0 / config_.tick_hz;
  c.seed = config_.seed;
  return c;
}

std::vector<Outgoing> GatewayCore::connect() {
  const std::uint64_t id = next_client_++;
  clients_.push_back(id);
  if (!driver_) driver_ = id;
  std::vector<Outgoing> out{{id, encode_hello(id, driver_ == id)}};
  if (scene_) out.push_back({id, encode_scene(sim_ ? sim_->scene() : *scene_)});
  return out;
}

std::vector<Outgoing> GatewayCore::disconnect(std::uint64_t client) {
  std::erase(clients_, client);
  std::vector<Outgoing> out;
  if (driver_ == client) {
    driver_.reset();
    if (!clients_.empty()) {
      driver_ = clients_.front();
      out.push_back({*driver_, encode_role(true)});
    }
  }
  return out;
}

std::vector<Outgoing> GatewayCore::receive(std::uint64_t client, std::string_view text) {
  try {
    ControlMessage m = decode_control(text);
    if (driver_ != client) throw WireError("not_driver", "only the driver may send control messages");
    queue_.emplace_back(client, std::move(m));
    return {};
  } catch (const WireError& e) {
    return {{client, encode_error(e.code(), e.what())}};
  }
}

void GatewayCore::apply(std::uint64_t client, const ControlMessage& m, std::vector<Outgoing>& out) {
  auto fail = [&](std::string_view code, const std::string& msg) {
    out.push_back({client, encode_error(code, msg)});
  };
  switch (m.kind) {
    case ControlKind::axes:
      axes_.axis_x = m.axis_x;
      axes_.axis_y = m.axis_y;
      return;
    case ControlKind::load_scene: {
      std::string path;
      try {
        path = resolve_scene_path(config_.scene_dir, m.scene);
      } catch (const WireError& e) {
        return fail(e.code(), e.what());
      }
      try {
        scene_ = load_scene_file(path);
      } catch (const SceneParseError& e) {
        return fail("scene_invalid", e.what());
      } catch (const SceneValidationError& e) {
        return fail("scene_invalid", e.what());
      } catch (const Error& e) {
        return fail("scene_not_found", e.what());
      }
      sim_ = std::make_unique<Simulation>(*scene_, tick_config());
      started_ = false;
      axes_ = {};
      pending_cues_.clear();
      out.push_back({0, encode_scene(*scene_)});
      return;
    }
    case ControlKind::start:
      if (!sim_) return fail("no_scene", "load a scene first");
      started_ = true;
      return;
    case ControlKind::reset:
      if (!scene_) return fail("no_scene", "load a scene first");
      sim_ = std::make_unique<Simulation>(*scene_, tick_config());
      started_ = false;
      axes_ = {};
      pending_cues_.clear();
      return;
    case ControlKind::set_goal:
      if (!sim_) return fail("no_scene", "load a scene first");
      try {
        sim_->set_goal(m.point);
      } catch (const ContractError& e) {
        return fail("session_over", e.what());
      }
      out.push_back({0, encode_scene(sim_->scene())});
      return;
  }
}

std::vector<Outgoing> GatewayCore::step() {
  std::vector<Outgoing> out;
  while (!queue_.empty()) {
    auto [client, m] = std::move(queue_.front());
    queue_.pop_front();
    apply(client, m, out);
  }
  if (!sim_) return out;
  const bool live = sim_->status() == SessionStatus::running || sim_->status() == SessionStatus::stuck;
  if (started_ && live) {
    ControlInput in = axes_;
    in.t = sim_->clock();
    for (const AudioCue& c : sim_->tick(in).cues) {
      pending_cues_.push_back({std::string(to_string(c.kind)), c.kind == CueKind::direction ? c.hour : 0,
                               c.text(), c.t});
    }
  }
  if (phase_ >= 1.0 - 1e-9) {
    phase_ -= 1.0;
    out.push_back({0, encode_snapshot(make_snapshot(*sim_, ++seq_, std::move(pending_cues_)))});
    pending_cues_.clear();
  }
  phase_ += std::min(1.0, config_.snapshot_hz / config_.tick_hz);
  return out;
}

}  // namespace navvi
