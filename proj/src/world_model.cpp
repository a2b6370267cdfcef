#include "navvi/world_model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "navvi/error.hpp"

namespace navvi {

using nlohmann::json;

std::string_view to_string(StaticCategory c) {
  switch (c) {
    case StaticCategory::shelf: return "shelf";
    case StaticCategory::wall: return "wall";
    case StaticCategory::box: return "box";
    case StaticCategory::pedestal: return "pedestal";
  }
  return "box";
}

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::forklift: return "forklift";
    case AgentKind::pallet_robot: return "pallet_robot";
    case AgentKind::worker: return "worker";
  }
  return "worker";
}

const StaticObstacle* SceneDescription::find_static(std::string_view id) const {
  for (const auto& s : statics) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const DynamicAgent* SceneDescription::find_agent(std::string_view id) const {
  for (const auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate_scene(const SceneDescription& scene) {
  std::vector<Violation> out;
  const Aabb& floor = scene.floor;
  if (!(floor.width() > 0.0) || !(floor.depth() > 0.0)) {
    out.push_back({"floor", "floor bounds must have positive width and depth"});
  }

  std::map<std::string, int> seen;
  auto check_id = [&](const std::string& id) {
    if (id.empty()) out.push_back({"<unnamed>", "obstacle id must not be empty"});
    if (seen[id]++ > 0) out.push_back({id, "duplicate obstacle id"});
  };

  for (const auto& s : scene.statics) {
    check_id(s.id);
    if (s.footprint.size() < 3) {
      out.push_back({s.id, "footprint needs at least 3 vertices"});
      continue;
    }
    if (!(polygon_area(s.footprint) > 0.0)) {
      out.push_back({s.id, "footprint must be counter-clockwise with positive area"});
    } else if (!is_convex_ccw(s.footprint)) {
      out.push_back({s.id, "footprint must be convex"});
    }
    for (const Vec2& v : s.footprint) {
      if (!floor.contains(v)) {
        out.push_back({s.id, "footprint vertex lies outside the floor"});
        break;
      }
    }
    if (!(s.height > 0.0)) out.push_back({s.id, "height must be positive"});
  }

  for (const auto& a : scene.agents) {
    check_id(a.id);
    if (!(a.radius > 0.0)) out.push_back({a.id, "agent radius must be positive"});
    if (a.script.empty()) out.push_back({a.id, "script needs at least one waypoint"});
    for (const auto& sp : a.script) {
      if (!(sp.speed > 0.0)) {
        out.push_back({a.id, "script speeds must be positive"});
        break;
      }
    }
    for (const auto& sp : a.script) {
      if (!floor.contains(sp.waypoint)) {
        out.push_back({a.id, "script waypoint lies outside the floor"});
        break;
      }
    }
  }

  const RobotConfig& r = scene.robot;
  if (!(r.radius > 0.0)) out.push_back({"robot", "radius must be positive"});
  if (!(r.v_max > 0.0)) out.push_back({"robot", "v_max must be positive"});
  if (!(r.yaw_rate_max > 0.0)) out.push_back({"robot", "yaw_rate_max must be positive"});
  if (!floor.contains(r.spawn.position)) out.push_back({"robot", "spawn lies outside the floor"});

  if (!(scene.goal.threshold > 0.0)) out.push_back({"goal", "threshold must be positive"});
  if (!floor.contains(scene.goal.position)) out.push_back({"goal", "goal lies outside the floor"});
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SceneParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SceneParseError(path + "." + key, "missing required field");
  return *it;
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw SceneParseError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SceneParseError(path, "expected a finite number");
  return d;
}

double optional_number(const json& obj, const std::string& key, double fallback,
                       const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number_at(*it, path + "." + key);
}

std::string string_at(const json& v, const std::string& path) {
  if (!v.is_string()) throw SceneParseError(path, "expected a string");
  return v.get<std::string>();
}

Vec2 point_at(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw SceneParseError(path, "expected [x, z]");
  return {number_at(v[0], path + "[0]"), number_at(v[1], path + "[1]")};
}

StaticCategory category_at(const json& v, const std::string& path) {
  const std::string s = string_at(v, path);
  if (s == "shelf") return StaticCategory::shelf;
  if (s == "wall") return StaticCategory::wall;
  if (s == "box") return StaticCategory::box;
  if (s == "pedestal") return StaticCategory::pedestal;
  throw SceneParseError(path, "unknown category '" + s + "'");
}

AgentKind kind_at(const json& v, const std::string& path) {
  const std::string s = string_at(v, path);
  if (s == "forklift") return AgentKind::forklift;
  if (s == "pallet_robot") return AgentKind::pallet_robot;
  if (s == "worker") return AgentKind::worker;
  throw SceneParseError(path, "unknown agent kind '" + s + "'");
}

SceneDescription parse_document(const json& doc) {
  if (!doc.is_object()) throw SceneParseError("$", "expected a top-level object");
  SceneDescription scene;

  const std::string version = string_at(require(doc, "version", "$"), "$.version");
  if (version != kSceneFormatVersion) {
    throw SceneParseError("$.version", "unsupported version '" + version + "'");
  }
  if (auto it = doc.find("name"); it != doc.end()) scene.name = string_at(*it, "$.name");

  const json& floor = require(doc, "floor", "$");
  scene.floor.min = point_at(require(floor, "min", "$.floor"), "$.floor.min");
  scene.floor.max = point_at(require(floor, "max", "$.floor"), "$.floor.max");

  if (auto it = doc.find("statics"); it != doc.end()) {
    if (!it->is_array()) throw SceneParseError("$.statics", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& s = (*it)[i];
      const std::string path = "$.statics[" + std::to_string(i) + "]";
      StaticObstacle obs;
      obs.id = string_at(require(s, "id", path), path + ".id");
      obs.category = category_at(require(s, "category", path), path + ".category");
      const json& fp = require(s, "footprint", path);
      if (!fp.is_array()) throw SceneParseError(path + ".footprint", "expected an array");
      for (std::size_t k = 0; k < fp.size(); ++k) {
        obs.footprint.push_back(point_at(fp[k], path + ".footprint[" + std::to_string(k) + "]"));
      }
      obs.height = optional_number(s, "height", obs.height, path);
      scene.statics.push_back(std::move(obs));
    }
  }

  if (auto it = doc.find("agents"); it != doc.end()) {
    if (!it->is_array()) throw SceneParseError("$.agents", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& a = (*it)[i];
      const std::string path = "$.agents[" + std::to_string(i) + "]";
      DynamicAgent agent;
      agent.id = string_at(require(a, "id", path), path + ".id");
      agent.kind = kind_at(require(a, "kind", path), path + ".kind");
      agent.radius = number_at(require(a, "radius", path), path + ".radius");
      if (auto lp = a.find("loop"); lp != a.end()) {
        if (!lp->is_boolean()) throw SceneParseError(path + ".loop", "expected a boolean");
        agent.loop = lp->get<bool>();
      }
      const json& script = require(a, "script", path);
      if (!script.is_array()) throw SceneParseError(path + ".script", "expected an array");
      for (std::size_t k = 0; k < script.size(); ++k) {
        const std::string sp = path + ".script[" + std::to_string(k) + "]";
        ScriptPoint p;
        p.waypoint = point_at(require(script[k], "at", sp), sp + ".at");
        p.speed = optional_number(script[k], "speed", p.speed, sp);
        agent.script.push_back(p);
      }
      scene.agents.push_back(std::move(agent));
    }
  }

  scene.robot.spawn.position = {0.5 * (scene.floor.min.x + scene.floor.max.x),
                                0.5 * (scene.floor.min.z + scene.floor.max.z)};
  if (auto it = doc.find("robot"); it != doc.end()) {
    const json& r = *it;
    if (!r.is_object()) throw SceneParseError("$.robot", "expected an object");
    scene.robot.radius = optional_number(r, "radius", scene.robot.radius, "$.robot");
    scene.robot.v_max = optional_number(r, "v_max", scene.robot.v_max, "$.robot");
    scene.robot.yaw_rate_max =
        optional_number(r, "yaw_rate_max", scene.robot.yaw_rate_max, "$.robot");
    if (auto sp = r.find("spawn"); sp != r.end()) {
      scene.robot.spawn.position.x = number_at(require(*sp, "x", "$.robot.spawn"), "$.robot.spawn.x");
      scene.robot.spawn.position.z = number_at(require(*sp, "z", "$.robot.spawn"), "$.robot.spawn.z");
      scene.robot.spawn.heading = optional_number(*sp, "heading", 0.0, "$.robot.spawn");
    }
  }

  const json& goal = require(doc, "goal", "$");
  scene.goal.position = point_at(require(goal, "position", "$.goal"), "$.goal.position");
  scene.goal.threshold = optional_number(goal, "threshold", scene.goal.threshold, "$.goal");
  return scene;
}

}  // namespace

SceneDescription load_scene(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw SceneParseError("$", e.what());
  }
  SceneDescription scene = parse_document(doc);
  const auto violations = validate_scene(scene);
  if (!violations.empty()) {
    std::string msg = "invalid scene:";
    for (const auto& v : violations) msg += " [" + v.subject + "] " + v.message + ";";
    throw SceneValidationError(msg);
  }
  return scene;
}

SceneDescription load_scene_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_scene(in);
}

SceneDescription load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene file '" + path + "'");
  return load_scene(in);
}

std::string serialize_scene(const SceneDescription& scene) {
  auto pt = [](Vec2 p) { return json::array({p.x, p.z}); };
  json doc;
  doc["version"] = kSceneFormatVersion;
  doc["name"] = scene.name;
  doc["floor"] = {{"min", pt(scene.floor.min)}, {"max", pt(scene.floor.max)}};
  json statics = json::array();
  for (const auto& s : scene.statics) {
    json fp = json::array();
    for (const Vec2& v : s.footprint) fp.push_back(pt(v));
    statics.push_back({{"id", s.id},
                       {"category", to_string(s.category)},
                       {"footprint", fp},
                       {"height", s.height}});
  }
  doc["statics"] = statics;
  json agents = json::array();
  for (const auto& a : scene.agents) {
    json script = json::array();
    for (const auto& sp : a.script) script.push_back({{"at", pt(sp.waypoint)}, {"speed", sp.speed}});
    agents.push_back({{"id", a.id},
                      {"kind", to_string(a.kind)},
                      {"radius", a.radius},
                      {"loop", a.loop},
                      {"script", script}});
  }
  doc["agents"] = agents;
  doc["robot"] = {{"radius", scene.robot.radius},
                  {"v_max", scene.robot.v_max},
                  {"yaw_rate_max", scene.robot.yaw_rate_max},
                  {"spawn",
                   {{"x", scene.robot.spawn.position.x},
                    {"z", scene.robot.spawn.position.z},
                    {"heading", scene.robot.spawn.heading}}}};
  doc["goal"] = {{"position", pt(scene.goal.position)}, {"threshold", scene.goal.threshold}};
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Scripted motion

namespace {

struct Leg {
  Vec2 from;
  Vec2 dir;  // unit
  double speed;
  double start;
  double duration;
};

std::vector<Leg> legs_of(const DynamicAgent& agent) {
  std::vector<Leg> legs;
  const auto& s = agent.script;
  const std::size_t n = s.size();
  const std::size_t count = agent.loop ? n : (n == 0 ? 0 : n - 1);
  double t = 0.0;
  for (std::size_t i = 0; i < count && n > 1; ++i) {
    const Vec2 a = s[i].waypoint;
    const Vec2 b = s[(i + 1) % n].waypoint;
    const double len = distance(a, b);
    if (len <= 0.0) continue;
    const double dur = len / s[i].speed;
    legs.push_back({a, (b - a) * (1.0 / len), s[i].speed, t, dur});
    t += dur;
  }
  return legs;
}

}  // namespace

double script_period(const DynamicAgent& agent) {
  if (!agent.loop) return 0.0;
  double total = 0.0;
  for (const Leg& leg : legs_of(agent)) total += leg.duration;
  return total;
}

AgentState agent_pose_at(const DynamicAgent& agent, double t) {
  if (agent.script.empty()) return {};
  const std::vector<Leg> legs = legs_of(agent);
  if (legs.empty()) return {agent.script.front().waypoint, {}};

  const double total = legs.back().start + legs.back().duration;
  double local = std::max(t, 0.0);
  if (agent.loop) {
    local = std::fmod(local, total);
  } else if (local >= total) {
    return {agent.script.back().waypoint, {}};
  }
  // Last leg whose start is <= local.
  std::size_t i = 0;
  while (i + 1 < legs.size() && legs[i + 1].start <= local) ++i;
  const Leg& leg = legs[i];
  const double along = std::min(local - leg.start, leg.duration) * leg.speed;
  return {leg.from + leg.dir * along, leg.dir * leg.speed};
}

}  // namespace navvi
