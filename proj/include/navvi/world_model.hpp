#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "navvi/geometry.hpp"

namespace navvi {

inline constexpr std::string_view kSceneFormatVersion = "navvi-scene/1";

enum class StaticCategory { shelf, wall, box, pedestal };
enum class AgentKind { forklift, pallet_robot, worker };

std::string_view to_string(StaticCategory c);
std::string_view to_string(AgentKind k);

struct StaticObstacle {
  std::string id;
  StaticCategory category = StaticCategory::box;
  std::vector<Vec2> footprint;  // convex, counter-clockwise
  double height = 1.0;
};

struct ScriptPoint {
  Vec2 waypoint;
  double speed = 1.0;  // on the leg that leaves this waypoint
};

struct DynamicAgent {
  std::string id;
  AgentKind kind = AgentKind::worker;
  double radius = 0.3;
  std::vector<ScriptPoint> script;
  bool loop = false;
};

struct RobotConfig {
  double radius = 0.35;
  double v_max = 1.5;
  double yaw_rate_max = 1.5;
  Pose spawn;
};

struct GoalSpec {
  Vec2 position;
  double threshold = 1.0;
};

struct SceneDescription {
  std::string name;
  Aabb floor{{0.0, 0.0}, {1.0, 1.0}};
  std::vector<StaticObstacle> statics;
  std::vector<DynamicAgent> agents;
  RobotConfig robot;
  GoalSpec goal;

  const StaticObstacle* find_static(std::string_view id) const;
  const DynamicAgent* find_agent(std::string_view id) const;
};

struct Violation {
  std::string subject;  // obstacle / agent id or a fixed section name
  std::string message;
};

std::vector<Violation> validate_scene(const SceneDescription& scene);

/// Parses and validates a "navvi-scene/1" document. Throws SceneParseError or
/// SceneValidationError.
SceneDescription load_scene(std::istream& source);
SceneDescription load_scene_text(std::string_view text);
SceneDescription load_scene_file(const std::string& path);

std::string serialize_scene(const SceneDescription& scene);

struct AgentState {
  Vec2 position;
  Vec2 velocity;
};

/// Total time to traverse a looping script once (0 for non-looping or
/// single-waypoint scripts).
double script_period(const DynamicAgent& agent);

AgentState agent_pose_at(const DynamicAgent& agent, double t);

}  // namespace navvi
