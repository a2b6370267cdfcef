#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navvi/events.hpp"
#include "navvi/feedback.hpp"
#include "navvi/navmesh.hpp"
#include "navvi/planner.hpp"
#include "navvi/world_model.hpp"

namespace navvi {

struct ControlInput {
  double axis_x = 0.0;  // turn, + = right
  double axis_y = 0.0;  // forward / back
  double t = 0.0;
};

struct TickConfig {
  double dt = 0.02;
  /// Override the scene's robot limits when set.
  std::optional<double> v_max;
  std::optional<double> yaw_rate_max;
  std::uint64_t seed = 0;
  PlannerConfig planner;
  FeedbackConfig feedback;
  BuildOptions build;
};

struct RobotState {
  Pose pose;
  double speed = 0.0;
};

struct MotionResult {
  RobotState robot;
  std::vector<Contact> blockers;  // obstacles that stopped the motion
};

/// Unicycle step with stop-at-contact against static footprints and agent
/// discs; the position stays inside the floor.
MotionResult apply_control(const RobotState& robot, const ControlInput& input, double dt,
                           double v_max, double yaw_rate_max, double robot_radius,
                           const SceneDescription& scene, std::span<const AgentDisc> agents);

class Simulation {
 public:
  Simulation(SceneDescription scene, TickConfig config = {});

  /// One fixed step. Requires status running or stuck.
  const FeedbackFrame& tick(const ControlInput& input);

  void set_goal(Vec2 position);

  const SceneDescription& scene() const { return scene_; }
  const TickConfig& config() const { return config_; }
  double clock() const { return static_cast<double>(ticks_) * config_.dt; }
  std::uint64_t ticks() const { return ticks_; }
  const RobotState& robot() const { return robot_; }
  const std::vector<AgentDisc>& agents() const { return agents_; }
  std::span<const AgentState> agent_states() const { return agent_states_; }
  const NavMeshRuntime& runtime() const { return runtime_; }
  const std::optional<Path>& path() const { return path_; }
  std::uint64_t path_version() const { return path_version_; }
  SessionStatus status() const { return status_; }
  const SessionLog& log() const { return log_; }
  SessionLog& log() { return log_; }
  const FeedbackFrame& frame() const { return frame_; }
  const PlanStats& last_plan_stats() const { return last_stats_; }
  double v_max() const;
  double yaw_rate_max() const;

  /// Ends the session log with the current status (or `status`).
  void close(std::optional<SessionStatus> status = std::nullopt);

 private:
  void move_agents();
  void replan_if_needed();
  bool try_plan(std::string_view reason);
  void run_events(const MotionResult& motion);
  std::vector<ProximityTarget> haptic_targets() const;

  SceneDescription scene_;
  TickConfig config_;
  NavMeshRuntime runtime_;
  ReplanMonitor monitor_;
  CueScheduler cues_;
  SessionLog log_;

  std::uint64_t ticks_ = 0;
  RobotState robot_;
  std::vector<AgentDisc> agents_;
  std::vector<AgentState> agent_states_;
  std::optional<Path> path_;
  std::uint64_t path_version_ = 0;
  PlanStats last_stats_;
  SessionStatus status_ = SessionStatus::running;
  bool ever_planned_ = false;
  double last_success_ = 0.0;
  double next_retry_ = 0.0;
  bool replanned_ = false;
  bool idle_stuck_ = false;
  std::set<std::string> near_obstacles_;
  std::set<std::string> near_shelves_;
  FeedbackFrame frame_;
};

/// Pure-pursuit follower for the active path, used by headless runs.
class Autopilot {
 public:
  static constexpr double kLookahead = 0.25;
  static constexpr double kTurnInPlace = 0.35;  // rad

  ControlInput steer(const Simulation& sim);

 private:
  std::uint64_t version_ = 0;
  std::size_t segment_ = 0;
};

inline constexpr std::string_view kScriptFormatVersion = "navvi-script/1";

struct ControlScript {
  bool autopilot = false;
  std::vector<ControlInput> inputs;  // sorted by t, sample-and-hold
  std::optional<double> duration;    // defaults to the last input time

  ControlInput sample(double t) const;
  double end_time() const;
};

ControlScript load_control_script(std::istream& in);
ControlScript load_control_script_file(const std::string& path);
ControlScript autopilot_script();

struct HeadlessResult {
  SessionLog log;
  std::uint64_t ticks = 0;
  std::size_t replans = 0;
};

/// Runs until the goal, the end of a manual script, or the time cap
/// (status timeout).
HeadlessResult run_headless(const SceneDescription& scene, const ControlScript& script,
                            const TickConfig& config = {}, double time_cap = 600.0);

}  // namespace navvi
