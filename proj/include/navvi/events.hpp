#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "navvi/geometry.hpp"
#include "navvi/world_model.hpp"

namespace navvi {

enum class EventKind {
  proximity_obstacle,
  proximity_shelf,
  collision_obstacle,
  collision_shelf,
  goal_reached,
  replan,
  cue_emitted,
};
std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

enum class ContactCategory { shelf, obstacle };
std::string_view to_string(ContactCategory c);

enum class SessionStatus { running, goal_reached, stuck, timeout };
std::string_view to_string(SessionStatus s);
std::optional<SessionStatus> session_status_from_string(std::string_view s);

using Detail = std::vector<std::pair<std::string, std::string>>;

struct InteractionEvent {
  EventKind kind = EventKind::replan;
  double t = 0.0;
  Vec2 robot_pos;
  Detail detail;
};

/// Agent disc at the current tick.
struct AgentDisc {
  std::string id;
  Vec2 center;
  double radius = 0.0;
};

struct Contact {
  std::string id;
  ContactCategory category = ContactCategory::obstacle;
};

/// Static footprints closer than robot_radius to the robot center, then
/// agents whose discs overlap the robot; scene order. `slack` widens the
/// test so a robot resting exactly on a boundary still counts as touching.
std::vector<Contact> detect_contacts(Vec2 robot, double robot_radius, const SceneDescription& scene,
                                     std::span<const AgentDisc> agents, double slack = 0.0);

struct ProximityHit {
  std::string id;
  double distance = 0.0;  // surface to surface
  ContactCategory category = ContactCategory::obstacle;
};

/// Everything with surface distance < radius, nearest first (ties by id).
std::vector<ProximityHit> detect_proximity(Vec2 robot, double robot_radius,
                                           const SceneDescription& scene,
                                           std::span<const AgentDisc> agents, double radius);

/// Strictly inside the threshold.
bool check_goal(Vec2 robot, const GoalSpec& goal);

std::string format_fixed3(double v);

class SessionLog;
SessionLog parse_session_csv(std::string_view text);

class SessionLog {
 public:
  explicit SessionLog(double start_time = 0.0) : start_time_(start_time) {}

  /// Appends an event. Collision events bump their counter. Throws
  /// ContractError when t goes backwards.
  void record(InteractionEvent event);

  /// Logs a collision for each contact that was absent on the previous call.
  void observe_contacts(double t, Vec2 robot, std::span<const Contact> contacts);

  void mark_goal(double t, Vec2 robot);
  void close(double t, Vec2 robot, SessionStatus status);

  const std::vector<InteractionEvent>& events() const { return events_; }
  int shelf_collisions() const { return shelf_collisions_; }
  int obstacle_collisions() const { return obstacle_collisions_; }
  double start_time() const { return start_time_; }
  std::optional<double> goal_time() const { return goal_time_; }
  std::optional<double> elapsed() const;
  SessionStatus status() const { return status_; }
  double end_time() const { return end_time_; }
  Vec2 end_position() const { return end_pos_; }

  /// Header, one row per event, then the summary row.
  std::string finalize() const;

 private:
  friend SessionLog parse_session_csv(std::string_view text);

  std::vector<InteractionEvent> events_;
  int shelf_collisions_ = 0;
  int obstacle_collisions_ = 0;
  double start_time_ = 0.0;
  std::optional<double> goal_time_;
  SessionStatus status_ = SessionStatus::running;
  double end_time_ = 0.0;
  Vec2 end_pos_;
  std::set<std::string> in_contact_;
};

inline constexpr std::string_view kCsvHeader =
    "t_s,event_kind,robot_x_m,robot_z_m,detail,shelf_collisions_cum,obstacle_collisions_cum";

std::string format_detail(const Detail& detail);
Detail parse_detail(std::string_view text);

/// RFC 4180 records.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Rebuilds a log from finalize() output (values at their 3-decimal
/// precision). Throws Error on malformed input.
SessionLog parse_session_csv(std::string_view text);

}  // namespace navvi
