#include "navvi/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "navvi/error.hpp"

namespace navvi {

std::string_view to_string(Zone z) {
  switch (z) {
    case Zone::none: return "none";
    case Zone::left: return "left";
    case Zone::center: return "center";
    case Zone::right: return "right";
  }
  return "none";
}

std::string_view to_string(CueKind k) {
  switch (k) {
    case CueKind::direction: return "direction";
    case CueKind::shelf_proximity: return "shelf_proximity";
    case CueKind::stuck: return "stuck";
    case CueKind::goal_reached: return "goal_reached";
  }
  return "direction";
}

std::string AudioCue::text() const {
  switch (kind) {
    case CueKind::direction: return std::to_string(hour) + " o'clock";
    case CueKind::shelf_proximity: return "Shelf nearby";
    case CueKind::stuck: return "You are stuck";
    case CueKind::goal_reached: return "You have reached your destination";
  }
  return {};
}

std::optional<NearestObstacle> nearest_obstacle(const Pose& robot, double robot_radius,
                                                std::span<const ProximityTarget> targets,
                                                const FeedbackConfig& config) {
  std::optional<NearestObstacle> best;
  for (const ProximityTarget& t : targets) {
    double d = 0.0;
    if (t.footprint.empty()) {
      d = distance(robot.position, t.center) - t.radius - robot_radius;
    } else {
      d = point_polygon_distance(t.footprint, robot.position) - robot_radius;
    }
    d = std::max(0.0, d);
    if (d >= config.d_max) continue;
    if (!best || d < best->distance) best = NearestObstacle{t.id, d, to_local_point(robot, t.center)};
  }
  return best;
}

Zone classify_zone(double local_x, const FeedbackConfig& config) {
  if (local_x < -config.center_range) return Zone::left;
  if (local_x > config.center_range) return Zone::right;
  return Zone::center;
}

double intensity_raw(double d, const FeedbackConfig& config) {
  const double c = std::clamp(d, 0.0, config.d_max);
  return std::log1p(1.0 - c / config.d_max);
}

double intensity(double d, const FeedbackConfig& config) {
  return intensity_raw(d, config) / std::numbers::ln2;
}

HapticCommand haptic_command(const Pose& robot, double robot_radius,
                             std::span<const ProximityTarget> targets,
                             const FeedbackConfig& config) {
  HapticCommand cmd;
  const auto nearest = nearest_obstacle(robot, robot_radius, targets, config);
  if (!nearest) return cmd;
  cmd.zone = classify_zone(nearest->local.x, config);
  cmd.raw = intensity_raw(nearest->distance, config);
  const double level = intensity(nearest->distance, config);
  if (cmd.zone != Zone::right) cmd.left = level;
  if (cmd.zone != Zone::left) cmd.right = level;
  return cmd;
}

int clock_hour_from_bearing(double degrees) {
  const double norm = std::fmod(std::fmod(degrees, 360.0) + 360.0, 360.0);
  const int hour = static_cast<int>(std::floor(norm / 30.0 + 0.5));
  return hour == 0 ? 12 : std::min(hour, 12);
}

int clock_direction(const Pose& robot, Vec2 goal) {
  const Vec2 d = goal - robot.position;
  const double len = length(d);
  if (len == 0.0) throw ContractError("goal coincides with the robot position");
  const Vec2 local = to_local_direction(robot, d * (1.0 / len));
  const double theta = std::atan2(local.x, local.z) * 180.0 / std::numbers::pi;
  return clock_hour_from_bearing(theta);
}

bool CueScheduler::ready(CueKind k, double now) const {
  const auto& last = last_[static_cast<int>(k)];
  return !last || now - *last >= config_.cue_refractory - 1e-9;
}

void CueScheduler::mark(CueKind k, double now) { last_[static_cast<int>(k)] = now; }

std::vector<AudioCue> CueScheduler::update(const Inputs& in) {
  std::vector<AudioCue> out;
  if (in.goal_reached) {
    if (!goal_announced_) {
      goal_announced_ = true;
      out.push_back({CueKind::goal_reached, 0, in.now});
      mark(CueKind::goal_reached, in.now);
    }
    return out;
  }

  if (in.near_shelf && !was_near_shelf_ && ready(CueKind::shelf_proximity, in.now)) {
    out.push_back({CueKind::shelf_proximity, 0, in.now});
    mark(CueKind::shelf_proximity, in.now);
  }
  was_near_shelf_ = in.near_shelf;

  if (in.stuck && !was_stuck_ && ready(CueKind::stuck, in.now)) {
    out.push_back({CueKind::stuck, 0, in.now});
    mark(CueKind::stuck, in.now);
  }
  was_stuck_ = in.stuck;

  if (in.navigating && in.hour) {
    const bool periodic =
        !last_direction_ || in.now - *last_direction_ >= config_.direction_announce_period - 1e-9;
    if ((periodic || in.replanned) && ready(CueKind::direction, in.now)) {
      out.push_back({CueKind::direction, *in.hour, in.now});
      mark(CueKind::direction, in.now);
      last_direction_ = in.now;
    }
  }
  return out;
}

}  // namespace navvi
