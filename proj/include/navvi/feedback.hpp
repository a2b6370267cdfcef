#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navvi/geometry.hpp"

namespace navvi {

struct FeedbackConfig {
  double d_max = 5.0;
  double center_range = 1.0;
  double shelf_audio_radius = 1.0;
  double direction_announce_period = 5.0;
  double cue_refractory = 2.0;  // per cue kind
};

enum class Zone { none, left, center, right };
std::string_view to_string(Zone z);

struct HapticCommand {
  double left = 0.0;
  double right = 0.0;
  Zone zone = Zone::none;
  double raw = 0.0;  // log(1 + (1 - d/d_max)) before normalization
};

enum class CueKind { direction, shelf_proximity, stuck, goal_reached };
std::string_view to_string(CueKind k);

struct AudioCue {
  CueKind kind = CueKind::direction;
  int hour = 0;  // direction cues only, 1..12
  double t = 0.0;

  /// Spoken form: "3 o'clock", "Shelf nearby", ...
  std::string text() const;
};

/// Something that drives the haptics: a disc (agents) or a convex footprint.
struct ProximityTarget {
  std::string id;
  Vec2 center;
  double radius = 0.0;
  std::vector<Vec2> footprint;  // empty for discs
};

struct NearestObstacle {
  std::string id;
  double distance = 0.0;  // surface to surface, m
  Vec2 local;             // target center in the robot frame
};

std::optional<NearestObstacle> nearest_obstacle(const Pose& robot, double robot_radius,
                                                std::span<const ProximityTarget> targets,
                                                const FeedbackConfig& config = {});

Zone classify_zone(double local_x, const FeedbackConfig& config = {});

/// ln(1 + (1 - d/d_max)) with d clamped to [0, d_max].
double intensity_raw(double d, const FeedbackConfig& config = {});
/// intensity_raw / ln 2, so contact maps to 1.
double intensity(double d, const FeedbackConfig& config = {});

HapticCommand haptic_command(const Pose& robot, double robot_radius,
                             std::span<const ProximityTarget> targets,
                             const FeedbackConfig& config = {});

/// Hour for a bearing in degrees (clockwise from ahead): round half up of
/// bearing/30 after normalizing to [0, 360), with 0 reported as 12.
int clock_hour_from_bearing(double degrees);

/// Bearing of `goal` on the robot's clock face. Throws ContractError when the
/// goal coincides with the robot.
int clock_direction(const Pose& robot, Vec2 goal);

/// Edge-triggered, rate-limited audio cue generation.
class CueScheduler {
 public:
  explicit CueScheduler(FeedbackConfig config = {}) : config_(config) {}

  struct Inputs {
    double now = 0.0;
    bool near_shelf = false;
    bool stuck = false;
    bool goal_reached = false;
    bool navigating = false;  // a path is active and the goal is not reached
    bool replanned = false;   // a non-periodic replan happened this tick
    std::optional<int> hour;  // current goal bearing, when defined
  };

  std::vector<AudioCue> update(const Inputs& in);

 private:
  bool ready(CueKind k, double now) const;
  void mark(CueKind k, double now);

  FeedbackConfig config_;
  bool was_near_shelf_ = false;
  bool was_stuck_ = false;
  bool goal_announced_ = false;
  std::optional<double> last_[4];
  std::optional<double> last_direction_;
};

struct FeedbackFrame {
  HapticCommand haptic;
  std::vector<AudioCue> cues;
  std::vector<Vec2> path_polyline;
  std::optional<NearestObstacle> nearest;
  Zone nearest_zone = Zone::none;
};

}  // namespace navvi
