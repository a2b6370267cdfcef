#include "navvi/sim_loop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "navvi/error.hpp"

namespace navvi {

namespace {

constexpr double kContactSlack = 1e-6;

double clamp_axis(double v) {
  if (!std::isfinite(v)) return 0.0;
  return std::clamp(v, -1.0, 1.0);
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

/// Largest s in [0, 1] with clearance(p0 + s (p1 - p0)) >= floor, given that
/// s = 0 satisfies it.
template <typename Clearance>
double max_travel(Vec2 p0, Vec2 p1, double floor, Clearance&& clearance) {
  if (clearance(p1) >= floor) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (clearance(p0 + (p1 - p0) * mid) >= floor) lo = mid;
    else hi = mid;
  }
  return lo;
}

std::string fixed3(double v) { return format_fixed3(v); }

}  // namespace

MotionResult apply_control(const RobotState& robot, const ControlInput& input, double dt,
                           double v_max, double yaw_rate_max, double robot_radius,
                           const SceneDescription& scene, std::span<const AgentDisc> agents) {
  const double ax = clamp_axis(input.axis_x);
  const double ay = clamp_axis(input.axis_y);
  MotionResult out;
  out.robot.pose.heading = wrap_angle(robot.pose.heading + ax * yaw_rate_max * dt);
  const double speed = ay * v_max;
  const Vec2 p0 = robot.pose.position;
  Vec2 p1 = p0 + forward_axis(out.robot.pose.heading) * (speed * dt);
  const Aabb& f = scene.floor;
  p1.x = std::clamp(p1.x, std::min(f.min.x + robot_radius, f.max.x - robot_radius),
                    std::max(f.min.x + robot_radius, f.max.x - robot_radius));
  p1.z = std::clamp(p1.z, std::min(f.min.z + robot_radius, f.max.z - robot_radius),
                    std::max(f.min.z + robot_radius, f.max.z - robot_radius));

  double travel = 1.0;
  std::vector<std::pair<double, Contact>> limits;
  if (!(p1 == p0)) {
    for (const StaticObstacle& s : scene.statics) {
      auto clearance = [&](Vec2 p) { return point_polygon_distance(s.footprint, p); };
      // Never end closer than the start when already overlapping.
      const double floor = std::min(clearance(p0), robot_radius);
      const double t = max_travel(p0, p1, floor, clearance);
      if (t < 1.0) {
        limits.push_back({t, {s.id, s.category == StaticCategory::shelf ? ContactCategory::shelf
                                                                        : ContactCategory::obstacle}});
      }
      travel = std::min(travel, t);
    }
    for (const AgentDisc& a : agents) {
      auto clearance = [&](Vec2 p) { return distance(a.center, p) - a.radius; };
      const double floor = std::min(clearance(p0), robot_radius);
      const double t = max_travel(p0, p1, floor, clearance);
      if (t < 1.0) limits.push_back({t, {a.id, ContactCategory::obstacle}});
      travel = std::min(travel, t);
    }
  }
  for (const auto& [t, c] : limits) {
    if (t <= travel + 1e-12) out.blockers.push_back(c);
  }
  out.robot.pose.position = p0 + (p1 - p0) * travel;
  out.robot.speed = travel < 1.0 ? speed * travel : speed;
  return out;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(SceneDescription scene, TickConfig config)
    : scene_(std::move(scene)),
      config_(config),
      runtime_(scene_, config_.build),
      monitor_(config_.planner),
      cues_(config_.feedback) {
  if (!(config_.dt > 0.0)) throw ContractError("dt must be positive");
  robot_.pose = scene_.robot.spawn;
  for (const DynamicAgent& a : scene_.agents) agents_.push_back({a.id, {}, a.radius});
  agent_states_.resize(agents_.size());
  move_agents();
}

double Simulation::v_max() const { return config_.v_max.value_or(scene_.robot.v_max); }
double Simulation::yaw_rate_max() const {
  return config_.yaw_rate_max.value_or(scene_.robot.yaw_rate_max);
}

void Simulation::set_goal(Vec2 position) {
  if (status_ == SessionStatus::goal_reached || status_ == SessionStatus::timeout) {
    throw ContractError("session is over");
  }
  scene_.goal.position = position;
  path_.reset();
  next_retry_ = 0.0;
}

void Simulation::move_agents() {
  const double now = clock();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agent_states_[i] = agent_pose_at(scene_.agents[i], now);
    agents_[i].center = agent_states_[i].position;
    runtime_.apply_carve({agents_[i].center, agents_[i].radius, agents_[i].id});
  }
}

bool Simulation::try_plan(std::string_view reason) {
  const double now = clock();
  try {
    auto [p, stats] = plan(runtime_, robot_.pose.position, scene_.goal, config_.planner);
    path_ = std::move(p);
    ++path_version_;
    last_stats_ = stats;
    monitor_.planned(now, runtime_.generation());
    last_success_ = now;
    ever_planned_ = true;
    if (status_ == SessionStatus::stuck) status_ = SessionStatus::running;
    log_.record({EventKind::replan, now, robot_.pose.position,
                 {{"reason", std::string(reason)},
                  {"result", "ok"},
                  {"waypoints", std::to_string(path_->waypoints.size())},
                  {"length_m", fixed3(path_->total_cost)},
                  {"nodes_expanded", std::to_string(stats.nodes_expanded)}}});
    if (reason != "periodic") replanned_ = true;
    return true;
  } catch (const UnreachableError& e) {
    log_.record({EventKind::replan, now, robot_.pose.position,
                 {{"reason", std::string(reason)}, {"result", "failed"}, {"error", e.what()}}});
    next_retry_ = now + config_.planner.failed_retry_interval;
    ever_planned_ = true;
    const bool keep = path_ && now - last_success_ <= config_.planner.replan_period + 1e-9;
    if (!keep) {
      path_.reset();
      status_ = SessionStatus::stuck;
    }
    return false;
  }
}

void Simulation::replan_if_needed() {
  const double now = clock();
  if (std::abs(robot_.speed) >= config_.planner.stuck_speed) idle_stuck_ = false;
  std::vector<DynamicObstacle> obstacles;
  for (const AgentDisc& a : agents_) obstacles.push_back({a.id, a.center, a.radius});
  const ReplanReason r = monitor_.check(robot_.pose, robot_.speed, scene_.robot.radius, runtime_,
                                        path_ ? &*path_ : nullptr, obstacles, now);
  if (r == ReplanReason::stuck) idle_stuck_ = true;
  const bool may_try = now >= next_retry_ - 1e-9;
  if (!may_try) return;
  if (!path_) {
    try_plan(ever_planned_ ? "retry" : "initial");
  } else if (r != ReplanReason::none) {
    try_plan(to_string(r));
  }
}

std::vector<ProximityTarget> Simulation::haptic_targets() const {
  std::vector<ProximityTarget> out;
  for (const StaticObstacle& s : scene_.statics) {
    if (s.category == StaticCategory::box || s.category == StaticCategory::pedestal) {
      out.push_back({s.id, polygon_centroid(s.footprint), 0.0, s.footprint});
    }
  }
  for (const AgentDisc& a : agents_) out.push_back({a.id, a.center, a.radius, {}});
  return out;
}

void Simulation::run_events(const MotionResult& motion) {
  const double now = clock();
  const Vec2 pos = robot_.pose.position;
  const double radius = scene_.robot.radius;

  std::vector<Contact> contacts = detect_contacts(pos, radius, scene_, agents_, kContactSlack);
  for (const Contact& b : motion.blockers) {
    const bool dup = std::any_of(contacts.begin(), contacts.end(),
                                 [&](const Contact& c) { return c.id == b.id; });
    if (!dup) contacts.push_back(b);
  }
  log_.observe_contacts(now, pos, contacts);

  // Proximity entries: haptic obstacles inside the detection perimeter and
  // shelves inside the audio radius, each once per entry.
  const double reach = std::max(config_.feedback.d_max, config_.feedback.shelf_audio_radius);
  std::set<std::string> obstacles_now, shelves_now;
  for (const ProximityHit& h : detect_proximity(pos, radius, scene_, agents_, reach)) {
    const StaticObstacle* s = scene_.find_static(h.id);
    if (s && s->category == StaticCategory::shelf) {
      if (h.distance >= config_.feedback.shelf_audio_radius) continue;
      shelves_now.insert(h.id);
      if (!near_shelves_.count(h.id)) {
        log_.record({EventKind::proximity_shelf, now, pos,
                     {{"id", h.id}, {"distance_m", fixed3(h.distance)}}});
      }
      continue;
    }
    if (s && s->category == StaticCategory::wall) continue;
    if (h.distance >= config_.feedback.d_max) continue;
    obstacles_now.insert(h.id);
    if (!near_obstacles_.count(h.id)) {
      Vec2 center = s ? polygon_centroid(s->footprint) : Vec2{};
      for (const AgentDisc& a : agents_) {
        if (a.id == h.id) center = a.center;
      }
      const Zone zone = classify_zone(to_local_point(robot_.pose, center).x, config_.feedback);
      log_.record({EventKind::proximity_obstacle, now, pos,
                   {{"id", h.id},
                    {"distance_m", fixed3(h.distance)},
                    {"zone", std::string(to_string(zone))},
                    {"intensity", fixed3(intensity(h.distance, config_.feedback))}}});
    }
  }
  near_obstacles_ = std::move(obstacles_now);
  near_shelves_ = std::move(shelves_now);

  if (check_goal(pos, scene_.goal)) {
    log_.mark_goal(now, pos);
    status_ = SessionStatus::goal_reached;
    path_.reset();
  }
}

const FeedbackFrame& Simulation::tick(const ControlInput& input) {
  if (status_ == SessionStatus::goal_reached || status_ == SessionStatus::timeout) {
    throw ContractError("tick after the session ended");
  }
  ++ticks_;
  const double now = clock();
  frame_ = FeedbackFrame{};
  replanned_ = false;

  move_agents();
  runtime_.rebuild_if_due(now);
  replan_if_needed();

  const MotionResult motion = apply_control(robot_, input, config_.dt, v_max(), yaw_rate_max(),
                                            scene_.robot.radius, scene_, agents_);
  robot_ = motion.robot;

  if (path_) advance_waypoint(*path_, robot_.pose.position, config_.planner);

  const auto targets = haptic_targets();
  frame_.haptic = haptic_command(robot_.pose, scene_.robot.radius, targets, config_.feedback);
  frame_.nearest = nearest_obstacle(robot_.pose, scene_.robot.radius, targets, config_.feedback);
  if (frame_.nearest) frame_.nearest_zone = classify_zone(frame_.nearest->local.x, config_.feedback);

  run_events(motion);

  CueScheduler::Inputs in;
  in.now = now;
  in.near_shelf = !near_shelves_.empty();
  in.stuck = idle_stuck_ || status_ == SessionStatus::stuck;
  in.goal_reached = status_ == SessionStatus::goal_reached;
  in.navigating = path_.has_value() && !in.goal_reached;
  in.replanned = replanned_;
  if (distance(robot_.pose.position, scene_.goal.position) > 0.0) {
    in.hour = clock_direction(robot_.pose, scene_.goal.position);
  }
  frame_.cues = cues_.update(in);
  for (const AudioCue& c : frame_.cues) {
    Detail d{{"cue", std::string(to_string(c.kind))}};
    if (c.kind == CueKind::direction) d.emplace_back("hour", std::to_string(c.hour));
    d.emplace_back("text", c.text());
    log_.record({EventKind::cue_emitted, now, robot_.pose.position, std::move(d)});
  }

  if (path_) {
    frame_.path_polyline.push_back(robot_.pose.position);
    for (std::size_t i = path_->current_index; i < path_->waypoints.size(); ++i) {
      frame_.path_polyline.push_back(path_->waypoints[i]);
    }
  }
  return frame_;
}

void Simulation::close(std::optional<SessionStatus> status) {
  if (status) status_ = *status;
  log_.close(clock(), robot_.pose.position, status_);
}

// ---------------------------------------------------------------------------

ControlInput Autopilot::steer(const Simulation& sim) {
  ControlInput out;
  out.t = sim.clock();
  if (!sim.path() || sim.path()->waypoints.size() < 2) return out;
  const Path& path = *sim.path();
  if (sim.path_version() != version_) {
    version_ = sim.path_version();
    segment_ = 0;
  }
  const auto& pts = path.waypoints;
  const Pose& pose = sim.robot().pose;
  const Vec2 p = pose.position;

  auto param = [&](std::size_t k) {
    const Vec2 d = pts[k + 1] - pts[k];
    const double len2 = dot(d, d);
    return len2 > 0.0 ? dot(p - pts[k], d) / len2 : 1.0;
  };
  while (segment_ + 2 < pts.size() &&
         (param(segment_) >= 1.0 ||
          point_segment_distance(pts[segment_ + 1], pts[segment_ + 2], p) <
              point_segment_distance(pts[segment_], pts[segment_ + 1], p))) {
    ++segment_;
  }

  // Walk the lookahead distance along the polyline from the projection.
  const double u = std::clamp(param(segment_), 0.0, 1.0);
  Vec2 at = pts[segment_] + (pts[segment_ + 1] - pts[segment_]) * u;
  double left = kLookahead;
  std::size_t k = segment_;
  Vec2 target = pts.back();
  for (;;) {
    const double seg = distance(at, pts[k + 1]);
    if (seg >= left) {
      target = at + (pts[k + 1] - at) * (left / seg);
      break;
    }
    left -= seg;
    at = pts[k + 1];
    if (++k + 1 >= pts.size()) {
      target = pts.back();
      break;
    }
  }

  const Vec2 d = target - p;
  if (length(d) < 1e-9) return out;
  const double error = wrap_angle(std::atan2(d.x, d.z) - pose.heading);
  if (std::abs(error) > kTurnInPlace) {
    out.axis_x = error > 0 ? 1.0 : -1.0;
    return out;
  }
  out.axis_x = std::clamp(2.0 * error, -1.0, 1.0);
  out.axis_y = 1.0;

  // Yield to agents directly ahead.
  const double radius = sim.scene().robot.radius;
  for (const AgentDisc& a : sim.agents()) {
    const Vec2 local = to_local_point(pose, a.center);
    if (local.z > 0.0 && std::abs(local.x) < a.radius + radius + 0.1 &&
        local.z - a.radius - radius < 0.3) {
      out.axis_y = 0.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ControlInput ControlScript::sample(double t) const {
  ControlInput out;
  out.t = t;
  for (const ControlInput& in : inputs) {
    if (in.t > t + 1e-9) break;
    out.axis_x = in.axis_x;
    out.axis_y = in.axis_y;
  }
  return out;
}

double ControlScript::end_time() const {
  if (duration) return *duration;
  return inputs.empty() ? 0.0 : inputs.back().t;
}

ControlScript load_control_script(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("control script is not valid JSON: ") + e.what());
  }
  auto fail = [](const std::string& field, const std::string& msg) {
    throw Error("control script field '" + field + "': " + msg);
  };
  if (!doc.is_object()) fail("$", "expected an object");
  if (!doc.contains("format") || doc["format"] != std::string(kScriptFormatVersion)) {
    fail("$.format", "expected \"" + std::string(kScriptFormatVersion) + "\"");
  }
  ControlScript script;
  if (doc.contains("autopilot")) {
    if (!doc["autopilot"].is_boolean()) fail("$.autopilot", "expected a boolean");
    script.autopilot = doc["autopilot"].get<bool>();
  }
  if (doc.contains("duration_s")) {
    if (!doc["duration_s"].is_number() || doc["duration_s"].get<double>() < 0) {
      fail("$.duration_s", "expected a non-negative number");
    }
    script.duration = doc["duration_s"].get<double>();
  }
  if (doc.contains("inputs")) {
    if (!doc["inputs"].is_array()) fail("$.inputs", "expected an array");
    double last = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < doc["inputs"].size(); ++i) {
      const auto& item = doc["inputs"][i];
      const std::string path = "$.inputs[" + std::to_string(i) + "]";
      if (!item.is_object()) fail(path, "expected an object");
      ControlInput c;
      for (const char* key : {"t", "axis_x", "axis_y"}) {
        if (!item.contains(key) || !item[key].is_number()) fail(path + "." + key, "expected a number");
      }
      c.t = item["t"].get<double>();
      c.axis_x = clamp_axis(item["axis_x"].get<double>());
      c.axis_y = clamp_axis(item["axis_y"].get<double>());
      if (c.t < last) fail(path + ".t", "times must be non-decreasing");
      last = c.t;
      script.inputs.push_back(c);
    }
  }
  if (!script.autopilot && script.inputs.empty()) fail("$.inputs", "manual scripts need inputs");
  return script;
}

ControlScript load_control_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open control script '" + path + "'");
  return load_control_script(in);
}

ControlScript autopilot_script() {
  ControlScript s;
  s.autopilot = true;
  return s;
}

HeadlessResult run_headless(const SceneDescription& scene, const ControlScript& script,
                            const TickConfig& config, double time_cap) {
  Simulation sim(scene, config);
  Autopilot pilot;
  const double end = script.autopilot ? std::numeric_limits<double>::infinity() : script.end_time();
  for (;;) {
    const double t = sim.clock();
    if (t >= time_cap - 1e-9) {
      sim.close(SessionStatus::timeout);
      break;
    }
    if (t >= end - 1e-9 && sim.ticks() > 0) {
      sim.close();
      break;
    }
    const ControlInput in = script.autopilot ? pilot.steer(sim) : script.sample(t);
    sim.tick(in);
    if (sim.status() == SessionStatus::goal_reached) {
      sim.close();
      break;
    }
  }
  HeadlessResult out{sim.log(), sim.ticks(), 0};
  for (const InteractionEvent& e : out.log.events()) {
    if (e.kind == EventKind::replan) ++out.replans;
  }
  return out;
}

}  // namespace navvi
