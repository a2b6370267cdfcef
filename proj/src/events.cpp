#include "navvi/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "navvi/error.hpp"

namespace navvi {

namespace {

constexpr std::string_view kEventNames[] = {
    "proximity_obstacle", "proximity_shelf", "collision_obstacle", "collision_shelf",
    "goal_reached",       "replan",          "cue_emitted"};

constexpr std::string_view kStatusNames[] = {"running", "goal_reached", "stuck", "timeout"};

ContactCategory category_of(const StaticObstacle& s) {
  return s.category == StaticCategory::shelf ? ContactCategory::shelf : ContactCategory::obstacle;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

double parse_number(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(std::string("bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

std::string_view to_string(EventKind k) { return kEventNames[static_cast<int>(k)]; }

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (int i = 0; i < 7; ++i)
    if (kEventNames[i] == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string_view to_string(ContactCategory c) {
  return c == ContactCategory::shelf ? "shelf" : "obstacle";
}

std::string_view to_string(SessionStatus s) { return kStatusNames[static_cast<int>(s)]; }

std::optional<SessionStatus> session_status_from_string(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (kStatusNames[i] == s) return static_cast<SessionStatus>(i);
  return std::nullopt;
}

std::vector<Contact> detect_contacts(Vec2 robot, double robot_radius, const SceneDescription& scene,
                                     std::span<const AgentDisc> agents, double slack) {
  std::vector<Contact> out;
  for (const StaticObstacle& s : scene.statics) {
    if (point_polygon_distance(s.footprint, robot) < robot_radius + slack) out.push_back({s.id, category_of(s)});
  }
  for (const AgentDisc& a : agents) {
    if (distance(a.center, robot) < robot_radius + a.radius + slack) {
      out.push_back({a.id, ContactCategory::obstacle});
    }
  }
  return out;
}

std::vector<ProximityHit> detect_proximity(Vec2 robot, double robot_radius,
                                           const SceneDescription& scene,
                                           std::span<const AgentDisc> agents, double radius) {
  if (!(radius > 0.0)) throw ContractError("proximity radius must be positive");
  std::vector<ProximityHit> out;
  for (const StaticObstacle& s : scene.statics) {
    const double d = std::max(0.0, point_polygon_distance(s.footprint, robot) - robot_radius);
    if (d < radius) out.push_back({s.id, d, category_of(s)});
  }
  for (const AgentDisc& a : agents) {
    const double d = std::max(0.0, distance(a.center, robot) - a.radius - robot_radius);
    if (d < radius) out.push_back({a.id, d, ContactCategory::obstacle});
  }
  std::sort(out.begin(), out.end(), [](const ProximityHit& a, const ProximityHit& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  return out;
}

bool check_goal(Vec2 robot, const GoalSpec& goal) {
  return distance(robot, goal.position) < goal.threshold;
}

std::string format_fixed3(double v) {
  double r = std::round(v * 1000.0) / 1000.0;
  if (r == 0.0) r = 0.0;  // no "-0.000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", r);
  return buf;
}

void SessionLog::record(InteractionEvent event) {
  if (!events_.empty() && event.t < events_.back().t) {
    throw ContractError("event timestamps must be non-decreasing");
  }
  if (event.kind == EventKind::collision_shelf) ++shelf_collisions_;
  if (event.kind == EventKind::collision_obstacle) ++obstacle_collisions_;
  events_.push_back(std::move(event));
}

void SessionLog::observe_contacts(double t, Vec2 robot, std::span<const Contact> contacts) {
  std::set<std::string> now;
  for (const Contact& c : contacts) {
    now.insert(c.id);
    if (in_contact_.count(c.id)) continue;
    record({c.category == ContactCategory::shelf ? EventKind::collision_shelf
                                                 : EventKind::collision_obstacle,
            t, robot, {{"id", c.id}}});
  }
  in_contact_ = std::move(now);
}

void SessionLog::mark_goal(double t, Vec2 robot) {
  if (goal_time_) return;
  goal_time_ = t;
  record({EventKind::goal_reached, t, robot, {}});
}

void SessionLog::close(double t, Vec2 robot, SessionStatus status) {
  end_time_ = t;
  end_pos_ = robot;
  status_ = status;
}

std::optional<double> SessionLog::elapsed() const {
  if (!goal_time_) return std::nullopt;
  return *goal_time_ - start_time_;
}

std::string format_detail(const Detail& detail) {
  std::string out;
  for (const auto& [k, v] : detail) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

Detail parse_detail(std::string_view text) {
  Detail out;
  while (!text.empty()) {
    const std::size_t semi = text.find(';');
    const std::string_view item = text.substr(0, semi);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw Error("detail item without '=': " + std::string(item));
    out.emplace_back(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  return out;
}

std::string SessionLog::finalize() const {
  std::string out(kCsvHeader);
  out += "\r\n";
  int shelf = 0, obstacle = 0;
  auto row = [&](std::string_view kind, double t, Vec2 p, const std::string& detail) {
    out += format_fixed3(t);
    out += ',';
    out += kind;
    out += ',';
    out += format_fixed3(p.x);
    out += ',';
    out += format_fixed3(p.z);
    out += ',';
    out += csv_field(detail);
    out += ',';
    out += std::to_string(shelf);
    out += ',';
    out += std::to_string(obstacle);
    out += "\r\n";
  };
  for (const InteractionEvent& e : events_) {
    if (e.kind == EventKind::collision_shelf) ++shelf;
    if (e.kind == EventKind::collision_obstacle) ++obstacle;
    row(to_string(e.kind), e.t, e.robot_pos, format_detail(e.detail));
  }
  const auto el = elapsed();
  row("summary", end_time_, end_pos_,
      "elapsed_s=" + (el ? format_fixed3(*el) : std::string()) + ";status=" + std::string(to_string(status_)));
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t i = 0;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
    } else {
      field += c;
      any = true;
    }
    ++i;
  }
  if (quoted) throw Error("unterminated quoted CSV field");
  if (any || !field.empty() || !row.empty()) end_row();
  return rows;
}

SessionLog parse_session_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error("empty CSV");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kCsvHeader) throw Error("unexpected CSV header");
  SessionLog log;
  bool closed = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 7) throw Error("CSV row " + std::to_string(r) + " has " + std::to_string(f.size()) + " fields");
    if (closed) throw Error("rows after the summary row");
    const double t = parse_number(f[0], "time");
    const Vec2 p{parse_number(f[2], "x"), parse_number(f[3], "z")};
    const Detail detail = parse_detail(f[4]);
    if (f[1] == "summary") {
      std::optional<double> el;
      SessionStatus status = SessionStatus::running;
      for (const auto& [k, v] : detail) {
        if (k == "elapsed_s" && !v.empty()) el = parse_number(v, "elapsed");
        if (k == "status") {
          const auto s = session_status_from_string(v);
          if (!s) throw Error("unknown status '" + v + "'");
          status = *s;
        }
      }
      if (el && !log.goal_time_) log.goal_time_ = *el;
      log.close(t, p, status);
      closed = true;
      continue;
    }
    const auto kind = event_kind_from_string(f[1]);
    if (!kind) throw Error("unknown event kind '" + f[1] + "'");
    if (*kind == EventKind::goal_reached) log.goal_time_ = t;
    log.record({*kind, t, p, detail});
    if (std::to_string(log.shelf_collisions_) != f[5] || std::to_string(log.obstacle_collisions_) != f[6]) {
      throw Error("cumulative counters disagree on row " + std::to_string(r));
    }
  }
  if (!closed) throw Error("missing summary row");
  return log;
}

}  // namespace navvi
