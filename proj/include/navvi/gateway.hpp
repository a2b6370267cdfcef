#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navvi/error.hpp"
#include "navvi/sim_loop.hpp"

namespace navvi {

inline constexpr std::string_view kWireVersion = "navvi-wire/1";

struct SnapshotAgent {
  std::string id;
  std::string kind;
  Vec2 position;
  Vec2 velocity;
  double radius = 0.0;

  bool operator==(const SnapshotAgent&) const = default;
};

struct SnapshotCue {
  std::string kind;
  int hour = 0;  // direction cues only
  std::string text;
  double t = 0.0;

  bool operator==(const SnapshotCue&) const = default;
};

struct Snapshot {
  std::uint64_t seq = 0;
  double clock = 0.0;
  Vec2 robot_position;
  double robot_heading = 0.0;
  double speed = 0.0;
  std::vector<SnapshotAgent> agents;
  std::vector<Vec2> path_polyline;
  double haptic_left = 0.0;
  double haptic_right = 0.0;
  std::string haptic_zone = "none";
  std::vector<SnapshotCue> cues;  // since the previous snapshot
  int shelf_collisions = 0;
  int obstacle_collisions = 0;
  std::string status = "running";
  Vec2 goal;

  bool operator==(const Snapshot&) const = default;
};

enum class ControlKind { axes, load_scene, start, reset, set_goal };
std::string_view to_string(ControlKind k);

struct ControlMessage {
  ControlKind kind = ControlKind::axes;
  double axis_x = 0.0;
  double axis_y = 0.0;
  std::string scene;  // load_scene
  Vec2 point;         // set_goal

  bool operator==(const ControlMessage&) const = default;
};

/// Machine-readable failure carried in an error reply.
class WireError : public Error {
 public:
  WireError(std::string code, const std::string& message)
      : Error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

std::string encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(std::string_view text);

std::string encode_control(const ControlMessage& m);
/// Throws WireError with code malformed_json, version_mismatch, unknown_type
/// or bad_field. Axes are clamped to [-1, 1].
ControlMessage decode_control(std::string_view text);

std::string encode_error(std::string_view code, std::string_view message);
std::string encode_hello(std::uint64_t client, bool driver);
std::string encode_role(bool driver);
std::string encode_scene(const SceneDescription& scene);

Snapshot make_snapshot(const Simulation& sim, std::uint64_t seq, std::vector<SnapshotCue> cues);

struct GatewayConfig {
  std::string scene_dir = ".";
  double tick_hz = 50.0;
  double snapshot_hz = 20.0;
  std::uint64_t seed = 0;
};

/// Resolves a scene name to `<dir>/<name>.json`; names with path separators
/// or a leading dot are rejected.
std::string resolve_scene_path(const std::string& dir, const std::string& name);

/// The flag value, else NAVVI_SCENE_DIR, else "scenes".
std::string scene_dir_or_default(const std::string& flag);

/// An existing file path as given, otherwise a scene name in `dir`.
SceneDescription load_scene_arg(const std::string& arg, const std::string& dir);

struct Outgoing {
  std::uint64_t client = 0;  // 0 = every client
  std::string text;
};

/// Session logic without I/O. Inbound messages are queued by `receive` and
/// applied by `step`, which also advances the simulation one tick.
class GatewayCore {
 public:
  explicit GatewayCore(GatewayConfig config);

  /// New client; the first one (or the first after the driver leaves) drives.
  std::vector<Outgoing> connect();
  std::vector<Outgoing> disconnect(std::uint64_t client);

  /// Replies immediately with an error for malformed input or for control
  /// from an observer; valid driver messages are queued.
  std::vector<Outgoing> receive(std::uint64_t client, std::string_view text);

  /// Tick boundary: drain the queue, tick when started, emit a snapshot when
  /// the decimation schedule says so.
  std::vector<Outgoing> step();

  std::optional<std::uint64_t> driver() const { return driver_; }
  const Simulation* simulation() const { return sim_.get(); }
  bool started() const { return started_; }
  std::uint64_t snapshots_sent() const { return seq_; }
  const GatewayConfig& config() const { return config_; }

 private:
  void apply(std::uint64_t client, const ControlMessage& m, std::vector<Outgoing>& out);
  TickConfig tick_config() const;

  GatewayConfig config_;
  std::uint64_t next_client_ = 1;
  std::vector<std::uint64_t> clients_;  // connection order
  std::optional<std::uint64_t> driver_;
  std::deque<std::pair<std::uint64_t, ControlMessage>> queue_;

  std::optional<SceneDescription> scene_;
  std::unique_ptr<Simulation> sim_;
  bool started_ = false;
  ControlInput axes_;
  double phase_ = 1.0;  // snapshot due at >= 1
  std::uint64_t seq_ = 0;
  std::vector<SnapshotCue> pending_cues_;
};

}  // namespace navvi
