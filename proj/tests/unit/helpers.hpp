#pragma once

#include <string>
#include <vector>

#include "navvi/world_model.hpp"

namespace navvi::testing {

inline std::vector<Vec2> rect(double x0, double z0, double x1, double z1) {
  return {{x0, z0}, {x1, z0}, {x1, z1}, {x0, z1}};
}

inline StaticObstacle make_static(std::string id, StaticCategory c, std::vector<Vec2> fp,
                                  double height = 2.0) {
  StaticObstacle s;
  s.id = std::move(id);
  s.category = c;
  s.footprint = std::move(fp);
  s.height = height;
  return s;
}

inline SceneDescription empty_scene(double w, double d) {
  SceneDescription s;
  s.name = "test";
  s.floor = {{0.0, 0.0}, {w, d}};
  s.robot.spawn = {{1.0, 1.0}, 0.0};
  s.goal.position = {w - 1.0, d - 1.0};
  return s;
}

}  // namespace navvi::testing
