#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "navvi/error.hpp"
#include "navvi/events.hpp"

using namespace navvi;
using navvi::testing::empty_scene;
using navvi::testing::make_static;
using navvi::testing::rect;

namespace {

SceneDescription shelf_scene() {
  auto s = empty_scene(10.0, 10.0);
  s.statics.push_back(make_static("shelf-1", StaticCategory::shelf, rect(4.0, 2.0, 5.0, 8.0)));
  s.statics.push_back(make_static("box-1", StaticCategory::box, rect(8.0, 8.0, 9.0, 9.0)));
  return s;
}

}  // namespace

TEST_CASE("contacts") {
  const auto s = shelf_scene();
  CHECK(detect_contacts({2.0, 5.0}, 0.35, s, {}).empty());
  const auto c = detect_contacts({3.7, 5.0}, 0.35, s, {});
  REQUIRE(c.size() == 1);
  CHECK(c[0].id == "shelf-1");
  CHECK(c[0].category == ContactCategory::shelf);
  const AgentDisc fork{"fork", {2.0, 5.5}, 1.0};
  const auto a = detect_contacts({2.0, 4.5}, 0.35, s, {&fork, 1});
  REQUIRE(a.size() == 1);
  CHECK(a[0].category == ContactCategory::obstacle);
}

TEST_CASE("proximity lists by distance") {
  const auto s = shelf_scene();
  const AgentDisc worker{"worker", {1.0, 5.0 + 3.2 + 0.65}, 0.3};
  const auto hits = detect_proximity({1.0, 5.0}, 0.35, s, {&worker, 1}, 5.0);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].id == "shelf-1");
  CHECK(hits[0].distance == doctest::Approx(3.0 - 0.35));
  CHECK(hits[1].id == "worker");
  CHECK(hits[1].distance == doctest::Approx(3.2));
  const auto near_shelf = detect_proximity({4.0 - 0.9 - 0.35, 5.0}, 0.35, s, {}, 1.0);
  REQUIRE(near_shelf.size() == 1);
  CHECK(near_shelf[0].distance == doctest::Approx(0.9));
  CHECK(near_shelf[0].category == ContactCategory::shelf);
  CHECK(detect_proximity({1.0, 1.0}, 0.35, empty_scene(10, 10), {}, 5.0).empty());
}

TEST_CASE("goal check is strict") {
  const GoalSpec g{{0.0, 0.0}, 1.0};
  CHECK_FALSE(check_goal({1.2, 0.0}, g));
  CHECK(check_goal({0.9, 0.0}, g));
  CHECK_FALSE(check_goal({1.0, 0.0}, g));
  for (int i = -30; i <= 30; ++i)
    for (int j = -30; j <= 30; ++j) {
      const Vec2 p{i * 0.05, j * 0.05};
      CHECK(check_goal(p, g) == (std::hypot(p.x, p.z) < 1.0));
    }
}

TEST_CASE("collisions are edge triggered") {
  SessionLog log;
  const std::vector<Contact> c{{"shelf-1", ContactCategory::shelf}};
  for (int i = 0; i < 50; ++i) log.observe_contacts(i * 0.02, {0, 0}, c);
  CHECK(log.shelf_collisions() == 1);
  log.observe_contacts(1.0, {0, 0}, {});
  log.observe_contacts(1.02, {0, 0}, c);
  CHECK(log.shelf_collisions() == 2);
  CHECK(log.obstacle_collisions() == 0);
  CHECK_THROWS_AS(log.record({EventKind::replan, 0.5, {}, {}}), ContractError);
}

TEST_CASE("CSV layout and round trip") {
  SessionLog empty;
  empty.close(0.0, {1.0, 1.0}, SessionStatus::timeout);
  CHECK(empty.finalize() ==
        std::string(kCsvHeader) + "\r\n0.000,summary,1.000,1.000,elapsed_s=;status=timeout,0,0\r\n");

  SessionLog log;
  log.record({EventKind::replan, 0.0, {1.0, 2.0}, {{"reason", "initial"}}});
  log.observe_contacts(1.5, {3.25, -0.0001}, std::vector<Contact>{{"a,b \"x\"", ContactCategory::obstacle}});
  log.mark_goal(4.2, {9.0, 9.0});
  log.close(4.2, {9.0, 9.0}, SessionStatus::goal_reached);
  const std::string csv = log.finalize();
  CHECK(csv.find("1.500,collision_obstacle,3.250,0.000,\"id=a,b \"\"x\"\"\",0,1") != std::string::npos);
  CHECK(csv.find("summary,9.000,9.000,elapsed_s=4.200;status=goal_reached,0,1") != std::string::npos);
  const SessionLog back = parse_session_csv(csv);
  CHECK(back.events().size() == 3);
  CHECK(back.events()[1].detail[0].second == "a,b \"x\"");
  CHECK(back.finalize() == csv);
  CHECK_THROWS_AS(parse_session_csv("nope\r\n"), Error);
}
