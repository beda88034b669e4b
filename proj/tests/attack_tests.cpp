#include <doctest.h>

#include <cmath>

#include "rangemon/attack.hpp"
#include "rangemon/block_vec.hpp"
#include "rangemon/errors.hpp"

using namespace rangemon;

namespace {

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

AttackPhase make_phase(int start, int end, std::vector<int> targets, double magnitude = 1.0) {
  AttackPhase p;
  p.start_step = start;
  p.end_step = end;
  p.targets = std::move(targets);
  for (std::size_t t = 0; t < p.targets.size(); ++t) p.offsets.push_back(vec2(magnitude, 0.0));
  return p;
}

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("no active faults before any phase") {
  AttackSchedule sched({make_phase(10, 20, {1, 3})}, 6);
  auto layout = BlockLayout::uniform(6, 2);
  ActiveFaults f = sched.active_faults(9, layout, 2);
  CHECK(f.targets.empty());
  CHECK(f.f.data().norm() == 0.0);
}

TEST_CASE("two disjoint waves switch the active set") {
  AttackSchedule sched({make_phase(10, 60, {2, 9, 16}), make_phase(60, 120, {5, 12, 19})}, 20);
  auto layout = BlockLayout::uniform(20, 2);
  CHECK(sched.active_faults(30, layout, 2).targets == std::set<int>{2, 9, 16});
  CHECK(sched.active_faults(80, layout, 2).targets == std::set<int>{5, 12, 19});
  // Right-continuous boundaries: start inclusive, end exclusive.
  CHECK(sched.active_faults(10, layout, 2).targets == std::set<int>{2, 9, 16});
  CHECK(sched.active_faults(59, layout, 2).targets == std::set<int>{2, 9, 16});
  CHECK(sched.active_faults(60, layout, 2).targets == std::set<int>{5, 12, 19});
  CHECK(sched.active_faults(120, layout, 2).targets.empty());
}

TEST_CASE("six of twenty robots stay active through their window") {
  AttackSchedule sched({make_phase(10, 120, {0, 3, 7, 11, 15, 19})}, 20);
  auto layout = BlockLayout::uniform(20, 2);
  for (int k : {10, 50, 119}) {
    ActiveFaults f = sched.active_faults(k, layout, 2);
    REQUIRE(f.targets.size() == 6);
    // Injected sparsity equals the target count when offsets are nonzero.
    int nonzero = 0;
    for (int i = 0; i < 20; ++i)
      if (f.f.block(i).norm() > 0.0) ++nonzero;
    REQUIRE(nonzero == 6);
  }
}

TEST_CASE("offsets land on the position components of the right blocks") {
  AttackPhase p = make_phase(0, 5, {1});
  p.offsets[0] = vec2(3.0, 4.0);
  AttackSchedule sched({p}, 3);
  auto layout = BlockLayout::uniform(3, 4);  // state wider than position
  ActiveFaults f = sched.active_faults(0, layout, 2);
  CHECK(f.f.block(1)[0] == 3.0);
  CHECK(f.f.block(1)[1] == 4.0);
  CHECK(f.f.block(1).tail(2).norm() == 0.0);
  CHECK(f.f.block(0).norm() == 0.0);
  CHECK(f.f.block(2).norm() == 0.0);
}

TEST_CASE("time-overlapping phases must agree on shared robots") {
  // Robot 2 appears in both windows with different offsets: rejected.
  CHECK_THROWS_AS(
      AttackSchedule({make_phase(0, 10, {1, 2}, 1.0), make_phase(5, 15, {2, 3}, 2.0)}, 6),
      ConfigError);
  // Same offset for the shared robot: accepted, targets union during overlap.
  AttackSchedule agreeing({make_phase(0, 10, {1, 2}, 1.0), make_phase(5, 15, {2, 3}, 1.0)}, 6);
  auto layout = BlockLayout::uniform(6, 2);
  CHECK(agreeing.active_faults(7, layout, 2).targets == std::set<int>{1, 2, 3});
  // Disjoint targets may overlap freely.
  AttackSchedule ok({make_phase(0, 10, {1}), make_phase(5, 15, {3})}, 6);
  CHECK(ok.active_faults(7, layout, 2).targets == std::set<int>{1, 3});
}

TEST_CASE("phase validation") {
  CHECK_THROWS_AS(AttackSchedule({make_phase(10, 10, {1})}, 6), ConfigError);  // empty window
  CHECK_THROWS_AS(AttackSchedule({make_phase(0, 10, {})}, 6), ConfigError);    // no targets
  CHECK_THROWS_AS(AttackSchedule({make_phase(0, 10, {7})}, 6), ConfigError);   // bad robot id
  AttackPhase bad = make_phase(0, 10, {1, 2});
  bad.offsets.pop_back();
  CHECK_THROWS_AS(AttackSchedule({bad}, 6), ConfigError);  // offsets/targets mismatch
}

TEST_CASE("targeting half the swarm only warns") {
  AttackSchedule sched({make_phase(0, 10, {0, 1, 2})}, 6);
  REQUIRE(sched.warnings().size() == 1);
  CHECK(sched.warnings()[0].find("3") != std::string::npos);
  AttackSchedule quiet({make_phase(0, 10, {0, 1})}, 6);
  CHECK(quiet.warnings().empty());
}

TEST_CASE("first targets and first injection norm") {
  AttackSchedule sched({make_phase(10, 60, {2, 9, 16}), make_phase(60, 120, {5, 12, 19}, 3.0)}, 20);
  CHECK(sched.first_targets() == std::set<int>{2, 9, 16});
  CHECK(sched.first_injection_norm() == doctest::Approx(std::sqrt(3.0)));
  AttackSchedule none;
  CHECK(none.first_targets().empty());
  CHECK(none.first_injection_norm() == 0.0);
}

TEST_CASE("schedule JSON round-trip") {
  AttackSchedule sched({make_phase(10, 60, {2, 9}), make_phase(60, 120, {5})}, 20);
  AttackSchedule back = AttackSchedule::from_json(sched.to_json(), 20);
  REQUIRE(back.phases().size() == 2);
  CHECK(back.phases()[0].start_step == 10);
  CHECK(back.phases()[0].targets == std::vector<int>{2, 9});
  CHECK(back.phases()[1].offsets[0] == sched.phases()[1].offsets[0]);
}

}  // TEST_SUITE
