#include <doctest.h>

#include <nlohmann/json.hpp>

#include "rangemon/errors.hpp"
#include "rangemon/monitor.hpp"
#include "test_support.hpp"

using namespace rangemon;

TEST_SUITE("monitor") {

TEST_CASE("robot integrity is the Euclidean block norm") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(robot_integrity(zero) == 0.0);
  Eigen::VectorXd v(3);
  v << 3.0, 4.0, 0.0;
  CHECK(robot_integrity(v) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("clean reconstruction raises nothing") {
  auto layout = BlockLayout::uniform(4, 3);
  BlockVec x(layout);
  IntegrityReport r = evaluate(x, 0.2, 7);
  CHECK(r.step == 7);
  CHECK(r.chi == 0.0);
  CHECK(r.detected.empty());
  CHECK_FALSE(r.swarm_alarm);
  CHECK(r.chi_i.size() == 4);
}

TEST_CASE("one hot block trips both the robot and the swarm") {
  auto layout = BlockLayout::uniform(4, 3);
  BlockVec x(layout);
  x.block(2) << 1.0, 0.0, 0.0;
  IntegrityReport r = evaluate(x, 0.2);
  CHECK(r.detected == std::set<int>{2});
  CHECK(r.swarm_alarm);
  CHECK(r.chi == doctest::Approx(1.0));
  CHECK(r.chi_i[2] == doctest::Approx(1.0));
  CHECK(r.chi_i[0] == 0.0);
}

TEST_CASE("detection is strictly above the threshold") {
  auto layout = BlockLayout::uniform(2, 2);
  BlockVec x(layout);
  x.block(0) << 0.2, 0.0;
  CHECK(evaluate(x, 0.2).detected.empty());        // equal: no detection
  CHECK_FALSE(evaluate(x, 0.2).swarm_alarm);
  CHECK(evaluate(x, 0.2 - 1e-12).detected == std::set<int>{0});
  CHECK(evaluate(x, 0.2 - 1e-12).swarm_alarm);
}

TEST_CASE("threshold must be positive") {
  auto layout = BlockLayout::uniform(2, 2);
  BlockVec x(layout);
  CHECK_THROWS_AS(evaluate(x, 0.0), ConfigError);
  CHECK_THROWS_AS(evaluate(x, -1.0), ConfigError);
}

TEST_CASE("swarm integrity adds the per-robot values") {
  RngStream rng(11);
  auto layout = BlockLayout::make({2, 3, 1, 4});
  for (int trial = 0; trial < 50; ++trial) {
    BlockVec x = testsupport::random_block_vec(layout, rng, 2.0);
    IntegrityReport r = evaluate(x, 0.5);
    double sum = 0.0;
    for (double c : r.chi_i) sum += c;
    CHECK(r.chi == doctest::Approx(sum).epsilon(1e-15));
    CHECK(r.chi == doctest::Approx(norm_2q(x, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("growing a block never shrinks integrity") {
  auto layout = BlockLayout::uniform(3, 2);
  BlockVec x(layout);
  x.block(1) << 0.3, 0.4;
  const double chi_before = evaluate(x, 1.0).chi;
  x.block(1) *= 2.0;
  CHECK(evaluate(x, 1.0).chi > chi_before);
}

TEST_CASE("confirmation needs K consecutive exceedances") {
  auto layout = BlockLayout::uniform(2, 2);
  DetectionConfirmer confirmer(2, 3);
  BlockVec hot(layout);
  hot.block(1) << 5.0, 0.0;
  BlockVec cold(layout);

  CHECK(confirmer.update(evaluate(hot, 1.0)).empty());   // streak 1
  CHECK(confirmer.update(evaluate(hot, 1.0)).empty());   // streak 2
  CHECK(confirmer.update(evaluate(hot, 1.0)) == std::set<int>{1});  // confirmed
  CHECK(confirmer.update(evaluate(hot, 1.0)) == std::set<int>{1});  // stays
  CHECK(confirmer.update(evaluate(cold, 1.0)).empty());  // drops immediately
  CHECK(confirmer.update(evaluate(hot, 1.0)).empty());   // streak restarts
  confirmer.reset();
  CHECK(confirmer.confirmed().empty());
}

TEST_CASE("confirmation window of one mirrors the raw detections") {
  auto layout = BlockLayout::uniform(2, 2);
  DetectionConfirmer confirmer(2, 1);
  BlockVec hot(layout);
  hot.block(0) << 5.0, 0.0;
  CHECK(confirmer.update(evaluate(hot, 1.0)) == std::set<int>{0});
  CHECK_THROWS_AS(DetectionConfirmer(2, 0), ConfigError);
  CHECK_THROWS_AS(DetectionConfirmer(0, 3), ConfigError);
}

TEST_CASE("report serializes to a json line") {
  auto layout = BlockLayout::uniform(2, 2);
  BlockVec x(layout);
  x.block(0) << 3.0, 4.0;
  IntegrityReport r = evaluate(x, 1.0, 12);
  auto j = nlohmann::json::parse(r.to_json_line());
  CHECK(j["step"] == 12);
  CHECK(j["chi"].get<double>() == doctest::Approx(5.0));
  CHECK(j["detected"].size() == 1);
  CHECK(j["detected"][0] == 0);
  CHECK(j["swarm_alarm"] == true);
}

}  // TEST_SUITE
