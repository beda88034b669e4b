#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "rangemon/block_vec.hpp"

namespace rangemon {

// Per-step integrity snapshot of the swarm.
struct IntegrityReport {
  int step = 0;
  std::vector<double> chi_i;  // per-robot integrity, Euclidean block norms
  double chi = 0.0;           // swarm integrity, sum of the above
  std::set<int> detected;     // robots with chi_i > epsilon (strict)
  bool swarm_alarm = false;   // chi > epsilon (strict)

  std::string to_json_line() const;
};

// ||block||_2 of one robot's reconstructed error.
double robot_integrity(const Eigen::Ref<const Eigen::VectorXd>& block);

// Thresholds every block of the reconstruction x_hat + x_bar.
IntegrityReport evaluate(const BlockVec& reconstruction, double epsilon, int step = 0);

// Optional K-consecutive-steps debouncing: a robot is confirmed once its
// integrity has exceeded epsilon on K successive evaluations, and drops out
// as soon as one evaluation falls below.
class DetectionConfirmer {
 public:
  DetectionConfirmer(int num_robots, int confirm_steps);

  // Feed one report; returns the confirmed set after this step.
  const std::set<int>& update(const IntegrityReport& report);
  const std::set<int>& confirmed() const { return confirmed_; }
  void reset();

 private:
  int confirm_steps_;
  std::vector<int> streak_;
  std::set<int> confirmed_;
};

}  // namespace rangemon
