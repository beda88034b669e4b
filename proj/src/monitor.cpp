#include "rangemon/monitor.hpp"

#include <cstdio>

#include "rangemon/errors.hpp"

namespace rangemon {

double robot_integrity(const Eigen::Ref<const Eigen::VectorXd>& block) { return block.norm(); }

IntegrityReport evaluate(const BlockVec& reconstruction, double epsilon, int step) {
  if (!(epsilon > 0.0)) throw ConfigError("integrity threshold epsilon must be positive");
  IntegrityReport r;
  r.step = step;
  r.chi_i.resize(reconstruction.num_blocks());
  for (int i = 0; i < reconstruction.num_blocks(); ++i) {
    r.chi_i[i] = robot_integrity(reconstruction.block(i));
    r.chi += r.chi_i[i];
    if (r.chi_i[i] > epsilon) r.detected.insert(i);
  }
  r.swarm_alarm = r.chi > epsilon;
  return r;
}

std::string IntegrityReport::to_json_line() const {
  // Hand-rolled so the numeric formatting stays byte-stable.
  char buf[64];
  std::string out = "{\"step\":" + std::to_string(step) + ",\"chi\":";
  std::snprintf(buf, sizeof buf, "%.17g", chi);
  out += buf;
  out += ",\"chi_i\":[";
  for (std::size_t i = 0; i < chi_i.size(); ++i) {
    if (i) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", chi_i[i]);
    out += buf;
  }
  out += "],\"detected\":[";
  bool first = true;
  for (int id : detected) {
    if (!first) out += ',';
    out += std::to_string(id);
    first = false;
  }
  out += "],\"swarm_alarm\":";
  out += swarm_alarm ? "true" : "false";
  out += '}';
  return out;
}

DetectionConfirmer::DetectionConfirmer(int num_robots, int confirm_steps)
    : confirm_steps_(confirm_steps) {
  if (num_robots < 1) throw ConfigError("DetectionConfirmer: needs at least one robot");
  if (confirm_steps_ < 1) throw ConfigError("DetectionConfirmer: confirm_steps must be >= 1");
  streak_.assign(num_robots, 0);
}

const std::set<int>& DetectionConfirmer::update(const IntegrityReport& report) {
  if (report.chi_i.size() != streak_.size())
    throw ShapeError("DetectionConfirmer: report robot count changed");
  for (std::size_t i = 0; i < streak_.size(); ++i) {
    const int id = static_cast<int>(i);
    if (report.detected.count(id)) {
      if (++streak_[i] >= confirm_steps_) confirmed_.insert(id);
    } else {
      streak_[i] = 0;
      confirmed_.erase(id);
    }
  }
  return confirmed_;
}

void DetectionConfirmer::reset() {
  std::fill(streak_.begin(), streak_.end(), 0);
  confirmed_.clear();
}

}  // namespace rangemon
