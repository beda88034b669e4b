#include "rangemon/attack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rangemon/errors.hpp"

namespace rangemon {

AttackSchedule::AttackSchedule(std::vector<AttackPhase> phases, int num_robots)
    : phases_(std::move(phases)) {
  for (std::size_t p = 0; p < phases_.size(); ++p) {
    const auto& ph = phases_[p];
    if (ph.start_step < 0) throw ConfigError("attack phase " + std::to_string(p) + ": negative start");
    if (ph.start_step >= ph.end_step)
      throw ConfigError("attack phase " + std::to_string(p) + ": start_step must be < end_step");
    if (ph.targets.empty())
      throw ConfigError("attack phase " + std::to_string(p) + ": target set is empty");
    if (ph.offsets.size() != ph.targets.size())
      throw ConfigError("attack phase " + std::to_string(p) + ": needs one offset per target");
    std::set<int> seen;
    for (int t : ph.targets) {
      if (t < 0 || t >= num_robots)
        throw ConfigError("attack phase " + std::to_string(p) + ": target " + std::to_string(t) +
                          " out of range");
      if (!seen.insert(t).second)
        throw ConfigError("attack phase " + std::to_string(p) + ": duplicate target " +
                          std::to_string(t));
    }
    if (2 * static_cast<int>(ph.targets.size()) >= num_robots)
      warnings_.push_back("attack phase " + std::to_string(p) + " targets " +
                          std::to_string(ph.targets.size()) + " of " + std::to_string(num_robots) +
                          " robots; sparse recovery assumes far fewer attacked than healthy");
  }
  // Overlapping windows may not disagree about a robot's offset.
  for (std::size_t p = 0; p < phases_.size(); ++p)
    for (std::size_t q = p + 1; q < phases_.size(); ++q) {
      const auto& a = phases_[p];
      const auto& b = phases_[q];
      if (a.end_step <= b.start_step || b.end_step <= a.start_step) continue;
      for (std::size_t ia = 0; ia < a.targets.size(); ++ia)
        for (std::size_t ib = 0; ib < b.targets.size(); ++ib)
          if (a.targets[ia] == b.targets[ib] &&
              (a.offsets[ia].size() != b.offsets[ib].size() || a.offsets[ia] != b.offsets[ib]))
            throw ConfigError("attack phases " + std::to_string(p) + " and " + std::to_string(q) +
                              " overlap in time and disagree on the offset for robot " +
                              std::to_string(a.targets[ia]));
    }
}

ActiveFaults AttackSchedule::active_faults(int k, const LayoutPtr& layout, int pos_dim,
                                           int pos_offset) const {
  if (k < 0) throw IndexError("active_faults: negative step");
  ActiveFaults out{{}, BlockVec(layout)};
  for (const auto& ph : phases_) {
    if (k < ph.start_step || k >= ph.end_step) continue;
    for (std::size_t t = 0; t < ph.targets.size(); ++t) {
      const int robot = ph.targets[t];
      const auto& off = ph.offsets[t];
      if (off.size() != pos_dim)
        throw ShapeError("active_faults: offset for robot " + std::to_string(robot) + " has dimension " +
                         std::to_string(off.size()) + ", expected " + std::to_string(pos_dim));
      out.f.block(robot).segment(pos_offset, pos_dim) = off;
      out.targets.insert(robot);
    }
  }
  return out;
}

std::set<int> AttackSchedule::first_targets() const {
  const AttackPhase* first = nullptr;
  for (const auto& ph : phases_)
    if (!first || ph.start_step < first->start_step) first = &ph;
  std::set<int> out;
  if (first) out.insert(first->targets.begin(), first->targets.end());
  return out;
}

double AttackSchedule::first_injection_norm() const {
  const AttackPhase* first = nullptr;
  for (const auto& ph : phases_)
    if (!first || ph.start_step < first->start_step) first = &ph;
  if (!first) return 0.0;
  double sq = 0.0;
  for (const auto& off : first->offsets) sq += off.squaredNorm();
  return std::sqrt(sq);
}

nlohmann::ordered_json AttackSchedule::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& ph : phases_) {
    nlohmann::ordered_json jp;
    jp["start"] = ph.start_step;
    jp["end"] = ph.end_step;
    jp["targets"] = ph.targets;
    auto offs = nlohmann::ordered_json::array();
    for (const auto& off : ph.offsets) {
      auto jo = nlohmann::ordered_json::array();
      for (int i = 0; i < off.size(); ++i) jo.push_back(off[i]);
      offs.push_back(std::move(jo));
    }
    jp["offsets"] = std::move(offs);
    arr.push_back(std::move(jp));
  }
  nlohmann::ordered_json j;
  j["phases"] = std::move(arr);
  return j;
}

AttackSchedule AttackSchedule::from_json(const nlohmann::json& j, int num_robots) {
  std::vector<AttackPhase> phases;
  if (j.contains("phases"))
    for (const auto& jp : j.at("phases")) {
      AttackPhase ph;
      ph.start_step = jp.at("start").get<int>();
      ph.end_step = jp.at("end").get<int>();
      ph.targets = jp.at("targets").get<std::vector<int>>();
      for (const auto& jo : jp.at("offsets")) {
        Eigen::VectorXd off(jo.size());
        for (std::size_t i = 0; i < jo.size(); ++i) off[static_cast<int>(i)] = jo.at(i).get<double>();
        ph.offsets.push_back(std::move(off));
      }
      phases.push_back(std::move(ph));
    }
  return AttackSchedule(std::move(phases), num_robots);
}

}  // namespace rangemon
