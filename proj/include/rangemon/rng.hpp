#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace rangemon {

// Deterministic random stream. All sampling is implemented on top of the raw
// 64-bit engine output so results do not depend on the standard library's
// distribution implementations. Streams are derived from
// (master_seed, robot_id, purpose) so that adding robots or purposes never
// perturbs existing streams.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed == 0 ? 0x9e3779b97f4a7c15ull : seed) {}

  RngStream(std::uint64_t master_seed, std::uint64_t robot_id, std::string_view purpose)
      : RngStream(derive_seed(master_seed, robot_id, purpose)) {}

  static std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t robot_id,
                                   std::string_view purpose) {
    std::uint64_t h = fnv1a(purpose);
    h = splitmix(h ^ splitmix(master_seed));
    h = splitmix(h ^ splitmix(robot_id + 0x632be59bd9b4e019ull));
    return h;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. One draw per call; no cached spare.
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normal_vec(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  // Uniform direction on the unit sphere in R^dim.
  Eigen::VectorXd unit_vector(int dim) {
    Eigen::VectorXd v;
    double n = 0.0;
    do {
      v = normal_vec(dim);
      n = v.norm();
    } while (n < 1e-12);
    return v / n;
  }

  // Uniform sample from the closed ball of the given radius in R^dim.
  Eigen::VectorXd uniform_in_ball(int dim, double radius) {
    if (radius <= 0.0) return Eigen::VectorXd::Zero(dim);
    const double r = radius * std::pow(uniform01(), 1.0 / static_cast<double>(dim));
    return r * unit_vector(dim);
  }

 private:
  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      h *= 0x100000001b3ull;
    }
    return h;
  }

  static constexpr std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace rangemon
