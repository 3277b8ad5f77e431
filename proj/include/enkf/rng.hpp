#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace enkf {

/// Tags that separate the independent noise sources of an experiment.
enum class Purpose : std::uint64_t {
  TruthInit = 1,
  ObservationNoise = 2,
  PerturbedObservation = 3,
  EnsembleMean = 4,
  EnsembleMember = 5,
  MemberNoise = 6,
  SharedNoise = 7,
  GrowthProbe = 8,
  Replica = 9,
  RmlPrior = 10,
  RmlData = 11,
  Test = 99,
};

std::uint64_t mix64(std::uint64_t z);

/// Seed of the substream identified by (master, purpose, member, step).
std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                          std::uint64_t member = 0, std::uint64_t step = 0);

/// Counter-based stream: the i-th output is mix64(key + i * golden), so a
/// substream is fully determined by its coordinates and never depends on
/// how many draws other streams have made.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) : key_(key) {}
  RngStream(std::uint64_t master, Purpose purpose, std::uint64_t member = 0,
            std::uint64_t step = 0)
      : key_(derive_seed(master, purpose, member, step)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    counter_ += kGolden;
    return mix64(key_ + counter_);
  }

  double normal() { return normal_(*this); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(*this); }
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace enkf
