#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace filterlab {

/// Stream tags mixed into derived seeds. Each tag owns an independent
/// sequence so that, e.g., changing a discretization level never shifts
/// the initial-state draws.
enum class Stream : std::uint64_t {
  signal_noise = 0x51,
  observation_noise = 0x52,
  initial_state = 0x53,
  particle = 0x54,
  inner = 0x55,
  bootstrap = 0x56,
  synthetic = 0x57,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Hashes (master, stream, a, b) into a 64-bit seed. Pure function of its
/// arguments, so every work item can rebuild its generator independently of
/// scheduling.
std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

/// Standard normal generator over a 64-bit Mersenne Twister.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return dist_(engine_); }

  /// Fills `out` with N(0, scale^2) draws.
  void fill(std::span<double> out, double scale) {
    for (double& v : out) v = scale * dist_(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace filterlab
