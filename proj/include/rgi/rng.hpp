#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rgi {

// Derives an independent stream seed from a base seed, a label and an index.
// Every randomized stage (graph generation, per-layer init, shuffling,
// neighbor sampling, probe) owns its own derived stream so that sub-stage
// reruns are reproducible in isolation.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0);

// Seeded random stream. Distribution code is hand-rolled on top of
// mt19937_64 so results are identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform double in [0, 1).
  double uniform();

  // Standard normal via Box-Muller.
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace rgi
