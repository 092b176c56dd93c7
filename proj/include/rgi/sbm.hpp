#pragma once

#include <cstdint>

#include "rgi/graph.hpp"

namespace rgi {

struct SbmConfig {
  Index nodes_per_block = 500;
  int num_blocks = 4;
  double p_in = 0.05;
  double p_out = 0.005;
  Index feat_dim = 16;
  double feat_noise = 1.0;
  double feat_signal = 1.0;
  std::uint64_t seed = 1;
};

// Stochastic block model with planted communities. Features are
// one-hot(block) * signal plus Gaussian noise; labels are block ids; nodes
// get a random 60/20/20 train/val/test split. Deterministic per seed.
Graph generate_sbm(const SbmConfig& cfg);

}  // namespace rgi
