#pragma once

#include <functional>
#include <vector>

#include "rgi/rgi_loss.hpp"
#include "rgi/sampling.hpp"

namespace rgi {

struct TrainConfig {
  int epochs = 100;
  Index batch_size = 512;
  std::int64_t fanout_conv = 10;  // in-edges sampled per encoder layer (-1 = full)
  std::int64_t fanout_prop = 5;   // neighbors sampled for the propagated view (-1 = full)
  int prop_steps = 1;
  std::uint64_t seed = 1;
  AdamConfig adam;
  LossWeights loss;

  void validate() const {
    check_contract(epochs >= 0, "train: negative epoch count");
    check_contract(batch_size >= 2, "train: batch_size must be >= 2 (covariance needs rows)");
    check_contract(prop_steps >= 1, "train: prop_steps must be >= 1");
    check_contract(fanout_conv == kFullNeighborhood || fanout_conv >= 1,
                   "train: fanout_conv must be >= 1 or full");
    check_contract(fanout_prop == kFullNeighborhood || fanout_prop >= 1,
                   "train: fanout_prop must be >= 1 or full");
    adam.validate();
    loss.validate();
  }
};

// Per-batch sampling footprint, for the complexity bench and the
// memory-decoupling checks. `nodes` counts the feature rows materialized by
// the batch (sum of per-block deduplicated source lists); `edges` counts
// sampled edges across all blocks including propagation edges.
struct BatchFootprint {
  std::int64_t nodes = 0;
  std::int64_t edges = 0;
};

BatchFootprint batch_footprint(const RgiBatch& batch);

// Produces the module embeddings for one batch: one row per entry of
// batch.embedded_nodes(), the first |targets| rows being the targets.
using LayerForward = std::function<Var(Tape&, const RgiBatch&)>;

// Appendix-style RGI fit of one module: per batch, embed, average the
// sampled propagation edges into the propagated view, apply the symmetric
// regularized reconstruction loss to the target rows, and take an Adam step
// on `trainable`. Returns per-epoch loss terms (target-weighted means).
std::vector<RgiLossTerms> train_rgi_module(const LayerForward& embed, const Graph& g,
                                           int num_conv_layers, ReconstructionHead& phi,
                                           ReconstructionHead& psi,
                                           const std::vector<Parameter*>& trainable,
                                           const TrainConfig& cfg, std::uint64_t module_seed,
                                           std::vector<BatchFootprint>* footprints = nullptr);

}  // namespace rgi
