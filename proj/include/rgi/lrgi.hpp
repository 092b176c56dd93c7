#pragma once

#include "rgi/encoder.hpp"
#include "rgi/trainer.hpp"

namespace rgi {

// Per-layer whole-graph activations on the training graph. Entry 0 is the
// raw features; entry l is written once, right after layer l finishes
// training, and read-only afterwards.
struct EmbeddingCache {
  std::vector<Matrix> layers;
};

struct LayerwiseResult {
  Encoder encoder;
  EmbeddingCache cache;
  std::vector<std::vector<RgiLossTerms>> history;  // one trajectory per layer
};

// Trains the encoder one layer at a time: layer l is fit with the RGI
// objective reading its inputs from cache entry l-1, with fresh
// reconstruction heads per layer; earlier layers are never touched again.
// The graph should already be restricted to the training split.
LayerwiseResult train_layerwise(const EncoderConfig& enc_cfg, const Graph& g,
                                const TrainConfig& cfg,
                                std::vector<BatchFootprint>* footprints = nullptr);

struct E2eResult {
  Encoder encoder;
  std::vector<RgiLossTerms> history;
};

// End-to-end counterpart: one RGI fit of the whole stack, batched over
// L-layer sampled chains. With num_layers=1 this consumes randomness
// identically to train_layerwise, so the two produce the same trajectory.
E2eResult train_rgi_e2e(const EncoderConfig& enc_cfg, const Graph& g, const TrainConfig& cfg,
                        std::vector<BatchFootprint>* footprints = nullptr);

enum class EmbedMode { kFullGraph, kSampled };

// Stacked layer-by-layer inference over any graph with matching feature
// width. kFullGraph uses every edge and is deterministic; kSampled caps
// fanout per layer at `fanout` using the given seed.
Matrix embed_nodes(const Encoder& encoder, const Graph& g, EmbedMode mode = EmbedMode::kFullGraph,
                   std::int64_t fanout = kFullNeighborhood, std::uint64_t seed = 0);

}  // namespace rgi
