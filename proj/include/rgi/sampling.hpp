#pragma once

#include <span>
#include <vector>

#include "rgi/graph.hpp"
#include "rgi/rng.hpp"

namespace rgi {

// A fanout of kFullNeighborhood keeps every in-edge instead of sampling.
inline constexpr std::int64_t kFullNeighborhood = -1;

// One bipartite message-flow block. src_nodes always begins with a copy of
// dst_nodes so destination rows are available for skip connections and
// isolated-node fallbacks. Edges use local indices and are grouped by
// destination in dst order.
struct SampledBlock {
  std::vector<NodeId> dst_nodes;
  std::vector<NodeId> src_nodes;
  std::vector<Index> edge_src;
  std::vector<Index> edge_dst;
  std::vector<Index> dst_degrees;  // sampled in-degree per destination

  Index num_dst() const { return static_cast<Index>(dst_nodes.size()); }
  Index num_src() const { return static_cast<Index>(src_nodes.size()); }
  Index num_edges() const { return static_cast<Index>(edge_src.size()); }
};

// Samples min(degree, fanout) in-edges per target without replacement
// (every in-edge when fanout is kFullNeighborhood). Deterministic for a
// given stream state.
SampledBlock sample_block(const Graph& g, std::span<const NodeId> targets, std::int64_t fanout,
                          RandomStream& rng);

// L chained blocks, input-most first: blocks[l].dst_nodes ==
// blocks[l+1].src_nodes, blocks.back().dst_nodes == targets.
struct E2EBatch {
  std::vector<SampledBlock> blocks;
  std::vector<NodeId> target_nodes;
};

E2EBatch build_e2e_batch(const Graph& g, std::span<const NodeId> targets, int num_layers,
                         std::int64_t fanout, RandomStream& rng);

// One-hop training batch: conv_block computes embeddings for the targets and
// their sampled propagation neighbors; prop_block is only used to average
// those embeddings into the propagated view of each target.
struct LayerwiseBatch {
  SampledBlock conv_block;
  SampledBlock prop_block;
  std::vector<NodeId> target_nodes;
};

LayerwiseBatch build_layerwise_batch(const Graph& g, std::span<const NodeId> targets,
                                     std::int64_t fanout_conv, std::int64_t fanout_prop,
                                     RandomStream& rng);

// Full batch structure for one RGI training step: prop_blocks (outermost
// first, prop_blocks[0].dst_nodes == targets) chain the K propagation hops;
// conv_blocks (input-most first) chain the encoder layers, ending on the
// node set the propagation needs. build_layerwise_batch is the
// num_conv_layers=1, prop_steps=1 case.
struct RgiBatch {
  std::vector<SampledBlock> prop_blocks;
  std::vector<SampledBlock> conv_blocks;
  std::vector<NodeId> target_nodes;

  const std::vector<NodeId>& embedded_nodes() const { return conv_blocks.back().dst_nodes; }
  Index num_targets() const { return static_cast<Index>(target_nodes.size()); }
};

RgiBatch build_rgi_batch(const Graph& g, std::span<const NodeId> targets, int num_conv_layers,
                         std::int64_t fanout_conv, std::int64_t fanout_prop, int prop_steps,
                         RandomStream& rng);

}  // namespace rgi
