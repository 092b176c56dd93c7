#include "rgi/sampling.hpp"

#include <unordered_map>

namespace rgi {

SampledBlock sample_block(const Graph& g, std::span<const NodeId> targets, std::int64_t fanout,
                          RandomStream& rng) {
  check_contract(!targets.empty(), "sample_block: empty target set");
  check_contract(fanout == kFullNeighborhood || fanout >= 1,
                 "sample_block: fanout must be >= 1 or full");
  SampledBlock blk;
  blk.dst_nodes.assign(targets.begin(), targets.end());
  blk.src_nodes = blk.dst_nodes;
  std::unordered_map<NodeId, Index> local;
  local.reserve(blk.src_nodes.size() * 2);
  for (std::size_t i = 0; i < blk.src_nodes.size(); ++i) {
    const NodeId v = blk.src_nodes[i];
    check_contract(v >= 0 && v < g.num_nodes(), "sample_block: target id out of range");
    check_contract(local.emplace(v, static_cast<Index>(i)).second,
                   "sample_block: duplicate target id");
  }

  std::vector<NodeId> scratch;
  blk.dst_degrees.reserve(blk.dst_nodes.size());
  for (std::size_t d = 0; d < blk.dst_nodes.size(); ++d) {
    auto nbrs = g.neighbors(blk.dst_nodes[d]);
    const std::int64_t deg = static_cast<std::int64_t>(nbrs.size());
    const bool take_all = fanout == kFullNeighborhood || deg <= fanout;
    const std::int64_t take = take_all ? deg : fanout;
    scratch.assign(nbrs.begin(), nbrs.end());
    if (!take_all) {
      // partial Fisher-Yates: the first `take` entries are a uniform sample
      // without replacement
      for (std::int64_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::int64_t>(
                               rng.uniform_index(static_cast<std::uint64_t>(deg - i)));
        std::swap(scratch[static_cast<std::size_t>(i)], scratch[static_cast<std::size_t>(j)]);
      }
    }
    for (std::int64_t i = 0; i < take; ++i) {
      const NodeId u = scratch[static_cast<std::size_t>(i)];
      auto [it, inserted] = local.emplace(u, static_cast<Index>(blk.src_nodes.size()));
      if (inserted) blk.src_nodes.push_back(u);
      blk.edge_src.push_back(it->second);
      blk.edge_dst.push_back(static_cast<Index>(d));
    }
    blk.dst_degrees.push_back(static_cast<Index>(take));
  }
  return blk;
}

E2EBatch build_e2e_batch(const Graph& g, std::span<const NodeId> targets, int num_layers,
                         std::int64_t fanout, RandomStream& rng) {
  check_contract(num_layers >= 1, "build_e2e_batch: need at least one layer");
  E2EBatch batch;
  batch.target_nodes.assign(targets.begin(), targets.end());
  std::vector<SampledBlock> outward;  // output-most first while sampling
  std::span<const NodeId> frontier = targets;
  for (int l = 0; l < num_layers; ++l) {
    outward.push_back(sample_block(g, frontier, fanout, rng));
    frontier = outward.back().src_nodes;
  }
  batch.blocks.assign(std::make_move_iterator(outward.rbegin()),
                      std::make_move_iterator(outward.rend()));
  return batch;
}

RgiBatch build_rgi_batch(const Graph& g, std::span<const NodeId> targets, int num_conv_layers,
                         std::int64_t fanout_conv, std::int64_t fanout_prop, int prop_steps,
                         RandomStream& rng) {
  check_contract(prop_steps >= 1, "build_rgi_batch: prop_steps must be >= 1");
  check_contract(fanout_prop == kFullNeighborhood || fanout_prop >= 1,
                 "build_rgi_batch: propagation fanout must be >= 1 or full");
  RgiBatch batch;
  batch.target_nodes.assign(targets.begin(), targets.end());
  std::span<const NodeId> frontier = targets;
  for (int k = 0; k < prop_steps; ++k) {
    batch.prop_blocks.push_back(sample_block(g, frontier, fanout_prop, rng));
    frontier = batch.prop_blocks.back().src_nodes;
  }
  E2EBatch conv = build_e2e_batch(g, frontier, num_conv_layers, fanout_conv, rng);
  batch.conv_blocks = std::move(conv.blocks);
  return batch;
}

LayerwiseBatch build_layerwise_batch(const Graph& g, std::span<const NodeId> targets,
                                     std::int64_t fanout_conv, std::int64_t fanout_prop,
                                     RandomStream& rng) {
  RgiBatch batch = build_rgi_batch(g, targets, 1, fanout_conv, fanout_prop, 1, rng);
  LayerwiseBatch out;
  out.conv_block = std::move(batch.conv_blocks[0]);
  out.prop_block = std::move(batch.prop_blocks[0]);
  out.target_nodes = std::move(batch.target_nodes);
  return out;
}

}  // namespace rgi
