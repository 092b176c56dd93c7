#include "rgi/trainer.hpp"

namespace rgi {

BatchFootprint batch_footprint(const RgiBatch& batch) {
  BatchFootprint fp;
  for (const auto& blk : batch.conv_blocks) {
    fp.nodes += blk.num_src();
    fp.edges += blk.num_edges();
  }
  for (const auto& blk : batch.prop_blocks) fp.edges += blk.num_edges();
  return fp;
}

namespace {

// Averages the embeddings over the sampled propagation chain, innermost hop
// first, ending with one row per target.
Var propagated_view(Var embeddings, const RgiBatch& batch) {
  Var cur = embeddings;
  for (auto it = batch.prop_blocks.rbegin(); it != batch.prop_blocks.rend(); ++it) {
    cur = neighbor_mean(cur, std::vector<Index>(it->edge_src),
                        std::vector<Index>(it->edge_dst), it->num_dst());
  }
  return cur;
}

}  // namespace

std::vector<RgiLossTerms> train_rgi_module(const LayerForward& embed, const Graph& g,
                                           int num_conv_layers, ReconstructionHead& phi,
                                           ReconstructionHead& psi,
                                           const std::vector<Parameter*>& trainable,
                                           const TrainConfig& cfg, std::uint64_t module_seed,
                                           std::vector<BatchFootprint>* footprints) {
  cfg.validate();
  check_contract(g.num_nodes() > 0, "train_rgi_module: empty graph");

  std::vector<NodeId> pool(static_cast<std::size_t>(g.num_nodes()));
  for (Index i = 0; i < g.num_nodes(); ++i) pool[static_cast<std::size_t>(i)] = i;

  RandomStream shuffle_rng(derive_seed(module_seed, "shuffle"));
  RandomStream sample_rng(derive_seed(module_seed, "sample"));

  std::vector<RgiLossTerms> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(pool);
    RgiLossTerms sums;
    double weight = 0.0;
    for (std::size_t at = 0; at < pool.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t take =
          std::min(pool.size() - at, static_cast<std::size_t>(cfg.batch_size));
      if (take < 2) break;  // a final 1-node remainder has no covariance; skip it
      std::span<const NodeId> targets(pool.data() + at, take);
      RgiBatch batch = build_rgi_batch(g, targets, num_conv_layers, cfg.fanout_conv,
                                       cfg.fanout_prop, cfg.prop_steps, sample_rng);
      if (footprints) footprints->push_back(batch_footprint(batch));

      Tape tape;
      Var embeddings = embed(tape, batch);
      check_dim(tape.value(embeddings).rows() ==
                    static_cast<Index>(batch.embedded_nodes().size()),
                "train_rgi_module: embed() must produce one row per embedded node");
      Var v = propagated_view(embeddings, batch);
      std::vector<Index> target_rows(take);
      for (std::size_t i = 0; i < take; ++i) target_rows[i] = static_cast<Index>(i);
      Var u = gather_rows(embeddings, std::move(target_rows));
      RgiLossVars loss = rgi_loss(tape, u, v, phi, psi, cfg.loss);
      tape.backward(loss.total);
      adam_step(trainable, cfg.adam);

      const RgiLossTerms terms = loss.values();
      const double bw = static_cast<double>(take);
      sums.rec_u += bw * terms.rec_u;
      sums.rec_v += bw * terms.rec_v;
      sums.var_u += bw * terms.var_u;
      sums.var_v += bw * terms.var_v;
      sums.cov_u += bw * terms.cov_u;
      sums.cov_v += bw * terms.cov_v;
      sums.total += bw * terms.total;
      weight += bw;
    }
    if (weight > 0.0) {
      sums.rec_u /= weight;
      sums.rec_v /= weight;
      sums.var_u /= weight;
      sums.var_v /= weight;
      sums.cov_u /= weight;
      sums.cov_v /= weight;
      sums.total /= weight;
    }
    history.push_back(sums);
  }
  return history;
}

}  // namespace rgi
