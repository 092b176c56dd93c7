#include "rgi/sbm.hpp"

#include "rgi/rng.hpp"

namespace rgi {

Graph generate_sbm(const SbmConfig& cfg) {
  check_contract(cfg.nodes_per_block >= 1 && cfg.num_blocks >= 1, "sbm: empty model");
  check_contract(cfg.p_out >= 0.0 && cfg.p_out < cfg.p_in && cfg.p_in <= 1.0,
                 "sbm: probabilities must satisfy 0 <= p_out < p_in <= 1");
  check_contract(cfg.feat_dim >= cfg.num_blocks, "sbm: feat_dim must be >= num_blocks");
  check_contract(cfg.feat_noise >= 0.0, "sbm: negative noise");

  const Index n = cfg.nodes_per_block * cfg.num_blocks;
  auto block_of = [&](Index v) { return static_cast<int>(v / cfg.nodes_per_block); };

  RandomStream edge_rng(derive_seed(cfg.seed, "sbm-edges"));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double p = block_of(i) == block_of(j) ? cfg.p_in : cfg.p_out;
      if (edge_rng.uniform() < p) edges.emplace_back(i, j);
    }
  }

  RandomStream feat_rng(derive_seed(cfg.seed, "sbm-features"));
  Matrix features(n, cfg.feat_dim);
  for (Index i = 0; i < n; ++i) {
    for (Index f = 0; f < cfg.feat_dim; ++f) {
      features(i, f) = cfg.feat_noise * feat_rng.normal();
    }
    features(i, block_of(i)) += cfg.feat_signal;
  }

  Labels labels;
  labels.classes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels.classes[static_cast<std::size_t>(i)] = block_of(i);

  RandomStream split_rng(derive_seed(cfg.seed, "sbm-splits"));
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  split_rng.shuffle(order);
  std::vector<std::uint8_t> train(static_cast<std::size_t>(n), 0),
      val(static_cast<std::size_t>(n), 0), test(static_cast<std::size_t>(n), 0);
  const Index n_train = (n * 6) / 10;
  const Index n_val = (n * 2) / 10;
  for (Index k = 0; k < n; ++k) {
    const auto v = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
    if (k < n_train) {
      train[v] = 1;
    } else if (k < n_train + n_val) {
      val[v] = 1;
    } else {
      test[v] = 1;
    }
  }

  return build_graph(edges, std::move(features), std::move(labels), std::move(train),
                     std::move(val), std::move(test), /*directed=*/false);
}

}  // namespace rgi
