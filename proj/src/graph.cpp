#include "rgi/graph.hpp"

#include <algorithm>

namespace rgi {

int Labels::num_classes() const {
  if (multilabel()) return static_cast<int>(matrix.cols());
  int mx = -1;
  for (int c : classes) mx = std::max(mx, c);
  return mx + 1;
}

std::vector<NodeId> Graph::mask_nodes(const std::vector<std::uint8_t>& mask) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

Graph build_graph(std::span<const std::pair<NodeId, NodeId>> edges, Matrix features,
                  Labels labels, std::vector<std::uint8_t> train_mask,
                  std::vector<std::uint8_t> val_mask, std::vector<std::uint8_t> test_mask,
                  bool directed) {
  const Index n = features.rows();
  if (labels.size() != 0 && labels.size() != n) {
    throw IngestionError("build_graph: label count does not match feature rows");
  }
  auto check_mask = [&](const std::vector<std::uint8_t>& m, const char* which) {
    if (!m.empty() && static_cast<Index>(m.size()) != n) {
      throw IngestionError(std::string("build_graph: ") + which + " mask length mismatch");
    }
  };
  check_mask(train_mask, "train");
  check_mask(val_mask, "val");
  check_mask(test_mask, "test");

  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n));
  for (const auto& [s, d] : edges) {
    if (s < 0 || s >= n || d < 0 || d >= n) {
      throw IngestionError("build_graph: edge endpoint out of range");
    }
    adj[static_cast<std::size_t>(s)].push_back(d);
    if (!directed && s != d) adj[static_cast<std::size_t>(d)].push_back(s);
  }

  Graph g;
  g.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 0; i < n; ++i) {
    auto& row = adj[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.offsets[static_cast<std::size_t>(i) + 1] =
        g.offsets[static_cast<std::size_t>(i)] + static_cast<NodeId>(row.size());
  }
  g.indices.reserve(static_cast<std::size_t>(g.offsets.back()));
  for (auto& row : adj) g.indices.insert(g.indices.end(), row.begin(), row.end());

  g.features = std::move(features);
  g.labels = std::move(labels);
  g.train_mask = std::move(train_mask);
  g.val_mask = std::move(val_mask);
  g.test_mask = std::move(test_mask);
  return g;
}

namespace {

void check_rows(const Matrix& u, const Graph& g) {
  check_dim(u.rows() == g.num_nodes(), "propagate: row count must equal node count");
}

}  // namespace

Matrix propagate(const Matrix& u, const Graph& g, int steps) {
  check_rows(u, g);
  check_contract(steps >= 1, "propagate: steps must be >= 1");
  Matrix cur = u;
  Matrix next(u.rows(), u.cols());
  for (int s = 0; s < steps; ++s) {
    for (Index i = 0; i < g.num_nodes(); ++i) {
      auto nbrs = g.neighbors(i);
      if (nbrs.empty()) {
        next.row(i) = cur.row(i);
        continue;
      }
      next.row(i).setZero();
      for (NodeId j : nbrs) next.row(i) += cur.row(j);
      next.row(i) /= static_cast<double>(nbrs.size());
    }
    std::swap(cur, next);
  }
  return cur;
}

Var propagate(Var u, const Graph& g, int steps) {
  check_rows(u.tape->value(u), g);
  check_contract(steps >= 1, "propagate: steps must be >= 1");
  std::vector<Index> edge_src, edge_dst;
  edge_src.reserve(static_cast<std::size_t>(g.num_edges()));
  edge_dst.reserve(static_cast<std::size_t>(g.num_edges()));
  for (Index i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j : g.neighbors(i)) {
      edge_src.push_back(j);
      edge_dst.push_back(i);
    }
  }
  Var cur = u;
  for (int s = 0; s < steps; ++s) {
    cur = neighbor_mean(cur, std::vector<Index>(edge_src), std::vector<Index>(edge_dst),
                        g.num_nodes());
  }
  return cur;
}

std::pair<Graph, std::vector<NodeId>> induced_subgraph(const Graph& g,
                                                       std::span<const NodeId> nodes) {
  const Index n = g.num_nodes();
  std::vector<NodeId> new_of_old(static_cast<std::size_t>(n), -1);
  std::vector<NodeId> old_of_new(nodes.begin(), nodes.end());
  for (std::size_t k = 0; k < old_of_new.size(); ++k) {
    const NodeId v = old_of_new[k];
    check_contract(v >= 0 && v < n, "induced_subgraph: node id out of range");
    check_contract(new_of_old[static_cast<std::size_t>(v)] == -1,
                   "induced_subgraph: duplicate node id");
    new_of_old[static_cast<std::size_t>(v)] = static_cast<NodeId>(k);
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId old_src : old_of_new) {
    for (NodeId old_dst : g.neighbors(old_src)) {
      const NodeId nd = new_of_old[static_cast<std::size_t>(old_dst)];
      if (nd != -1) {
        edges.emplace_back(new_of_old[static_cast<std::size_t>(old_src)], nd);
      }
    }
  }

  const Index m = static_cast<Index>(old_of_new.size());
  Matrix features(m, g.features.cols());
  Labels labels;
  if (g.labels.multilabel()) labels.matrix.resize(m, g.labels.matrix.cols());
  std::vector<std::uint8_t> train(static_cast<std::size_t>(m), 0),
      val(static_cast<std::size_t>(m), 0), test(static_cast<std::size_t>(m), 0);
  for (Index k = 0; k < m; ++k) {
    const auto old_idx = static_cast<std::size_t>(old_of_new[static_cast<std::size_t>(k)]);
    features.row(k) = g.features.row(static_cast<Index>(old_idx));
    if (g.labels.multilabel()) {
      labels.matrix.row(k) = g.labels.matrix.row(static_cast<Index>(old_idx));
    } else if (!g.labels.classes.empty()) {
      labels.classes.push_back(g.labels.classes[old_idx]);
    }
    if (!g.train_mask.empty()) train[static_cast<std::size_t>(k)] = g.train_mask[old_idx];
    if (!g.val_mask.empty()) val[static_cast<std::size_t>(k)] = g.val_mask[old_idx];
    if (!g.test_mask.empty()) test[static_cast<std::size_t>(k)] = g.test_mask[old_idx];
  }

  // edges are already stored in both directions, so rebuild as directed
  Graph sub = build_graph(edges, std::move(features), std::move(labels), std::move(train),
                          std::move(val), std::move(test), /*directed=*/true);
  return {std::move(sub), std::move(old_of_new)};
}

}  // namespace rgi
