#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rgi/autodiff.hpp"
#include "rgi/common.hpp"

namespace rgi {

// Node labels: exactly one of `classes` (multiclass, one id per node) or
// `matrix` (multilabel, one 0/1 row per node) is populated.
struct Labels {
  std::vector<int> classes;
  Matrix matrix;

  bool multilabel() const { return matrix.size() != 0; }
  Index size() const {
    return multilabel() ? matrix.rows() : static_cast<Index>(classes.size());
  }
  int num_classes() const;
};

// Immutable graph: canonical CSR adjacency (sorted neighbor lists, no
// duplicate edges) plus node features, labels and split masks. Shareable
// across threads once built.
struct Graph {
  std::vector<NodeId> offsets;  // N+1, non-decreasing
  std::vector<NodeId> indices;  // E, strictly increasing within each row
  Matrix features;              // N x d
  Labels labels;
  std::vector<std::uint8_t> train_mask, val_mask, test_mask;

  Index num_nodes() const { return static_cast<Index>(offsets.size()) - 1; }
  Index num_edges() const { return static_cast<Index>(indices.size()); }
  Index degree(NodeId i) const {
    return offsets[static_cast<std::size_t>(i) + 1] - offsets[static_cast<std::size_t>(i)];
  }
  std::span<const NodeId> neighbors(NodeId i) const {
    return {indices.data() + offsets[static_cast<std::size_t>(i)],
            static_cast<std::size_t>(degree(i))};
  }
  std::vector<NodeId> mask_nodes(const std::vector<std::uint8_t>& mask) const;
};

// Builds the canonical CSR form. Edges are deduplicated; unless `directed`
// is set every edge is stored in both directions.
Graph build_graph(std::span<const std::pair<NodeId, NodeId>> edges, Matrix features,
                  Labels labels, std::vector<std::uint8_t> train_mask,
                  std::vector<std::uint8_t> val_mask, std::vector<std::uint8_t> test_mask,
                  bool directed = false);

// K steps of degree-normalized neighbor averaging. Isolated nodes keep their
// own row (the operator stays total instead of dividing by zero).
Matrix propagate(const Matrix& u, const Graph& g, int steps);
// Differentiable version of the same operator.
Var propagate(Var u, const Graph& g, int steps);

// Relabeled subgraph over `nodes`, keeping only edges with both endpoints in
// the set. Second return value maps new ids to old ids.
std::pair<Graph, std::vector<NodeId>> induced_subgraph(const Graph& g,
                                                       std::span<const NodeId> nodes);

}  // namespace rgi
