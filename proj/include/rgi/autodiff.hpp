#pragma once

#include <unordered_map>
#include <vector>

#include "rgi/common.hpp"
#include "rgi/tensor.hpp"

namespace rgi {

class Tape;

// Lightweight handle to a tape node. Copyable, only valid while its tape is
// alive.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

enum class OpKind {
  kLeaf,
  kParam,
  kMatmul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kAddScalar,
  kMulScalar,
  kElu,
  kLeakyRelu,
  kExp,
  kLog,
  kSquare,
  kSum,
  kColMean,
  kDiag,
  kAddRow,
  kGatherRows,
  kHconcat,
  kSegmentSoftmax,
  kNeighborMean,
  kEdgeWeightedSum,
  kSoftmaxXent,
  kBceLogits,
};

struct TapeNode {
  OpKind op = OpKind::kLeaf;
  std::vector<int> inputs;
  Matrix value;
  Matrix grad;
  // Saved context for backward, op-dependent.
  double scalar = 0.0;
  std::vector<Index> idx_a;  // gather indices / segment ids / edge sources
  std::vector<Index> idx_b;  // edge destinations
  Index aux = 0;             // destination count for aggregates
  Matrix saved;              // softmax probabilities, targets, ...
};

// Define-by-run reverse-mode tape. A fresh tape is built every forward pass;
// node order is the topological order. One backward pass per tape: a second
// call without re-running the forward is rejected.
class Tape {
 public:
  Var leaf(Matrix value);
  // Registers a parameter leaf. Repeated calls with the same parameter on
  // one tape return the same node, and backward accumulates into
  // param.tensor.grad.
  Var param(Parameter& p);

  const Matrix& value(Var v) const { return node(v.id).value; }
  const Matrix& grad(Var v) const { return node(v.id).grad; }
  double scalar_value(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and walks the tape in reverse, populating the
  // grad of every ancestor node; parameters registered on this tape get
  // their grads accumulated (zero for parameters the loss does not reach).
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend Var make_node(Tape& t, TapeNode&& n);
  TapeNode& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const TapeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  void backward_step(int id);

  std::vector<TapeNode> nodes_;
  std::unordered_map<Parameter*, int> param_nodes_;
  bool backward_done_ = false;
};

// ---- primitive ops -------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var x);
// add/sub/mul accept equal shapes or a 1x1 operand broadcast against the
// other side; no other broadcasting exists.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add_scalar(Var x, double c);
Var mul_scalar(Var x, double c);
Var elu(Var x);
Var leaky_relu(Var x, double negative_slope);
Var exp(Var x);
Var log(Var x);
Var square(Var x);
Var sum(Var x);                       // 1x1
Var col_mean(Var x);                  // 1xD mean over rows
Var diag(Var x);                      // Dx1 diagonal of a square matrix
Var add_row(Var x, Var row);          // broadcast a 1xD row over all rows
Var gather_rows(Var x, std::vector<Index> rows);
Var hconcat(const std::vector<Var>& parts);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

// Softmax over contiguous segments of a column vector of scores. Segment ids
// must be non-decreasing; each segment's outputs sum to 1.
Var segment_softmax(Var scores, std::vector<Index> segment_ids);

// Mean of source rows over the given edges, per destination. Destinations
// with no incoming edge copy their own row (rows 0..num_dst-1 of the input
// are the destinations by convention). Edge destinations must be sorted.
Var neighbor_mean(Var src, std::vector<Index> edge_src, std::vector<Index> edge_dst,
                  Index num_dst);

// out[dst_e] += weight_e * src[src_e]; the weighted message aggregation of
// attention. `weights` is Ex1.
Var edge_weighted_sum(Var weights, Var src, std::vector<Index> edge_src,
                      std::vector<Index> edge_dst, Index num_dst);

// Mean cross-entropy of row-wise softmax against integer class targets.
Var softmax_cross_entropy(Var logits, std::vector<Index> targets);
// Mean element-wise binary cross-entropy on logits against a 0/1 matrix.
Var binary_cross_entropy_logits(Var logits, Matrix targets);

// ---- composed ops --------------------------------------------------------

// Sample covariance (1/N normalization) of the column-centered input,
// explicitly symmetrized so C(i,j) and C(j,i) are bit-identical. N >= 2.
Var covariance_matrix(Var u);

// (1/N) * sum_i ||a_i - b_i||^2.
Var mse_rows(Var a, Var b);

}  // namespace rgi
