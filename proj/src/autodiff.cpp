#include "rgi/autodiff.hpp"

#include <cmath>
#include <utility>

namespace rgi {

namespace {

void check_same_tape(Var a, Var b) {
  check_contract(a.tape != nullptr && a.tape == b.tape,
                 "autodiff: operands belong to different tapes");
}

bool is_scalar_shape(const Matrix& m) { return m.rows() == 1 && m.cols() == 1; }

}  // namespace

Var make_node(Tape& t, TapeNode&& n) {
  check_contract(!t.backward_done_, "autodiff: tape already consumed by backward");
  t.nodes_.push_back(std::move(n));
  return Var{&t, static_cast<int>(t.nodes_.size() - 1)};
}

Var Tape::leaf(Matrix value) {
  TapeNode n;
  n.op = OpKind::kLeaf;
  n.value = std::move(value);
  return make_node(*this, std::move(n));
}

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{this, it->second};
  TapeNode n;
  n.op = OpKind::kParam;
  n.value = p.values();
  Var v = make_node(*this, std::move(n));
  param_nodes_.emplace(&p, v.id);
  return v;
}

double Tape::scalar_value(Var v) const {
  const Matrix& m = value(v);
  check_dim(is_scalar_shape(m), "scalar_value: node is not 1x1");
  return m(0, 0);
}

// ---- forward constructors --------------------------------------------------

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  check_dim(av.cols() == bv.rows(), "matmul: inner dimensions disagree");
  TapeNode n;
  n.op = OpKind::kMatmul;
  n.inputs = {a.id, b.id};
  n.value = av * bv;
  return make_node(t, std::move(n));
}

Var transpose(Var x) {
  Tape& t = *x.tape;
  TapeNode n;
  n.op = OpKind::kTranspose;
  n.inputs = {x.id};
  n.value = t.value(x).transpose();
  return make_node(t, std::move(n));
}

namespace {

Var binary_elementwise(OpKind op, Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  const bool a_scalar = is_scalar_shape(av);
  const bool b_scalar = is_scalar_shape(bv);
  check_dim((av.rows() == bv.rows() && av.cols() == bv.cols()) || a_scalar || b_scalar,
            "elementwise: shapes must match or one side must be 1x1");
  TapeNode n;
  n.op = op;
  n.inputs = {a.id, b.id};
  if (av.rows() == bv.rows() && av.cols() == bv.cols()) {
    switch (op) {
      case OpKind::kAdd: n.value = av + bv; break;
      case OpKind::kSub: n.value = av - bv; break;
      default: n.value = av.cwiseProduct(bv); break;
    }
  } else if (b_scalar) {
    const double s = bv(0, 0);
    switch (op) {
      case OpKind::kAdd: n.value = av.array() + s; break;
      case OpKind::kSub: n.value = av.array() - s; break;
      default: n.value = av * s; break;
    }
  } else {
    const double s = av(0, 0);
    switch (op) {
      case OpKind::kAdd: n.value = bv.array() + s; break;
      case OpKind::kSub: n.value = (s - bv.array()).matrix(); break;
      default: n.value = bv * s; break;
    }
  }
  return make_node(t, std::move(n));
}

Var unary(OpKind op, Var x, double scalar = 0.0) {
  Tape& t = *x.tape;
  const Matrix& xv = t.value(x);
  TapeNode n;
  n.op = op;
  n.inputs = {x.id};
  n.scalar = scalar;
  switch (op) {
    case OpKind::kElu:
      n.value = xv.unaryExpr([](double v) { return v >= 0.0 ? v : std::expm1(v); });
      break;
    case OpKind::kLeakyRelu:
      n.value = xv.unaryExpr([scalar](double v) { return v >= 0.0 ? v : scalar * v; });
      break;
    case OpKind::kExp: n.value = xv.array().exp(); break;
    case OpKind::kLog: n.value = xv.array().log(); break;
    case OpKind::kSquare: n.value = xv.array().square(); break;
    default: check_contract(false, "unary: bad op"); break;
  }
  return make_node(t, std::move(n));
}

}  // namespace

Var add(Var a, Var b) { return binary_elementwise(OpKind::kAdd, a, b); }
Var sub(Var a, Var b) { return binary_elementwise(OpKind::kSub, a, b); }
Var mul(Var a, Var b) { return binary_elementwise(OpKind::kMul, a, b); }

Var add_scalar(Var x, double c) {
  Tape& t = *x.tape;
  TapeNode n;
  n.op = OpKind::kAddScalar;
  n.inputs = {x.id};
  n.scalar = c;
  n.value = t.value(x).array() + c;
  return make_node(t, std::move(n));
}

Var mul_scalar(Var x, double c) {
  Tape& t = *x.tape;
  TapeNode n;
  n.op = OpKind::kMulScalar;
  n.inputs = {x.id};
  n.scalar = c;
  n.value = t.value(x) * c;
  return make_node(t, std::move(n));
}

Var elu(Var x) { return unary(OpKind::kElu, x); }
Var leaky_relu(Var x, double negative_slope) {
  return unary(OpKind::kLeakyRelu, x, negative_slope);
}
Var exp(Var x) { return unary(OpKind::kExp, x); }
Var log(Var x) { return unary(OpKind::kLog, x); }
Var square(Var x) { return unary(OpKind::kSquare, x); }

Var sum(Var x) {
  Tape& t = *x.tape;
  TapeNode n;
  n.op = OpKind::kSum;
  n.inputs = {x.id};
  n.value = Matrix::Constant(1, 1, t.value(x).sum());
  return make_node(t, std::move(n));
}

Var col_mean(Var x) {
  Tape& t = *x.tape;
  const Matrix& xv = t.value(x);
  check_dim(xv.rows() >= 1, "col_mean: empty input");
  TapeNode n;
  n.op = OpKind::kColMean;
  n.inputs = {x.id};
  n.value = xv.colwise().mean();
  return make_node(t, std::move(n));
}

Var diag(Var x) {
  Tape& t = *x.tape;
  const Matrix& xv = t.value(x);
  check_dim(xv.rows() == xv.cols(), "diag: matrix must be square");
  TapeNode n;
  n.op = OpKind::kDiag;
  n.inputs = {x.id};
  n.value = xv.diagonal();
  return make_node(t, std::move(n));
}

Var add_row(Var x, Var row) {
  check_same_tape(x, row);
  Tape& t = *x.tape;
  const Matrix& xv = t.value(x);
  const Matrix& rv = t.value(row);
  check_dim(rv.rows() == 1 && rv.cols() == xv.cols(), "add_row: row must be 1 x cols(x)");
  TapeNode n;
  n.op = OpKind::kAddRow;
  n.inputs = {x.id, row.id};
  n.value = xv.rowwise() + rv.row(0);
  return make_node(t, std::move(n));
}

Var gather_rows(Var x, std::vector<Index> rows) {
  Tape& t = *x.tape;
  const Matrix& xv = t.value(x);
  for (Index r : rows) {
    check_dim(r >= 0 && r < xv.rows(), "gather_rows: row index out of range");
  }
  TapeNode n;
  n.op = OpKind::kGatherRows;
  n.inputs = {x.id};
  n.value.resize(static_cast<Index>(rows.size()), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    n.value.row(static_cast<Index>(i)) = xv.row(rows[i]);
  }
  n.idx_a = std::move(rows);
  return make_node(t, std::move(n));
}

Var hconcat(const std::vector<Var>& parts) {
  check_contract(!parts.empty(), "hconcat: no inputs");
  if (parts.size() == 1) return parts[0];
  Tape& t = *parts[0].tape;
  Index rows = t.value(parts[0]).rows();
  Index cols = 0;
  for (Var p : parts) {
    check_same_tape(parts[0], p);
    check_dim(t.value(p).rows() == rows, "hconcat: row counts disagree");
    cols += t.value(p).cols();
  }
  TapeNode n;
  n.op = OpKind::kHconcat;
  n.value.resize(rows, cols);
  Index at = 0;
  for (Var p : parts) {
    const Matrix& pv = t.value(p);
    n.value.middleCols(at, pv.cols()) = pv;
    n.idx_a.push_back(at);
    n.inputs.push_back(p.id);
    at += pv.cols();
  }
  return make_node(t, std::move(n));
}

Var segment_softmax(Var scores, std::vector<Index> segment_ids) {
  Tape& t = *scores.tape;
  const Matrix& sv = t.value(scores);
  check_dim(sv.cols() == 1, "segment_softmax: scores must be Ex1");
  check_dim(static_cast<Index>(segment_ids.size()) == sv.rows(),
            "segment_softmax: one segment id per score");
  for (std::size_t i = 1; i < segment_ids.size(); ++i) {
    check_contract(segment_ids[i - 1] <= segment_ids[i],
                   "segment_softmax: segment ids must be non-decreasing");
  }
  TapeNode n;
  n.op = OpKind::kSegmentSoftmax;
  n.inputs = {scores.id};
  n.value.resize(sv.rows(), 1);
  const Index e = sv.rows();
  Index begin = 0;
  while (begin < e) {
    Index end = begin;
    while (end < e && segment_ids[static_cast<std::size_t>(end)] ==
                          segment_ids[static_cast<std::size_t>(begin)]) {
      ++end;
    }
    double mx = sv(begin, 0);
    for (Index i = begin + 1; i < end; ++i) mx = std::max(mx, sv(i, 0));
    double denom = 0.0;
    for (Index i = begin; i < end; ++i) {
      n.value(i, 0) = std::exp(sv(i, 0) - mx);
      denom += n.value(i, 0);
    }
    for (Index i = begin; i < end; ++i) n.value(i, 0) /= denom;
    begin = end;
  }
  n.idx_a = std::move(segment_ids);
  return make_node(t, std::move(n));
}

namespace {

void check_edges(const Matrix& src, const std::vector<Index>& edge_src,
                 const std::vector<Index>& edge_dst, Index num_dst) {
  check_dim(edge_src.size() == edge_dst.size(), "edges: src/dst length mismatch");
  check_contract(num_dst >= 0, "edges: negative destination count");
  Index prev = 0;
  for (std::size_t i = 0; i < edge_src.size(); ++i) {
    check_dim(edge_src[i] >= 0 && edge_src[i] < src.rows(), "edges: source row out of range");
    check_dim(edge_dst[i] >= 0 && edge_dst[i] < num_dst, "edges: destination out of range");
    check_contract(edge_dst[i] >= prev, "edges: destinations must be sorted");
    prev = edge_dst[i];
  }
}

}  // namespace

Var neighbor_mean(Var src, std::vector<Index> edge_src, std::vector<Index> edge_dst,
                  Index num_dst) {
  Tape& t = *src.tape;
  const Matrix& sv = t.value(src);
  check_edges(sv, edge_src, edge_dst, num_dst);
  check_dim(num_dst <= sv.rows(),
            "neighbor_mean: destinations must be a prefix of the source rows");
  TapeNode n;
  n.op = OpKind::kNeighborMean;
  n.inputs = {src.id};
  n.aux = num_dst;
  n.value = Matrix::Zero(num_dst, sv.cols());
  std::vector<Index> deg(static_cast<std::size_t>(num_dst), 0);
  for (std::size_t i = 0; i < edge_src.size(); ++i) {
    n.value.row(edge_dst[i]) += sv.row(edge_src[i]);
    deg[static_cast<std::size_t>(edge_dst[i])] += 1;
  }
  for (Index d = 0; d < num_dst; ++d) {
    const Index k = deg[static_cast<std::size_t>(d)];
    if (k > 0) {
      n.value.row(d) /= static_cast<double>(k);
    } else {
      n.value.row(d) = sv.row(d);  // isolated: keep own embedding
    }
  }
  n.idx_a = std::move(edge_src);
  n.idx_b = std::move(edge_dst);
  return make_node(t, std::move(n));
}

Var edge_weighted_sum(Var weights, Var src, std::vector<Index> edge_src,
                      std::vector<Index> edge_dst, Index num_dst) {
  check_same_tape(weights, src);
  Tape& t = *src.tape;
  const Matrix& wv = t.value(weights);
  const Matrix& sv = t.value(src);
  check_dim(wv.cols() == 1 && wv.rows() == static_cast<Index>(edge_src.size()),
            "edge_weighted_sum: weights must be Ex1");
  check_edges(sv, edge_src, edge_dst, num_dst);
  TapeNode n;
  n.op = OpKind::kEdgeWeightedSum;
  n.inputs = {weights.id, src.id};
  n.aux = num_dst;
  n.value = Matrix::Zero(num_dst, sv.cols());
  for (std::size_t i = 0; i < edge_src.size(); ++i) {
    n.value.row(edge_dst[i]) += wv(static_cast<Index>(i), 0) * sv.row(edge_src[i]);
  }
  n.idx_a = std::move(edge_src);
  n.idx_b = std::move(edge_dst);
  return make_node(t, std::move(n));
}

Var softmax_cross_entropy(Var logits, std::vector<Index> targets) {
  Tape& t = *logits.tape;
  const Matrix& lv = t.value(logits);
  check_dim(static_cast<Index>(targets.size()) == lv.rows(),
            "softmax_cross_entropy: one target per row");
  TapeNode n;
  n.op = OpKind::kSoftmaxXent;
  n.inputs = {logits.id};
  n.saved.resize(lv.rows(), lv.cols());
  double loss = 0.0;
  for (Index i = 0; i < lv.rows(); ++i) {
    const Index y = targets[static_cast<std::size_t>(i)];
    check_dim(y >= 0 && y < lv.cols(), "softmax_cross_entropy: target class out of range");
    const double mx = lv.row(i).maxCoeff();
    double denom = 0.0;
    for (Index c = 0; c < lv.cols(); ++c) {
      n.saved(i, c) = std::exp(lv(i, c) - mx);
      denom += n.saved(i, c);
    }
    n.saved.row(i) /= denom;
    loss -= std::log(std::max(n.saved(i, y), 1e-300));
  }
  n.value = Matrix::Constant(1, 1, loss / static_cast<double>(lv.rows()));
  n.idx_a = std::move(targets);
  return make_node(t, std::move(n));
}

Var binary_cross_entropy_logits(Var logits, Matrix targets) {
  Tape& t = *logits.tape;
  const Matrix& lv = t.value(logits);
  check_dim(lv.rows() == targets.rows() && lv.cols() == targets.cols(),
            "binary_cross_entropy_logits: shape mismatch");
  TapeNode n;
  n.op = OpKind::kBceLogits;
  n.inputs = {logits.id};
  double loss = 0.0;
  for (Index i = 0; i < lv.rows(); ++i) {
    for (Index c = 0; c < lv.cols(); ++c) {
      const double z = lv(i, c);
      // softplus(z) - z*y, written stably
      loss += std::max(z, 0.0) - z * targets(i, c) + std::log1p(std::exp(-std::abs(z)));
    }
  }
  n.value = Matrix::Constant(1, 1, loss / static_cast<double>(lv.size()));
  n.saved = std::move(targets);
  return make_node(t, std::move(n));
}

Var covariance_matrix(Var u) {
  Tape& t = *u.tape;
  // value references dangle once new nodes are pushed; copy what we need
  const Index n_rows = t.value(u).rows();
  if (n_rows < 2) {
    throw DegenerateInputError("covariance_matrix: needs at least 2 rows");
  }
  Var mean = col_mean(u);
  Var centered = add_row(u, mul_scalar(mean, -1.0));
  Var c = mul_scalar(matmul(transpose(centered), centered), 1.0 / static_cast<double>(n_rows));
  return mul_scalar(add(c, transpose(c)), 0.5);
}

Var mse_rows(Var a, Var b) {
  Tape& t = *a.tape;
  const Index n_rows = t.value(a).rows();
  check_dim(n_rows == t.value(b).rows() && t.value(a).cols() == t.value(b).cols(),
            "mse_rows: shape mismatch");
  return mul_scalar(sum(square(sub(a, b))), 1.0 / static_cast<double>(n_rows));
}

// ---- backward ---------------------------------------------------------------

void Tape::backward(Var loss) {
  check_contract(loss.tape == this, "backward: loss from another tape");
  check_contract(!backward_done_, "backward: tape already consumed; rebuild the forward pass");
  check_contract(is_scalar_shape(node(loss.id).value), "backward: loss must be scalar");

  // Mark ancestors of the loss so the reverse sweep skips unrelated nodes.
  std::vector<bool> reachable(nodes_.size(), false);
  reachable[static_cast<std::size_t>(loss.id)] = true;
  for (int id = loss.id; id >= 0; --id) {
    if (!reachable[static_cast<std::size_t>(id)]) continue;
    for (int in : node(id).inputs) reachable[static_cast<std::size_t>(in)] = true;
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (reachable[i]) {
      nodes_[i].grad = Matrix::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
  }
  node(loss.id).grad(0, 0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    if (reachable[static_cast<std::size_t>(id)]) backward_step(id);
  }

  for (auto& [p, id] : param_nodes_) {
    p->tensor.ensure_grad();
    if (reachable[static_cast<std::size_t>(id)]) {
      p->tensor.grad += node(id).grad;
    }
    p->grad_accumulated = true;
  }
  backward_done_ = true;
}

void Tape::backward_step(int id) {
  TapeNode& n = node(id);
  const Matrix& g = n.grad;
  auto in = [&](int k) -> TapeNode& { return node(n.inputs[static_cast<std::size_t>(k)]); };

  switch (n.op) {
    case OpKind::kLeaf:
    case OpKind::kParam:
      break;
    case OpKind::kMatmul:
      in(0).grad.noalias() += g * in(1).value.transpose();
      in(1).grad.noalias() += in(0).value.transpose() * g;
      break;
    case OpKind::kTranspose:
      in(0).grad += g.transpose();
      break;
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      TapeNode& a = in(0);
      TapeNode& b = in(1);
      auto accum = [&](TapeNode& dst, const Matrix& piece) {
        if (dst.value.rows() == piece.rows() && dst.value.cols() == piece.cols()) {
          dst.grad += piece;
        } else {
          dst.grad(0, 0) += piece.sum();  // 1x1 broadcast operand
        }
      };
      if (n.op == OpKind::kAdd) {
        accum(a, g);
        accum(b, g);
      } else if (n.op == OpKind::kSub) {
        accum(a, g);
        accum(b, -g);
      } else {
        const bool a_scalar = is_scalar_shape(a.value) && !is_scalar_shape(b.value);
        const bool b_scalar = is_scalar_shape(b.value) && !is_scalar_shape(a.value);
        if (a_scalar) {
          a.grad(0, 0) += g.cwiseProduct(b.value).sum();
          b.grad += g * a.value(0, 0);
        } else if (b_scalar) {
          a.grad += g * b.value(0, 0);
          b.grad(0, 0) += g.cwiseProduct(a.value).sum();
        } else {
          a.grad += g.cwiseProduct(b.value);
          b.grad += g.cwiseProduct(a.value);
        }
      }
      break;
    }
    case OpKind::kAddScalar:
      in(0).grad += g;
      break;
    case OpKind::kMulScalar:
      in(0).grad += g * n.scalar;
      break;
    case OpKind::kElu: {
      const Matrix& x = in(0).value;
      in(0).grad.array() +=
          g.array() * x.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : std::exp(v); }).array();
      break;
    }
    case OpKind::kLeakyRelu: {
      const Matrix& x = in(0).value;
      const double a = n.scalar;
      in(0).grad.array() +=
          g.array() * x.unaryExpr([a](double v) { return v >= 0.0 ? 1.0 : a; }).array();
      break;
    }
    case OpKind::kExp:
      in(0).grad.array() += g.array() * n.value.array();
      break;
    case OpKind::kLog:
      in(0).grad.array() += g.array() / in(0).value.array();
      break;
    case OpKind::kSquare:
      in(0).grad.array() += 2.0 * g.array() * in(0).value.array();
      break;
    case OpKind::kSum:
      in(0).grad.array() += g(0, 0);
      break;
    case OpKind::kColMean:
      in(0).grad.rowwise() += (g / static_cast<double>(in(0).value.rows())).row(0);
      break;
    case OpKind::kDiag:
      for (Index i = 0; i < g.rows(); ++i) in(0).grad(i, i) += g(i, 0);
      break;
    case OpKind::kAddRow:
      in(0).grad += g;
      in(1).grad.row(0) += g.colwise().sum();
      break;
    case OpKind::kGatherRows:
      for (std::size_t i = 0; i < n.idx_a.size(); ++i) {
        in(0).grad.row(n.idx_a[i]) += g.row(static_cast<Index>(i));
      }
      break;
    case OpKind::kHconcat:
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        TapeNode& part = in(static_cast<int>(k));
        part.grad += g.middleCols(n.idx_a[k], part.value.cols());
      }
      break;
    case OpKind::kSegmentSoftmax: {
      const Matrix& p = n.value;
      const Index e = p.rows();
      Index begin = 0;
      while (begin < e) {
        Index end = begin;
        while (end < e && n.idx_a[static_cast<std::size_t>(end)] ==
                              n.idx_a[static_cast<std::size_t>(begin)]) {
          ++end;
        }
        double dot = 0.0;
        for (Index i = begin; i < end; ++i) dot += p(i, 0) * g(i, 0);
        for (Index i = begin; i < end; ++i) {
          in(0).grad(i, 0) += p(i, 0) * (g(i, 0) - dot);
        }
        begin = end;
      }
      break;
    }
    case OpKind::kNeighborMean: {
      std::vector<Index> deg(static_cast<std::size_t>(n.aux), 0);
      for (Index d : n.idx_b) deg[static_cast<std::size_t>(d)] += 1;
      for (std::size_t i = 0; i < n.idx_a.size(); ++i) {
        const Index d = n.idx_b[i];
        in(0).grad.row(n.idx_a[i]) +=
            g.row(d) / static_cast<double>(deg[static_cast<std::size_t>(d)]);
      }
      for (Index d = 0; d < n.aux; ++d) {
        if (deg[static_cast<std::size_t>(d)] == 0) in(0).grad.row(d) += g.row(d);
      }
      break;
    }
    case OpKind::kEdgeWeightedSum: {
      const Matrix& w = in(0).value;
      const Matrix& s = in(1).value;
      for (std::size_t i = 0; i < n.idx_a.size(); ++i) {
        const Index e = static_cast<Index>(i);
        in(0).grad(e, 0) += g.row(n.idx_b[i]).dot(s.row(n.idx_a[i]));
        in(1).grad.row(n.idx_a[i]) += w(e, 0) * g.row(n.idx_b[i]);
      }
      break;
    }
    case OpKind::kSoftmaxXent: {
      const double scale = g(0, 0) / static_cast<double>(n.saved.rows());
      in(0).grad += scale * n.saved;
      for (Index i = 0; i < n.saved.rows(); ++i) {
        in(0).grad(i, n.idx_a[static_cast<std::size_t>(i)]) -= scale;
      }
      break;
    }
    case OpKind::kBceLogits: {
      const double scale = g(0, 0) / static_cast<double>(n.saved.size());
      const Matrix& z = in(0).value;
      in(0).grad.array() +=
          scale * (z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }).array() -
                   n.saved.array());
      break;
    }
  }
}

}  // namespace rgi
