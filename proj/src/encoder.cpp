#include "rgi/encoder.hpp"

#include <cmath>

namespace rgi {

namespace {

Matrix xavier_uniform(Index rows, Index cols, RandomStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
    }
  }
  return m;
}

}  // namespace

GatLayerParams init_gat_layer(Index d_in, Index d_out, int heads, double leaky_slope,
                              RandomStream& rng) {
  check_contract(heads >= 1 && d_out % heads == 0, "gat layer: width must divide into heads");
  const Index dh = d_out / heads;
  GatLayerParams p;
  p.leaky_slope = leaky_slope;
  for (int h = 0; h < heads; ++h) {
    p.w_src.emplace_back(xavier_uniform(d_in, dh, rng));
    p.w_dst.emplace_back(xavier_uniform(d_in, dh, rng));
    p.a_src.emplace_back(xavier_uniform(dh, 1, rng));
    p.a_dst.emplace_back(xavier_uniform(dh, 1, rng));
  }
  p.w_skip = Parameter(xavier_uniform(d_in, d_out, rng));
  p.bias = Parameter(Matrix::Zero(1, d_out));
  return p;
}

std::vector<Parameter*> GatLayerParams::parameters() {
  std::vector<Parameter*> out;
  for (int h = 0; h < heads(); ++h) {
    out.push_back(&w_src[static_cast<std::size_t>(h)]);
    out.push_back(&w_dst[static_cast<std::size_t>(h)]);
    out.push_back(&a_src[static_cast<std::size_t>(h)]);
    out.push_back(&a_dst[static_cast<std::size_t>(h)]);
  }
  out.push_back(&w_skip);
  out.push_back(&bias);
  return out;
}

void GatLayerParams::append_named(NamedMatrices& out, const std::string& prefix) const {
  for (int h = 0; h < heads(); ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    out.emplace_back(hp + ".w_src", w_src[static_cast<std::size_t>(h)].values());
    out.emplace_back(hp + ".w_dst", w_dst[static_cast<std::size_t>(h)].values());
    out.emplace_back(hp + ".a_src", a_src[static_cast<std::size_t>(h)].values());
    out.emplace_back(hp + ".a_dst", a_dst[static_cast<std::size_t>(h)].values());
  }
  out.emplace_back(prefix + ".w_skip", w_skip.values());
  out.emplace_back(prefix + ".bias", bias.values());
}

void GatLayerParams::load_named(const NamedMatrices& in, const std::string& prefix) {
  auto find = [&](const std::string& name) -> const Matrix& {
    for (const auto& [n, m] : in) {
      if (n == name) return m;
    }
    throw IngestionError("checkpoint is missing parameter " + name);
  };
  for (int h = 0; h < heads(); ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    w_src[static_cast<std::size_t>(h)].values() = find(hp + ".w_src");
    w_dst[static_cast<std::size_t>(h)].values() = find(hp + ".w_dst");
    a_src[static_cast<std::size_t>(h)].values() = find(hp + ".a_src");
    a_dst[static_cast<std::size_t>(h)].values() = find(hp + ".a_dst");
  }
  w_skip.values() = find(prefix + ".w_skip");
  bias.values() = find(prefix + ".bias");
}

Var gat_layer_forward(Tape& tape, GatLayerParams& p, Var x_src, const SampledBlock& block) {
  check_dim(tape.value(x_src).rows() == block.num_src(),
            "gat_layer_forward: feature rows must match block sources");
  check_dim(tape.value(x_src).cols() == p.in_dim(),
            "gat_layer_forward: feature width must match layer input dim");

  const Index n_dst = block.num_dst();
  std::vector<Index> dst_rows(static_cast<std::size_t>(n_dst));
  for (Index i = 0; i < n_dst; ++i) dst_rows[static_cast<std::size_t>(i)] = i;
  Var x_dst = gather_rows(x_src, std::vector<Index>(dst_rows));

  std::vector<Var> head_out;
  head_out.reserve(static_cast<std::size_t>(p.heads()));
  for (int h = 0; h < p.heads(); ++h) {
    const auto hh = static_cast<std::size_t>(h);
    Var proj_src = matmul(x_src, tape.param(p.w_src[hh]));
    Var proj_dst = matmul(x_dst, tape.param(p.w_dst[hh]));
    Var score_src = matmul(proj_src, tape.param(p.a_src[hh]));
    Var score_dst = matmul(proj_dst, tape.param(p.a_dst[hh]));
    Var edge_score =
        add(gather_rows(score_src, std::vector<Index>(block.edge_src)),
            gather_rows(score_dst, std::vector<Index>(block.edge_dst)));
    Var attention = segment_softmax(leaky_relu(edge_score, p.leaky_slope),
                                    std::vector<Index>(block.edge_dst));
    head_out.push_back(edge_weighted_sum(attention, proj_src,
                                         std::vector<Index>(block.edge_src),
                                         std::vector<Index>(block.edge_dst), n_dst));
  }
  Var messages = hconcat(head_out);
  Var skip = matmul(x_dst, tape.param(p.w_skip));
  return elu(add_row(add(messages, skip), tape.param(p.bias)));
}

Var encoder_forward(Tape& tape, std::vector<GatLayerParams>& layers,
                    const std::vector<SampledBlock>& blocks, const Matrix& x_input_src) {
  check_contract(layers.size() == blocks.size(),
                 "encoder_forward: one block per layer required");
  Var x = tape.leaf(x_input_src);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    x = gat_layer_forward(tape, layers[l], x, blocks[l]);
  }
  return x;
}

SampledBlock full_graph_block(const Graph& g) {
  SampledBlock blk;
  const Index n = g.num_nodes();
  blk.dst_nodes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) blk.dst_nodes[static_cast<std::size_t>(i)] = i;
  blk.src_nodes = blk.dst_nodes;
  blk.edge_src.reserve(static_cast<std::size_t>(g.num_edges()));
  blk.edge_dst.reserve(static_cast<std::size_t>(g.num_edges()));
  blk.dst_degrees.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) {
      blk.edge_src.push_back(j);
      blk.edge_dst.push_back(i);
    }
    blk.dst_degrees[static_cast<std::size_t>(i)] = g.degree(i);
  }
  return blk;
}

Matrix full_graph_layer_inference(const GatLayerParams& params, const Graph& g,
                                  const Matrix& x) {
  check_dim(x.rows() == g.num_nodes(), "full_graph_layer_inference: row count mismatch");
  Tape tape;
  // gradient-free: the tape is dropped without a backward pass
  auto& p = const_cast<GatLayerParams&>(params);
  Var out = gat_layer_forward(tape, p, tape.leaf(x), full_graph_block(g));
  return tape.value(out);
}

std::vector<Parameter*> Encoder::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers) {
    for (Parameter* p : layer.parameters()) out.push_back(p);
  }
  return out;
}

NamedMatrices Encoder::named_parameters() const {
  NamedMatrices out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].append_named(out, "layer" + std::to_string(l));
  }
  return out;
}

Encoder init_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Encoder enc;
  enc.cfg = cfg;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const Index d_in = l == 0 ? cfg.input_dim : cfg.width;
    RandomStream rng(derive_seed(seed, "layer-init", static_cast<std::uint64_t>(l)));
    enc.layers.push_back(init_gat_layer(d_in, cfg.width, cfg.heads, cfg.leaky_slope, rng));
  }
  return enc;
}

}  // namespace rgi
