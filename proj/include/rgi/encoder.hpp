#pragma once

#include <string>
#include <vector>

#include "rgi/autodiff.hpp"
#include "rgi/checkpoint.hpp"
#include "rgi/graph.hpp"
#include "rgi/sampling.hpp"

namespace rgi {

struct EncoderConfig {
  int num_layers = 2;
  Index width = 512;
  int heads = 4;
  Index input_dim = 0;
  double leaky_slope = 0.2;

  void validate() const {
    check_contract(num_layers >= 1, "encoder: need at least one layer");
    check_contract(heads >= 1 && width >= heads, "encoder: width must be >= heads");
    check_contract(width % heads == 0, "encoder: width must be divisible by heads");
    check_contract(input_dim >= 1, "encoder: input_dim not set");
  }
};

// One attention layer. Each head projects source and destination features to
// width/heads dims and scores edges additively; head outputs are
// concatenated, then summed with a linear skip projection of the destination
// features and a bias, and passed through ELU.
struct GatLayerParams {
  std::vector<Parameter> w_src;  // per head, d_in x (D/heads)
  std::vector<Parameter> w_dst;
  std::vector<Parameter> a_src;  // per head, (D/heads) x 1
  std::vector<Parameter> a_dst;
  Parameter w_skip;  // d_in x D
  Parameter bias;    // 1 x D
  double leaky_slope = 0.2;

  Index in_dim() const { return w_skip.values().rows(); }
  Index out_dim() const { return w_skip.values().cols(); }
  int heads() const { return static_cast<int>(w_src.size()); }

  std::vector<Parameter*> parameters();
  void append_named(NamedMatrices& out, const std::string& prefix) const;
  void load_named(const NamedMatrices& in, const std::string& prefix);
};

GatLayerParams init_gat_layer(Index d_in, Index d_out, int heads, double leaky_slope,
                              RandomStream& rng);

// Forward over one sampled block. x_src rows follow block.src_nodes; the
// result has one row per block destination. Destinations without sampled
// in-edges take only the skip + bias path.
Var gat_layer_forward(Tape& tape, GatLayerParams& params, Var x_src,
                      const SampledBlock& block);

// Chains one layer per block, input-most first.
Var encoder_forward(Tape& tape, std::vector<GatLayerParams>& layers,
                    const std::vector<SampledBlock>& blocks, const Matrix& x_input_src);

// Whole-graph single-layer inference with full neighborhoods; gradient-free.
Matrix full_graph_layer_inference(const GatLayerParams& params, const Graph& g,
                                  const Matrix& x);

struct Encoder {
  EncoderConfig cfg;
  std::vector<GatLayerParams> layers;

  std::vector<Parameter*> parameters();
  NamedMatrices named_parameters() const;
};

// Fresh encoder with per-layer derived init streams. Layer l maps
// (l == 0 ? input_dim : width) to width.
Encoder init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

// Full-fanout block covering every node of the graph (dst == src == all).
SampledBlock full_graph_block(const Graph& g);

}  // namespace rgi
