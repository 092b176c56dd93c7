#include "rgi/lrgi.hpp"

namespace rgi {

namespace {

Matrix gather_feature_rows(const Matrix& all, const std::vector<NodeId>& ids) {
  Matrix out(static_cast<Index>(ids.size()), all.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Index>(i)) = all.row(ids[i]);
  }
  return out;
}

}  // namespace

LayerwiseResult train_layerwise(const EncoderConfig& enc_cfg, const Graph& g,
                                const TrainConfig& cfg,
                                std::vector<BatchFootprint>* footprints) {
  enc_cfg.validate();
  cfg.validate();
  check_dim(g.features.cols() == enc_cfg.input_dim,
            "train_layerwise: graph feature width must match encoder input_dim");

  LayerwiseResult result;
  result.encoder.cfg = enc_cfg;
  result.cache.layers.push_back(g.features);

  for (int l = 0; l < enc_cfg.num_layers; ++l) {
    const auto lu = static_cast<std::uint64_t>(l);
    const Index d_in = l == 0 ? enc_cfg.input_dim : enc_cfg.width;
    RandomStream layer_rng(derive_seed(cfg.seed, "layer-init", lu));
    result.encoder.layers.push_back(
        init_gat_layer(d_in, enc_cfg.width, enc_cfg.heads, enc_cfg.leaky_slope, layer_rng));
    GatLayerParams& layer = result.encoder.layers.back();

    RandomStream phi_rng(derive_seed(cfg.seed, "phi-init", lu));
    RandomStream psi_rng(derive_seed(cfg.seed, "psi-init", lu));
    ReconstructionHead phi = init_reconstruction_head(enc_cfg.width, phi_rng);
    ReconstructionHead psi = init_reconstruction_head(enc_cfg.width, psi_rng);

    const Matrix& inputs = result.cache.layers.back();
    LayerForward embed = [&](Tape& tape, const RgiBatch& batch) {
      Var x = tape.leaf(gather_feature_rows(inputs, batch.conv_blocks[0].src_nodes));
      return gat_layer_forward(tape, layer, x, batch.conv_blocks[0]);
    };

    std::vector<Parameter*> trainable = layer.parameters();
    for (Parameter* p : phi.parameters()) trainable.push_back(p);
    for (Parameter* p : psi.parameters()) trainable.push_back(p);

    result.history.push_back(train_rgi_module(embed, g, /*num_conv_layers=*/1, phi, psi,
                                              trainable, cfg, derive_seed(cfg.seed, "module", lu),
                                              footprints));
    // heads are dropped here; only the layer weights survive
    result.cache.layers.push_back(full_graph_layer_inference(layer, g, inputs));
  }
  return result;
}

E2eResult train_rgi_e2e(const EncoderConfig& enc_cfg, const Graph& g, const TrainConfig& cfg,
                        std::vector<BatchFootprint>* footprints) {
  enc_cfg.validate();
  cfg.validate();
  check_dim(g.features.cols() == enc_cfg.input_dim,
            "train_rgi_e2e: graph feature width must match encoder input_dim");

  E2eResult result;
  result.encoder.cfg = enc_cfg;
  for (int l = 0; l < enc_cfg.num_layers; ++l) {
    const Index d_in = l == 0 ? enc_cfg.input_dim : enc_cfg.width;
    RandomStream layer_rng(derive_seed(cfg.seed, "layer-init", static_cast<std::uint64_t>(l)));
    result.encoder.layers.push_back(
        init_gat_layer(d_in, enc_cfg.width, enc_cfg.heads, enc_cfg.leaky_slope, layer_rng));
  }
  RandomStream phi_rng(derive_seed(cfg.seed, "phi-init", 0));
  RandomStream psi_rng(derive_seed(cfg.seed, "psi-init", 0));
  ReconstructionHead phi = init_reconstruction_head(enc_cfg.width, phi_rng);
  ReconstructionHead psi = init_reconstruction_head(enc_cfg.width, psi_rng);

  LayerForward embed = [&](Tape& tape, const RgiBatch& batch) {
    Matrix x = gather_feature_rows(g.features, batch.conv_blocks[0].src_nodes);
    return encoder_forward(tape, result.encoder.layers, batch.conv_blocks, x);
  };

  std::vector<Parameter*> trainable = result.encoder.parameters();
  for (Parameter* p : phi.parameters()) trainable.push_back(p);
  for (Parameter* p : psi.parameters()) trainable.push_back(p);

  result.history = train_rgi_module(embed, g, enc_cfg.num_layers, phi, psi, trainable, cfg,
                                    derive_seed(cfg.seed, "module", 0), footprints);
  return result;
}

Matrix embed_nodes(const Encoder& encoder, const Graph& g, EmbedMode mode, std::int64_t fanout,
                   std::uint64_t seed) {
  check_contract(!encoder.layers.empty(), "embed_nodes: encoder has no layers");
  check_dim(g.features.cols() == encoder.layers.front().in_dim(),
            "embed_nodes: feature width differs from the trained input width");

  if (mode == EmbedMode::kFullGraph) {
    Matrix x = g.features;
    for (const GatLayerParams& layer : encoder.layers) {
      x = full_graph_layer_inference(layer, g, x);
    }
    return x;
  }

  // Sampled inference: chunked targets, one L-layer sampled chain per chunk.
  RandomStream rng(derive_seed(seed, "embed-sampling"));
  const Index n = g.num_nodes();
  Matrix out(n, encoder.layers.back().out_dim());
  const Index chunk = 1024;
  auto& layers = const_cast<std::vector<GatLayerParams>&>(encoder.layers);
  for (Index at = 0; at < n; at += chunk) {
    const Index take = std::min(chunk, n - at);
    std::vector<NodeId> targets(static_cast<std::size_t>(take));
    for (Index i = 0; i < take; ++i) targets[static_cast<std::size_t>(i)] = at + i;
    E2EBatch batch =
        build_e2e_batch(g, targets, static_cast<int>(layers.size()), fanout, rng);
    Tape tape;
    Var res = encoder_forward(tape, layers, batch.blocks,
                              gather_feature_rows(g.features, batch.blocks[0].src_nodes));
    out.middleRows(at, take) = tape.value(res);
  }
  return out;
}

}  // namespace rgi
