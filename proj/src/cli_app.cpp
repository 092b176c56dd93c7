#include "rgi/cli_app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rgi/dataset_io.hpp"
#include "rgi/eval.hpp"
#include "rgi/lrgi.hpp"
#include "rgi/metrics_io.hpp"
#include "rgi/sbm.hpp"

namespace rgi {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct DatasetFlags {
  std::string edges, features, labels, splits;

  void attach(CLI::App* cmd) {
    cmd->add_option("--edges", edges, "edge list file, one 'src dst' pair per line")->required();
    cmd->add_option("--features", features, "feature matrix file, one row per node")->required();
    cmd->add_option("--labels", labels, "labels file: one class id or one 0/1 row per node")
        ->required();
    cmd->add_option("--splits", splits, "split file, one of train/val/test per node")->required();
  }
  DatasetPaths paths() const { return {edges, features, labels, splits}; }
};

struct TrainFlags {
  std::string mode = "lrgi";
  int layers = 2;
  Index width = 32;
  int heads = 4;
  double leaky_slope = 0.2;
  TrainConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "training mode")
        ->check(CLI::IsMember({"lrgi", "rgi_e2e"}))
        ->capture_default_str();
    cmd->add_option("--layers", layers, "encoder depth")->capture_default_str();
    cmd->add_option("--width", width, "embedding width")->capture_default_str();
    cmd->add_option("--heads", heads, "attention heads per layer")->capture_default_str();
    cmd->add_option("--leaky-slope", leaky_slope, "negative slope of the attention LeakyReLU")
        ->capture_default_str();
    cmd->add_option("--epochs", cfg.epochs, "training epochs per module")->capture_default_str();
    cmd->add_option("--batch-size", cfg.batch_size, "target nodes per batch")
        ->capture_default_str();
    cmd->add_option("--fanout", cfg.fanout_conv, "sampled in-edges per layer, -1 for full")
        ->capture_default_str();
    cmd->add_option("--prop-fanout", cfg.fanout_prop,
                    "sampled neighbors for the propagated view, -1 for full")
        ->capture_default_str();
    cmd->add_option("--prop-steps", cfg.prop_steps, "propagation hops for the global view")
        ->capture_default_str();
    cmd->add_option("--lr", cfg.adam.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--weight-decay", cfg.adam.weight_decay, "decoupled weight decay")
        ->capture_default_str();
    cmd->add_option("--lambda-rec", cfg.loss.rec, "reconstruction weight")
        ->capture_default_str();
    cmd->add_option("--lambda-var", cfg.loss.var, "variance weight")->capture_default_str();
    cmd->add_option("--lambda-cov", cfg.loss.cov, "covariance weight")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  }
};

json encoder_json(const EncoderConfig& cfg) {
  return json{{"num_layers", cfg.num_layers},
              {"width", cfg.width},
              {"heads", cfg.heads},
              {"input_dim", cfg.input_dim},
              {"leaky_slope", cfg.leaky_slope}};
}

json train_json(const TrainConfig& cfg) {
  return json{{"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"fanout_conv", cfg.fanout_conv},
              {"fanout_prop", cfg.fanout_prop},
              {"prop_steps", cfg.prop_steps},
              {"seed", cfg.seed},
              {"learning_rate", cfg.adam.learning_rate},
              {"weight_decay", cfg.adam.weight_decay},
              {"lambda_rec", cfg.loss.rec},
              {"lambda_var", cfg.loss.var},
              {"lambda_cov", cfg.loss.cov}};
}

Encoder load_encoder(const std::string& model_dir) {
  const fs::path dir(model_dir);
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IngestionError("cannot open manifest: " + (dir / "manifest.json").string());
  json manifest = json::parse(in, nullptr, /*allow_exceptions=*/true);

  EncoderConfig cfg;
  cfg.num_layers = manifest.at("encoder").at("num_layers").get<int>();
  cfg.width = manifest.at("encoder").at("width").get<Index>();
  cfg.heads = manifest.at("encoder").at("heads").get<int>();
  cfg.input_dim = manifest.at("encoder").at("input_dim").get<Index>();
  cfg.leaky_slope = manifest.at("encoder").at("leaky_slope").get<double>();
  Encoder enc = init_encoder(cfg, 0);
  const auto files = manifest.at("checkpoints").get<std::vector<std::string>>();
  check_contract(static_cast<int>(files.size()) == cfg.num_layers,
                 "manifest: checkpoint count does not match num_layers");
  for (int l = 0; l < cfg.num_layers; ++l) {
    NamedMatrices named = load_parameters((dir / files[static_cast<std::size_t>(l)]).string());
    enc.layers[static_cast<std::size_t>(l)].load_named(named,
                                                       "layer" + std::to_string(l));
  }
  return enc;
}

int cmd_gen(const SbmConfig& cfg, const std::string& out_dir) {
  Graph g = generate_sbm(cfg);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  DatasetPaths paths{(dir / "edges.txt").string(), (dir / "features.txt").string(),
                     (dir / "labels.txt").string(), (dir / "splits.txt").string()};
  write_dataset(paths, g);
  std::cout << "gen: " << g.num_nodes() << " nodes, " << g.num_edges() / 2
            << " undirected edges, " << cfg.num_blocks << " blocks -> " << out_dir << "\n";
  return 0;
}

int cmd_train(const DatasetFlags& data, const TrainFlags& flags, const std::string& out_dir) {
  Graph full = read_dataset(data.paths());
  std::vector<NodeId> train_nodes = full.mask_nodes(full.train_mask);
  check_contract(!train_nodes.empty(), "train: dataset has no training nodes");
  auto [g_train, old_ids] = induced_subgraph(full, train_nodes);

  EncoderConfig enc_cfg;
  enc_cfg.num_layers = flags.layers;
  enc_cfg.width = flags.width;
  enc_cfg.heads = flags.heads;
  enc_cfg.leaky_slope = flags.leaky_slope;
  enc_cfg.input_dim = full.features.cols();
  enc_cfg.validate();
  flags.cfg.validate();

  // nothing is written until the dataset and config have validated
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  json manifest;
  manifest["mode"] = flags.mode;
  manifest["encoder"] = encoder_json(enc_cfg);
  manifest["train"] = train_json(flags.cfg);
  manifest["dataset"] =
      json{{"edges", data.edges}, {"features", data.features}, {"labels", data.labels},
           {"splits", data.splits}};
  std::vector<std::string> ckpt_files, metric_files;

  Encoder* encoder = nullptr;
  LayerwiseResult lw;
  E2eResult e2e;
  if (flags.mode == "lrgi") {
    lw = train_layerwise(enc_cfg, g_train, flags.cfg);
    encoder = &lw.encoder;
    for (int l = 0; l < flags.layers; ++l) {
      metric_files.push_back("metrics_layer" + std::to_string(l) + ".csv");
      write_loss_csv((dir / metric_files.back()).string(),
                     lw.history[static_cast<std::size_t>(l)]);
    }
  } else {
    e2e = train_rgi_e2e(enc_cfg, g_train, flags.cfg);
    encoder = &e2e.encoder;
    metric_files.push_back("metrics.csv");
    write_loss_csv((dir / metric_files.back()).string(), e2e.history);
  }

  for (int l = 0; l < flags.layers; ++l) {
    NamedMatrices named;
    encoder->layers[static_cast<std::size_t>(l)].append_named(named,
                                                              "layer" + std::to_string(l));
    ckpt_files.push_back("layer" + std::to_string(l) + ".ckpt");
    save_parameters((dir / ckpt_files.back()).string(), named);
  }
  manifest["checkpoints"] = ckpt_files;
  manifest["metrics"] = metric_files;
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }

  if (flags.mode == "lrgi") {
    for (int l = 0; l < flags.layers; ++l) {
      const auto& h = lw.history[static_cast<std::size_t>(l)];
      std::cout << "train[lrgi] layer " << l << ": final total loss "
                << (h.empty() ? 0.0 : h.back().total) << "\n";
    }
  } else {
    std::cout << "train[rgi_e2e]: final total loss "
              << (e2e.history.empty() ? 0.0 : e2e.history.back().total) << "\n";
  }
  std::cout << "train: checkpoints and metrics -> " << out_dir << "\n";
  return 0;
}

int cmd_embed(const DatasetFlags& data, const std::string& model_dir, const std::string& out_file,
              bool sampled, std::int64_t fanout, std::uint64_t seed) {
  Graph g = read_dataset(data.paths());
  Encoder enc = load_encoder(model_dir);
  Matrix z = embed_nodes(enc, g, sampled ? EmbedMode::kSampled : EmbedMode::kFullGraph, fanout,
                         seed);
  write_matrix_file(out_file, z);
  std::cout << "embed: " << z.rows() << " x " << z.cols() << " embeddings -> " << out_file
            << "\n";
  return 0;
}

int cmd_probe(const DatasetFlags& data, const std::string& model_dir, bool raw,
              const std::string& out_file, const ProbeConfig& cfg) {
  Graph full = read_dataset(data.paths());
  std::vector<NodeId> train_nodes = full.mask_nodes(full.train_mask);
  std::vector<NodeId> val_nodes = full.mask_nodes(full.val_mask);
  std::vector<NodeId> test_nodes = full.mask_nodes(full.test_mask);
  check_contract(!train_nodes.empty(), "probe: dataset has no training nodes");

  Matrix z_train, z_full;
  if (raw) {
    z_full = full.features;
  } else {
    Encoder enc = load_encoder(model_dir);
    // inductive protocol: training rows come from the training subgraph,
    // val/test rows from inference over the entire graph
    auto [g_train, old_ids] = induced_subgraph(full, train_nodes);
    z_train = embed_nodes(enc, g_train);
    z_full = embed_nodes(enc, full);
  }
  auto rows_of = [&](const std::vector<NodeId>& ids) {
    Matrix out(static_cast<Index>(ids.size()), z_full.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out.row(static_cast<Index>(i)) = z_full.row(ids[i]);
    }
    return out;
  };
  if (raw) z_train = rows_of(train_nodes);

  const ProbeTask task =
      full.labels.multilabel() ? ProbeTask::kMultilabel : ProbeTask::kMulticlass;
  ProbeResult res = linear_probe(z_train, labels_subset(full.labels, train_nodes),
                                 rows_of(val_nodes), labels_subset(full.labels, val_nodes),
                                 rows_of(test_nodes), labels_subset(full.labels, test_nodes),
                                 task, cfg);
  write_probe_json(out_file, res);
  std::cout << "probe[" << (raw ? "raw" : "model") << "] " << res.metric << ": train "
            << res.train_score << ", val " << res.val_score << ", test " << res.test_score
            << " -> " << out_file << "\n";
  return 0;
}

int cmd_mad(const DatasetFlags& data, const std::string& model_dir,
            const std::string& out_file) {
  Graph g = read_dataset(data.paths());
  Encoder enc = load_encoder(model_dir);
  MadReport report = mad_per_layer(enc, g);
  write_mad_csv(out_file, report.per_layer);
  std::cout << "mad:";
  for (double v : report.per_layer) std::cout << " " << v;
  std::cout << " -> " << out_file << "\n";
  return 0;
}

int cmd_bench(const DatasetFlags& data, int layers, Index batch_size, std::int64_t fanout_conv,
              std::int64_t fanout_prop, int prop_steps, int batches, std::uint64_t seed,
              const std::string& out_file) {
  check_contract(layers >= 1 && batches >= 1, "bench: layers and batches must be positive");
  Graph g = read_dataset(data.paths());
  check_contract(g.num_nodes() >= batch_size, "bench: batch size exceeds graph size");

  auto run_mode = [&](const std::string& mode) {
    RandomStream target_rng(derive_seed(seed, "bench-targets-" + mode));
    RandomStream sample_rng(derive_seed(seed, "bench-sampling-" + mode));
    std::vector<NodeId> pool(static_cast<std::size_t>(g.num_nodes()));
    for (Index i = 0; i < g.num_nodes(); ++i) pool[static_cast<std::size_t>(i)] = i;
    std::size_t at = pool.size();  // force an initial shuffle
    BenchRow row;
    row.mode = mode;
    row.layers = layers;
    row.batch_size = batch_size;
    row.fanout_conv = fanout_conv;
    row.fanout_prop = fanout_prop;
    row.batches = batches;
    for (int b = 0; b < batches; ++b) {
      if (at + static_cast<std::size_t>(batch_size) > pool.size()) {
        target_rng.shuffle(pool);
        at = 0;
      }
      std::span<const NodeId> targets(pool.data() + at, static_cast<std::size_t>(batch_size));
      at += static_cast<std::size_t>(batch_size);
      BatchFootprint fp;
      if (mode == "e2e") {
        E2EBatch batch = build_e2e_batch(g, targets, layers, fanout_conv, sample_rng);
        for (const auto& blk : batch.blocks) {
          fp.nodes += blk.num_src();
          fp.edges += blk.num_edges();
        }
      } else {
        RgiBatch batch = build_rgi_batch(g, targets, mode == "lrgi" ? 1 : layers, fanout_conv,
                                         fanout_prop, prop_steps, sample_rng);
        fp = batch_footprint(batch);
      }
      row.mean_nodes += static_cast<double>(fp.nodes);
      row.mean_edges += static_cast<double>(fp.edges);
    }
    row.mean_nodes /= batches;
    row.mean_edges /= batches;
    row.mean_total = row.mean_nodes + row.mean_edges;
    return row;
  };

  std::vector<BenchRow> rows;
  for (const std::string mode : {"e2e", "rgi_e2e", "lrgi"}) rows.push_back(run_mode(mode));
  write_bench_csv(out_file, rows);
  for (const BenchRow& r : rows) {
    std::cout << "bench " << r.mode << ": mean nodes " << r.mean_nodes << ", mean edges "
              << r.mean_edges << ", mean total " << r.mean_total << "\n";
  }
  std::cout << "bench: report -> " << out_file << "\n";
  return 0;
}

// Expands "--config FILE" into the flags it contains, inserted right after
// the subcommand so explicit flags keep precedence.
std::vector<std::string> inject_config_args(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config file: " + path);
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    check_contract(eq != std::string::npos && eq > first,
                   "config file lines must be key=value: " + line);
    const auto key_end = line.find_last_not_of(" \t", eq - 1);
    std::string key = line.substr(first, key_end - first + 1);
    std::string value = line.substr(eq + 1);
    const auto v0 = value.find_first_not_of(" \t");
    value = v0 == std::string::npos ? "" : value.substr(v0, value.find_last_not_of(" \t") - v0 + 1);
    injected.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out;
  out.push_back(args[0]);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Self-supervised graph representation learning: layer-wise regularized "
               "infomax training, probing and diagnostics"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a stochastic block model dataset");
  SbmConfig sbm_cfg;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--per-block", sbm_cfg.nodes_per_block, "nodes per block")
      ->capture_default_str();
  gen->add_option("--blocks", sbm_cfg.num_blocks, "number of blocks")->capture_default_str();
  gen->add_option("--p-in", sbm_cfg.p_in, "intra-block edge probability")->capture_default_str();
  gen->add_option("--p-out", sbm_cfg.p_out, "inter-block edge probability")
      ->capture_default_str();
  gen->add_option("--feat-dim", sbm_cfg.feat_dim, "feature dimension")->capture_default_str();
  gen->add_option("--noise", sbm_cfg.feat_noise, "feature noise sigma")->capture_default_str();
  gen->add_option("--signal", sbm_cfg.feat_signal, "one-hot block signal strength")
      ->capture_default_str();
  gen->add_option("--seed", sbm_cfg.seed, "generator seed")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "fit the encoder on the training subgraph");
  // config values are injected before the real flags; TakeLast makes the
  // command line win over the file
  train->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string train_config;
  train->add_option("--config", train_config, "flat key=value config file; flags override");
  DatasetFlags train_data;
  train_data.attach(train);
  TrainFlags train_flags;
  train_flags.attach(train);
  std::string train_out;
  train->add_option("--out", train_out, "output directory for checkpoints and metrics")
      ->required();

  // embed
  auto* embed = app.add_subcommand("embed", "export node embeddings for a dataset");
  DatasetFlags embed_data;
  embed_data.attach(embed);
  std::string embed_model, embed_out;
  bool embed_sampled = false;
  std::int64_t embed_fanout = kFullNeighborhood;
  std::uint64_t embed_seed = 0;
  embed->add_option("--model", embed_model, "model directory (with manifest.json)")->required();
  embed->add_option("--out", embed_out, "output embeddings file")->required();
  embed->add_flag("--sampled", embed_sampled, "neighbor-sampled inference instead of full graph");
  embed->add_option("--fanout", embed_fanout, "fanout for sampled inference, -1 for full")
      ->capture_default_str();
  embed->add_option("--seed", embed_seed, "seed for sampled inference")->capture_default_str();

  // probe
  auto* probe = app.add_subcommand("probe", "linear probe on frozen embeddings");
  DatasetFlags probe_data;
  probe_data.attach(probe);
  std::string probe_model, probe_out = "probe.json";
  bool probe_raw = false;
  ProbeConfig probe_cfg;
  probe->add_option("--model", probe_model, "model directory (with manifest.json)");
  probe->add_flag("--raw", probe_raw, "probe the raw features instead of embeddings");
  probe->add_option("--out", probe_out, "output JSON file")->capture_default_str();
  probe->add_option("--epochs", probe_cfg.epochs, "probe epochs (full batch)")
      ->capture_default_str();
  probe->add_option("--lr", probe_cfg.adam.learning_rate, "probe learning rate")
      ->capture_default_str();
  probe->add_option("--weight-decay", probe_cfg.adam.weight_decay, "probe weight decay")
      ->capture_default_str();
  probe->add_option("--seed", probe_cfg.seed, "probe seed")->capture_default_str();

  // mad
  auto* mad_cmd = app.add_subcommand("mad", "per-layer oversmoothing (MAD) report");
  DatasetFlags mad_data;
  mad_data.attach(mad_cmd);
  std::string mad_model, mad_out = "mad.csv";
  mad_cmd->add_option("--model", mad_model, "model directory (with manifest.json)")->required();
  mad_cmd->add_option("--out", mad_out, "output CSV file")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "sampling complexity report per training mode");
  DatasetFlags bench_data;
  bench_data.attach(bench);
  int bench_layers = 3, bench_batches = 100, bench_prop_steps = 1;
  Index bench_batch_size = 64;
  std::int64_t bench_fanout = 10, bench_prop_fanout = 5;
  std::uint64_t bench_seed = 1;
  std::string bench_out = "bench.csv";
  bench->add_option("--layers", bench_layers, "encoder depth for the e2e modes")
      ->capture_default_str();
  bench->add_option("--batch-size", bench_batch_size, "targets per batch")
      ->capture_default_str();
  bench->add_option("--fanout", bench_fanout, "per-layer fanout")->capture_default_str();
  bench->add_option("--prop-fanout", bench_prop_fanout, "propagation fanout")
      ->capture_default_str();
  bench->add_option("--prop-steps", bench_prop_steps, "propagation hops")->capture_default_str();
  bench->add_option("--batches", bench_batches, "batches to average over")
      ->capture_default_str();
  bench->add_option("--seed", bench_seed, "sampling seed")->capture_default_str();
  bench->add_option("--out", bench_out, "output CSV file")->capture_default_str();

  std::vector<std::string> expanded;
  try {
    expanded = inject_config_args(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::vector<const char*> argv;
  argv.push_back("rgi");
  for (const std::string& a : expanded) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_gen(sbm_cfg, gen_out);
    if (train->parsed()) return cmd_train(train_data, train_flags, train_out);
    if (embed->parsed()) {
      return cmd_embed(embed_data, embed_model, embed_out, embed_sampled, embed_fanout,
                       embed_seed);
    }
    if (probe->parsed()) {
      check_contract(probe_raw || !probe_model.empty(),
                     "probe: pass --model or --raw");
      return cmd_probe(probe_data, probe_model, probe_raw, probe_out, probe_cfg);
    }
    if (mad_cmd->parsed()) return cmd_mad(mad_data, mad_model, mad_out);
    if (bench->parsed()) {
      return cmd_bench(bench_data, bench_layers, bench_batch_size, bench_fanout,
                       bench_prop_fanout, bench_prop_steps, bench_batches, bench_seed,
                       bench_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rgi
