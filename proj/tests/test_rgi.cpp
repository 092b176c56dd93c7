#include <cmath>

#include "doctest.h"
#include "rgi/lrgi.hpp"
#include "rgi/rgi_loss.hpp"
#include "rgi/sbm.hpp"
#include "rgi/trainer.hpp"
#include "test_oracles.hpp"
#include "test_support.hpp"

using namespace rgi;
using test::rand_matrix;

namespace {

ReconstructionHead identity_head(Index d) {
  RandomStream rng(0);
  ReconstructionHead h = init_reconstruction_head(d, rng);
  h.w1.values() = Matrix::Identity(d, d);
  h.b1.values().setZero();
  h.w2.values() = Matrix::Identity(d, d);
  h.b2.values().setZero();
  return h;
}

// plain-Eigen recomputation of the six loss terms
RgiLossTerms reference_rgi_terms(const Matrix& u, const Matrix& v, const ReconstructionHead& phi,
                                 const ReconstructionHead& psi, const LossWeights& w) {
  auto head_fwd = [](const ReconstructionHead& h, const Matrix& x) {
    Matrix hidden = (x * h.w1.values()).rowwise() + h.b1.values().row(0);
    for (Index i = 0; i < hidden.rows(); ++i) {
      for (Index j = 0; j < hidden.cols(); ++j) {
        hidden(i, j) = hidden(i, j) >= 0 ? hidden(i, j) : std::expm1(hidden(i, j));
      }
    }
    return Matrix(((hidden * h.w2.values()).rowwise() + h.b2.values().row(0)));
  };
  auto cov_of = [](const Matrix& m) {
    Matrix centered = m.rowwise() - m.colwise().mean();
    return Matrix(centered.transpose() * centered / static_cast<double>(m.rows()));
  };
  auto sq_norm_rows = [](const Matrix& a, const Matrix& b) {
    double acc = 0.0;
    for (Index i = 0; i < a.rows(); ++i) acc += (a.row(i) - b.row(i)).squaredNorm();
    return acc / static_cast<double>(a.rows());
  };

  RgiLossTerms t;
  t.rec_u = sq_norm_rows(u, head_fwd(phi, v));
  t.rec_v = sq_norm_rows(v, head_fwd(psi, u));
  Matrix cu = cov_of(u), cv = cov_of(v);
  const double d = static_cast<double>(cu.rows());
  for (Index n = 0; n < cu.rows(); ++n) {
    t.var_u += (1.0 - cu(n, n)) * (1.0 - cu(n, n)) / d;
    t.var_v += (1.0 - cv(n, n)) * (1.0 - cv(n, n)) / d;
    for (Index m = 0; m < cu.cols(); ++m) {
      if (m != n) {
        t.cov_u += cu(n, m) * cu(n, m) / d;
        t.cov_v += cv(n, m) * cv(n, m) / d;
      }
    }
  }
  t.total = w.rec * (t.rec_u + t.rec_v) + w.var * (t.var_u + t.var_v) +
            w.cov * (t.cov_u + t.cov_v);
  return t;
}

}  // namespace

TEST_CASE("variance_loss values") {
  Tape t;
  CHECK(t.scalar_value(variance_loss(t.leaf(Matrix::Identity(3, 3)))) == 0.0);
  CHECK(t.scalar_value(variance_loss(t.leaf(Matrix::Zero(4, 4)))) == doctest::Approx(1.0));

  RandomStream rng(1);
  Matrix c = rand_matrix(rng, 5, 5);
  double want = 0.0;
  for (Index n = 0; n < 5; ++n) want += (1.0 - c(n, n)) * (1.0 - c(n, n)) / 5.0;
  CHECK(std::abs(t.scalar_value(variance_loss(t.leaf(c))) - want) < 1e-12);

  CHECK_THROWS_AS((void)variance_loss(t.leaf(Matrix::Zero(2, 3))), DimensionError);
}

TEST_CASE("covariance_loss values and Frobenius identity") {
  Tape t;
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 5, -2, 0.3;
  CHECK(t.scalar_value(covariance_loss(t.leaf(d))) == 0.0);

  Matrix ones(2, 2);
  ones << 1, 1, 1, 1;
  CHECK(t.scalar_value(covariance_loss(t.leaf(ones))) == doctest::Approx(1.0));

  RandomStream rng(2);
  Matrix c = rand_matrix(rng, 6, 6);
  Matrix off = c;
  off.diagonal().setZero();
  const double frob = off.squaredNorm() / 6.0;
  CHECK(std::abs(t.scalar_value(covariance_loss(t.leaf(c))) - frob) < 1e-12);
}

TEST_CASE("rgi_loss zero cases") {
  RandomStream rng(3);
  // reconstruction-only, identity heads, equal non-negative views
  Matrix u = rand_matrix(rng, 6, 4, 0.1, 2.0);
  ReconstructionHead phi = identity_head(4);
  ReconstructionHead psi = identity_head(4);
  LossWeights w{1.0, 0.0, 0.0};
  Tape t;
  Var uv = t.leaf(u);
  RgiLossVars l = rgi_loss(t, uv, uv, phi, psi, w);
  CHECK(l.values().total == doctest::Approx(0.0));

  // regularization-only, exactly whitened views
  Matrix white(4, 2);
  white << 1, 1, 1, -1, -1, 1, -1, -1;
  LossWeights w2{0.0, 1.0, 1.0};
  ReconstructionHead phi2 = identity_head(2);
  ReconstructionHead psi2 = identity_head(2);
  Tape t2;
  Var wv = t2.leaf(white);
  RgiLossVars l2 = rgi_loss(t2, wv, wv, phi2, psi2, w2);
  CHECK(l2.values().total == doctest::Approx(0.0));

  // degenerate batch
  Tape t3;
  Var one_row = t3.leaf(Matrix::Zero(1, 4));
  CHECK_THROWS_AS((void)rgi_loss(t3, one_row, one_row, phi, psi, w), DegenerateInputError);

  CHECK_THROWS_AS(LossWeights({0.0, 0.0, 0.0}).validate(), ContractViolation);
}

TEST_CASE("rgi_loss matches the independent formula oracle") {
  RandomStream rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Index b = 4 + static_cast<Index>(rng.uniform_index(8));
    const Index d = 3 + static_cast<Index>(rng.uniform_index(4));
    Matrix u = rand_matrix(rng, b, d);
    Matrix v = rand_matrix(rng, b, d);
    RandomStream hr(100 + static_cast<std::uint64_t>(trial));
    ReconstructionHead phi = init_reconstruction_head(d, hr);
    ReconstructionHead psi = init_reconstruction_head(d, hr);
    LossWeights w{25.0, 25.0, 20.0};
    Tape t;
    RgiLossTerms got = rgi_loss(t, t.leaf(u), t.leaf(v), phi, psi, w).values();
    RgiLossTerms want = reference_rgi_terms(u, v, phi, psi, w);
    CHECK(std::abs(got.rec_u - want.rec_u) < 1e-10);
    CHECK(std::abs(got.rec_v - want.rec_v) < 1e-10);
    CHECK(std::abs(got.var_u - want.var_u) < 1e-10);
    CHECK(std::abs(got.var_v - want.var_v) < 1e-10);
    CHECK(std::abs(got.cov_u - want.cov_u) < 1e-10);
    CHECK(std::abs(got.cov_v - want.cov_v) < 1e-10);
    CHECK(std::abs(got.total - want.total) < 1e-8);

    // the sum identity the terms must satisfy
    const double recon = w.rec * (got.rec_u + got.rec_v) + w.var * (got.var_u + got.var_v) +
                         w.cov * (got.cov_u + got.cov_v);
    CHECK(std::abs(got.total - recon) < 1e-10);
  }
}

TEST_CASE("rgi_loss is invariant under simultaneous row permutation") {
  RandomStream rng(7);
  Matrix u = rand_matrix(rng, 8, 3);
  Matrix v = rand_matrix(rng, 8, 3);
  RandomStream hr(8);
  ReconstructionHead phi = init_reconstruction_head(3, hr);
  ReconstructionHead psi = init_reconstruction_head(3, hr);
  LossWeights w{2.0, 1.0, 0.5};

  Tape t;
  const double base = rgi_loss(t, t.leaf(u), t.leaf(v), phi, psi, w).values().total;

  std::vector<Index> perm = {5, 2, 7, 0, 3, 6, 1, 4};
  Matrix up(8, 3), vp(8, 3);
  for (Index i = 0; i < 8; ++i) {
    up.row(i) = u.row(perm[static_cast<std::size_t>(i)]);
    vp.row(i) = v.row(perm[static_cast<std::size_t>(i)]);
  }
  Tape t2;
  const double permuted = rgi_loss(t2, t2.leaf(up), t2.leaf(vp), phi, psi, w).values().total;
  CHECK(std::abs(base - permuted) < 1e-10);
}

TEST_CASE("rgi_loss gradients flow into heads and views") {
  RandomStream rng(11);
  Matrix u0 = rand_matrix(rng, 5, 3);
  Matrix v0 = rand_matrix(rng, 5, 3);
  RandomStream hr(12);
  ReconstructionHead phi = init_reconstruction_head(3, hr);
  ReconstructionHead psi = init_reconstruction_head(3, hr);
  LossWeights w{3.0, 2.0, 1.0};

  auto loss_of = [&](const std::vector<Matrix>& in) {
    ReconstructionHead p2 = phi;
    p2.w1.values() = in[1];
    Tape t;
    return t.scalar_value(rgi_loss(t, t.leaf(in[0]), t.leaf(v0), p2, psi, w).total);
  };
  Tape t;
  Var uv = t.leaf(u0);
  RgiLossVars l = rgi_loss(t, uv, t.leaf(v0), phi, psi, w);
  t.backward(l.total);
  auto fd = test::finite_diff(loss_of, {u0, phi.w1.values()});
  CHECK(test::max_rel_err(t.grad(uv), fd[0]) < 1e-4);
  CHECK(test::max_rel_err(phi.w1.tensor.grad, fd[1]) < 1e-4);
}

namespace {

struct ModuleHarness {
  Graph g;
  GatLayerParams layer;
  ReconstructionHead phi, psi;
  std::vector<Parameter*> trainable;
  LayerForward embed;

  ModuleHarness(SbmConfig sbm_cfg, Index width, std::uint64_t seed)
      : g(generate_sbm(sbm_cfg)) {
    RandomStream lr(derive_seed(seed, "layer-init", 0));
    layer = init_gat_layer(g.features.cols(), width, 1, 0.2, lr);
    RandomStream pr(derive_seed(seed, "phi-init", 0));
    RandomStream sr(derive_seed(seed, "psi-init", 0));
    phi = init_reconstruction_head(width, pr);
    psi = init_reconstruction_head(width, sr);
    trainable = layer.parameters();
    for (Parameter* p : phi.parameters()) trainable.push_back(p);
    for (Parameter* p : psi.parameters()) trainable.push_back(p);
    embed = [this](Tape& tape, const RgiBatch& batch) {
      Matrix x(batch.conv_blocks[0].num_src(), g.features.cols());
      for (Index i = 0; i < x.rows(); ++i) {
        x.row(i) = g.features.row(batch.conv_blocks[0].src_nodes[static_cast<std::size_t>(i)]);
      }
      return gat_layer_forward(tape, layer, tape.leaf(x), batch.conv_blocks[0]);
    };
  }
};

SbmConfig small_sbm() {
  SbmConfig cfg;
  cfg.nodes_per_block = 100;
  cfg.num_blocks = 2;
  cfg.p_in = 0.08;
  cfg.p_out = 0.01;
  cfg.feat_dim = 6;
  cfg.feat_noise = 1.0;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("zero epochs leave parameters untouched") {
  ModuleHarness h(small_sbm(), 8, 21);
  Matrix before = h.layer.w_skip.values();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.batch_size = 32;
  auto history = train_rgi_module(h.embed, h.g, 1, h.phi, h.psi, h.trainable, cfg, 5);
  CHECK(history.empty());
  CHECK(h.layer.w_skip.values() == before);
}

TEST_CASE("training decreases the loss on a small SBM") {
  ModuleHarness h(small_sbm(), 8, 22);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 64;
  cfg.fanout_conv = 10;
  cfg.fanout_prop = 5;
  cfg.adam.learning_rate = 1e-3;
  cfg.adam.weight_decay = 0.0;
  cfg.loss = LossWeights{1.0, 1.0, 0.8};
  auto history = train_rgi_module(h.embed, h.g, 1, h.phi, h.psi, h.trainable, cfg, 6);
  REQUIRE(history.size() == 200);
  CHECK(history.back().total < history.front().total);
}

TEST_CASE("fixed seeds give bit-identical loss histories") {
  auto run = [&] {
    ModuleHarness h(small_sbm(), 8, 23);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 32;
    return train_rgi_module(h.embed, h.g, 1, h.phi, h.psi, h.trainable, cfg, 7);
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].total == b[i].total);
    CHECK(a[i].rec_u == b[i].rec_u);
    CHECK(a[i].cov_v == b[i].cov_v);
  }
}

TEST_CASE("multi-hop propagated views train and stay deterministic") {
  ModuleHarness h(small_sbm(), 8, 41);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 32;
  cfg.prop_steps = 2;
  auto a = train_rgi_module(h.embed, h.g, 1, h.phi, h.psi, h.trainable, cfg, 9);
  REQUIRE(a.size() == 4);
  for (const auto& terms : a) CHECK(std::isfinite(terms.total));

  ModuleHarness h2(small_sbm(), 8, 41);
  auto b = train_rgi_module(h2.embed, h2.g, 1, h2.phi, h2.psi, h2.trainable, cfg, 9);
  CHECK(a.back().total == b.back().total);
}

TEST_CASE("variance-covariance regularization whitens the batch covariance") {
  // random features, no reconstruction: the covariance should approach I
  SbmConfig sbm_cfg = small_sbm();
  sbm_cfg.feat_signal = 0.0;  // pure noise features
  ModuleHarness h(sbm_cfg, 6, 31);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 100;
  cfg.fanout_conv = kFullNeighborhood;
  cfg.fanout_prop = 5;
  cfg.adam.learning_rate = 3e-3;
  cfg.adam.weight_decay = 0.0;
  cfg.loss = LossWeights{0.0, 1.0, 1.0};
  (void)train_rgi_module(h.embed, h.g, 1, h.phi, h.psi, h.trainable, cfg, 8);

  Matrix z = full_graph_layer_inference(h.layer, h.g, h.g.features);
  Matrix centered = z.rowwise() - z.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(z.rows());
  double off = 0.0;
  for (Index i = 0; i < cov.rows(); ++i) {
    CHECK(cov(i, i) > 0.5);
    CHECK(cov(i, i) < 1.5);
    for (Index j = 0; j < cov.cols(); ++j) {
      if (i != j) off += std::abs(cov(i, j));
    }
  }
  off /= static_cast<double>(cov.rows() * (cov.rows() - 1));
  CHECK(off < 0.1);
}
