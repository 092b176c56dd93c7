#include <cmath>

#include "doctest.h"
#include "rgi/eval.hpp"
#include "rgi/lrgi.hpp"
#include "rgi/sbm.hpp"
#include "test_oracles.hpp"
#include "test_support.hpp"

using namespace rgi;
using test::make_er_graph;
using test::rand_matrix;

namespace {

// two separable 2-D blobs
void make_blobs(Index n_per, Matrix& z, Labels& y, std::uint64_t seed, double gap = 6.0) {
  RandomStream rng(seed);
  z.resize(2 * n_per, 2);
  y.classes.clear();
  for (Index i = 0; i < 2 * n_per; ++i) {
    const int cls = i < n_per ? 0 : 1;
    z(i, 0) = (cls == 0 ? -gap / 2 : gap / 2) + rng.normal();
    z(i, 1) = rng.normal();
    y.classes.push_back(cls);
  }
}

}  // namespace

TEST_CASE("linearly separable blobs reach perfect accuracy") {
  Matrix z_train, z_test;
  Labels y_train, y_test;
  make_blobs(40, z_train, y_train, 1);
  make_blobs(25, z_test, y_test, 2);
  ProbeConfig cfg;
  ProbeResult res = linear_probe(z_train, y_train, Matrix(), Labels(), z_test, y_test,
                                 ProbeTask::kMulticlass, cfg);
  CHECK(res.metric == "accuracy");
  CHECK(res.train_score == doctest::Approx(1.0));
  CHECK(res.test_score == doctest::Approx(1.0));
}

TEST_CASE("random labels score near chance") {
  RandomStream rng(3);
  Matrix z = rand_matrix(rng, 400, 4);
  Labels y;
  for (Index i = 0; i < 400; ++i) y.classes.push_back(i % 2);
  Matrix z_eval = rand_matrix(rng, 400, 4);
  Labels y_eval;
  for (Index i = 0; i < 400; ++i) y_eval.classes.push_back(static_cast<int>(rng.uniform_index(2)));
  ProbeConfig cfg;
  ProbeResult res =
      linear_probe(z, y, Matrix(), Labels(), z_eval, y_eval, ProbeTask::kMulticlass, cfg);
  CHECK(res.test_score > 0.4);
  CHECK(res.test_score < 0.6);
}

TEST_CASE("probe metrics against hand-verified confusion counts") {
  // identity "probe": feed logits directly through weight = I
  LinearProbeModel model;
  model.task = ProbeTask::kMulticlass;
  model.weight = Matrix::Identity(3, 3);
  model.bias = Matrix::Zero(1, 3);
  Matrix logits(10, 3);
  Labels y;
  // rows 0..5 predicted class 0, rows 6..9 predicted class 2
  for (Index i = 0; i < 10; ++i) {
    logits.row(i).setZero();
    logits(i, i < 6 ? 0 : 2) = 5.0;
  }
  // truth: rows 0..3 class 0 (4 hits), rows 4..5 class 1, rows 6..8 class 2 (3 hits), row 9 class 1
  y.classes = {0, 0, 0, 0, 1, 1, 2, 2, 2, 1};
  CHECK(probe_score(model, logits, y) == doctest::Approx(0.7));

  LinearProbeModel ml;
  ml.task = ProbeTask::kMultilabel;
  ml.weight = Matrix::Identity(2, 2);
  ml.bias = Matrix::Zero(1, 2);
  Matrix zl(10, 2);
  Labels yl;
  yl.matrix.resize(10, 2);
  // construct exactly TP=7, FP=3, FN=2 over 20 cells
  int tp = 0, fp = 0, fn = 0;
  for (Index i = 0; i < 10; ++i) {
    for (Index c = 0; c < 2; ++c) {
      const int cell = static_cast<int>(2 * i + c);
      bool pred, truth;
      if (tp < 7) {
        pred = truth = true;
        ++tp;
      } else if (fp < 3) {
        pred = true;
        truth = false;
        ++fp;
      } else if (fn < 2) {
        pred = false;
        truth = true;
        ++fn;
      } else {
        pred = truth = false;
      }
      (void)cell;
      zl(i, c) = pred ? 3.0 : -3.0;
      yl.matrix(i, c) = truth ? 1.0 : 0.0;
    }
  }
  // micro-F1 = 2*7 / (2*7 + 3 + 2) = 14/19
  CHECK(probe_score(ml, zl, yl) == doctest::Approx(14.0 / 19.0));

  // perfect multilabel predictions -> micro-F1 = 1
  Matrix perfect = (yl.matrix.array() * 6.0 - 3.0).matrix();
  CHECK(probe_score(ml, perfect, yl) == doctest::Approx(1.0));
}

TEST_CASE("argmax predictions are invariant to positive embedding rescaling") {
  Matrix z_train, z_eval;
  Labels y_train, y_eval;
  make_blobs(30, z_train, y_train, 7, 8.0);
  make_blobs(30, z_eval, y_eval, 8, 8.0);
  ProbeConfig cfg;
  cfg.adam.learning_rate = 1e-2;  // reach convergence so the argmax settles
  LinearProbeModel a = fit_linear_probe(z_train, y_train, ProbeTask::kMulticlass, cfg);
  LinearProbeModel b = fit_linear_probe(Matrix(z_train * 37.5), y_train,
                                        ProbeTask::kMulticlass, cfg);
  auto predict = [](const LinearProbeModel& m, const Matrix& z) {
    Matrix logits = (z * m.weight).rowwise() + m.bias.row(0);
    std::vector<int> out;
    for (Index i = 0; i < logits.rows(); ++i) {
      Index arg = 0;
      logits.row(i).maxCoeff(&arg);
      out.push_back(static_cast<int>(arg));
    }
    return out;
  };
  CHECK(predict(a, z_eval) == predict(b, Matrix(z_eval * 37.5)));
}

TEST_CASE("label/row mismatch is rejected") {
  Matrix z = Matrix::Zero(5, 2);
  Labels y;
  y.classes = {0, 1};
  ProbeConfig cfg;
  CHECK_THROWS_AS((void)fit_linear_probe(z, y, ProbeTask::kMulticlass, cfg), ContractViolation);
  CHECK_THROWS_AS((void)fit_linear_probe(z, y, ProbeTask::kMultilabel, cfg), ContractViolation);
}

TEST_CASE("mad basics") {
  // identical nonzero rows -> 0
  Labels l;
  l.classes.assign(4, 0);
  Graph g = build_graph(std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}, {2, 3}},
                        Matrix::Zero(4, 2), std::move(l), {}, {}, {});
  Matrix same = Matrix::Constant(4, 3, 1.7);
  CHECK(mad(same, g) == doctest::Approx(0.0));

  // orthogonal pair across a single edge -> 1
  Labels l2;
  l2.classes.assign(2, 0);
  Graph pair = build_graph(std::vector<std::pair<NodeId, NodeId>>{{0, 1}}, Matrix::Zero(2, 2),
                           std::move(l2), {}, {}, {});
  Matrix ortho(2, 2);
  ortho << 1, 0, 0, 1;
  CHECK(mad(ortho, pair) == doctest::Approx(1.0));

  // scale invariance
  Graph er = make_er_graph(20, 0.3, 5);
  RandomStream rng(6);
  Matrix u = rand_matrix(rng, 20, 6);
  CHECK(std::abs(mad(u, er) - mad(Matrix(u * 123.0), er)) < 1e-12);
}

TEST_CASE("mad equals the naive double-loop oracle") {
  RandomStream rng(9);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Graph g = make_er_graph(20, 0.25, 700 + seed);
    Matrix u = rand_matrix(rng, 20, 5);
    double total = 0.0;
    Index counted = 0;
    for (Index i = 0; i < 20; ++i) {
      if (g.degree(i) == 0) continue;
      double acc = 0.0;
      for (NodeId j : g.neighbors(i)) {
        const double denom = u.row(i).norm() * u.row(j).norm();
        acc += 1.0 - u.row(i).dot(u.row(j)) / denom;
      }
      total += acc / static_cast<double>(g.degree(i));
      ++counted;
    }
    const double want = total / static_cast<double>(counted);
    CHECK(std::abs(mad(u, g) - want) < 1e-12);
  }
}

TEST_CASE("zero-norm rows contribute zero distance") {
  Labels l;
  l.classes.assign(3, 0);
  Graph g = build_graph(std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}},
                        Matrix::Zero(3, 2), std::move(l), {}, {}, {});
  Matrix u(3, 2);
  u << 1, 0, 0, 0, 0, 1;  // middle row has zero norm
  // node 0: neighbor 1 contributes 0 -> mean 0; node 1: both pairs 0; node 2: 0
  CHECK(mad(u, g) == doctest::Approx(0.0));
}

TEST_CASE("mad_per_layer has one entry per layer; L=1 equals mad of the output") {
  Graph g = make_er_graph(15, 0.3, 33, 4);
  EncoderConfig ec;
  ec.num_layers = 1;
  ec.width = 6;
  ec.heads = 2;
  ec.input_dim = 4;
  Encoder enc = init_encoder(ec, 3);
  MadReport report = mad_per_layer(enc, g);
  REQUIRE(report.per_layer.size() == 1);
  Matrix z = embed_nodes(enc, g);
  CHECK(report.per_layer[0] == doctest::Approx(mad(z, g)));
}

TEST_CASE("repeated averaging on a connected graph never increases MAD") {
  SbmConfig cfg;
  cfg.nodes_per_block = 60;
  cfg.num_blocks = 2;
  cfg.p_in = 0.2;
  cfg.p_out = 0.05;
  cfg.feat_dim = 6;
  cfg.seed = 4;
  Graph g = generate_sbm(cfg);
  // non-negative features keep the ELU of a mean-aggregation stack linear,
  // but here we apply the averaging operator directly
  Matrix u = g.features.cwiseAbs();
  double prev = mad(u, g);
  for (int depth = 1; depth <= 10; ++depth) {
    u = propagate(u, g, 1);
    const double cur = mad(u, g);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}
