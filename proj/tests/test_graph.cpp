#include <filesystem>
#include <set>

#include "doctest.h"
#include "rgi/dataset_io.hpp"
#include "rgi/graph.hpp"
#include "rgi/sbm.hpp"
#include "test_oracles.hpp"
#include "test_support.hpp"

using namespace rgi;
using test::dense_propagate;
using test::edge_set;
using test::make_er_graph;
using test::rand_matrix;

namespace {

Graph tiny_graph(std::vector<std::pair<NodeId, NodeId>> edges, Index n, Index feat_dim = 1) {
  Labels labels;
  labels.classes.assign(static_cast<std::size_t>(n), 0);
  return build_graph(edges, Matrix::Zero(n, feat_dim), std::move(labels), {}, {}, {});
}

}  // namespace

TEST_CASE("build_graph symmetrizes and deduplicates") {
  Graph g = tiny_graph({{0, 1}}, 2);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 1);

  Graph g2 = tiny_graph({{0, 1}, {0, 1}, {1, 0}}, 3);
  CHECK(g2.degree(0) == 1);
  CHECK(g2.degree(1) == 1);
  CHECK(g2.degree(2) == 0);
  CHECK(g2.num_edges() == 2);  // one undirected edge, stored both ways

  CHECK_THROWS_AS(tiny_graph({{0, 5}}, 2), IngestionError);
}

TEST_CASE("CSR neighborhoods match a dense adjacency oracle") {
  RandomStream rng(51);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.uniform_index(20));
    std::vector<std::pair<NodeId, NodeId>> edges;
    Matrix dense = Matrix::Zero(n, n);
    const std::size_t m = 3 * static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < m; ++k) {
      const auto a = static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      const auto b = static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      if (a == b) continue;
      edges.emplace_back(a, b);
      dense(a, b) = dense(b, a) = 1.0;
    }
    Labels labels;
    labels.classes.assign(static_cast<std::size_t>(n), 0);
    Graph g = build_graph(edges, Matrix::Zero(n, 1), std::move(labels), {}, {}, {});
    for (Index i = 0; i < n; ++i) {
      std::set<NodeId> got(g.neighbors(i).begin(), g.neighbors(i).end());
      std::set<NodeId> want;
      for (Index j = 0; j < n; ++j) {
        if (dense(i, j) != 0.0) want.insert(j);
      }
      CHECK(got == want);
    }
  }
}

TEST_CASE("propagate on tiny graphs") {
  Graph path = tiny_graph({{0, 1}}, 2);
  Matrix u(2, 1);
  u << 2, 4;
  Matrix v = propagate(u, path, 1);
  CHECK(v(0, 0) == 4.0);
  CHECK(v(1, 0) == 2.0);

  Graph star = tiny_graph({{0, 1}, {0, 2}, {0, 3}}, 4);
  Matrix su(4, 1);
  su << 0, 1, 2, 3;
  CHECK(propagate(su, star, 1)(0, 0) == doctest::Approx(2.0));

  Matrix bad(3, 1);
  CHECK_THROWS_AS((void)propagate(bad, path, 1), DimensionError);
}

TEST_CASE("propagate matches the dense (D^-1 A)^K oracle") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Graph g = make_er_graph(30, 0.15, 100 + seed);
    RandomStream rng(seed);
    Matrix u = rand_matrix(rng, 30, 4);
    Matrix got = propagate(u, g, 2);
    Matrix want = dense_propagate(u, g, 2);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);

    // differentiable path agrees with the plain path
    Tape t;
    Matrix got_var = t.value(propagate(t.leaf(u), g, 2));
    CHECK((got_var - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("propagate preserves constant rows and is linear") {
  Graph g = make_er_graph(25, 0.2, 77);
  Matrix ones = Matrix::Constant(25, 3, 4.25);
  CHECK((propagate(ones, g, 1) - ones).cwiseAbs().maxCoeff() < 1e-12);

  RandomStream rng(7);
  Matrix u1 = rand_matrix(rng, 25, 3);
  Matrix u2 = rand_matrix(rng, 25, 3);
  Matrix lhs = propagate(2.5 * u1 - 1.5 * u2, g, 1);
  Matrix rhs = 2.5 * propagate(u1, g, 1) - 1.5 * propagate(u2, g, 1);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("isolated nodes keep their embedding under propagate") {
  Graph g = tiny_graph({{0, 1}}, 3);
  Matrix u(3, 1);
  u << 1, 2, 42;
  Matrix v = propagate(u, g, 5);
  CHECK(v(2, 0) == 42.0);
}

TEST_CASE("induced subgraph") {
  // triangle, keep two nodes -> single edge
  Graph tri = tiny_graph({{0, 1}, {1, 2}, {0, 2}}, 3);
  std::vector<NodeId> keep = {0, 1};
  auto [sub, old_ids] = induced_subgraph(tri, keep);
  CHECK(sub.num_nodes() == 2);
  CHECK(sub.num_edges() == 2);
  CHECK(old_ids == std::vector<NodeId>{0, 1});

  // identity case
  Graph g = make_er_graph(15, 0.25, 9);
  std::vector<NodeId> all;
  for (Index i = 0; i < 15; ++i) all.push_back(i);
  auto [copy, ids] = induced_subgraph(g, all);
  CHECK(edge_set(copy) == edge_set(g));

  // dense row/column deletion oracle
  std::vector<NodeId> subset = {1, 3, 4, 8, 9, 12};
  auto [s2, ids2] = induced_subgraph(g, subset);
  std::set<std::pair<NodeId, NodeId>> want;
  Matrix a = test::dense_adjacency(g);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      if (a(subset[i], subset[j]) != 0.0) {
        want.emplace(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }
  CHECK(edge_set(s2) == want);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    CHECK(s2.features.row(static_cast<Index>(i)) == g.features.row(subset[i]));
  }

  CHECK_THROWS_AS((void)induced_subgraph(g, std::vector<NodeId>{99}), ContractViolation);
}

TEST_CASE("sbm: disjoint triangles when p_in=1, p_out=0") {
  SbmConfig cfg;
  cfg.nodes_per_block = 3;
  cfg.num_blocks = 2;
  cfg.p_in = 1.0;
  cfg.p_out = 0.0;
  cfg.feat_dim = 2;
  Graph g = generate_sbm(cfg);
  CHECK(g.num_nodes() == 6);
  CHECK(g.num_edges() == 12);  // two triangles, both directions
  for (Index i = 0; i < 6; ++i) {
    CHECK(g.degree(i) == 2);
    for (NodeId j : g.neighbors(i)) {
      CHECK(i / 3 == j / 3);  // no cross-block edge
    }
  }
  CHECK(g.labels.classes[0] == 0);
  CHECK(g.labels.classes[5] == 1);
}

TEST_CASE("sbm: measured densities track p_in and p_out") {
  SbmConfig cfg;
  cfg.nodes_per_block = 100;
  cfg.num_blocks = 4;
  cfg.p_in = 0.05;
  cfg.p_out = 0.005;
  cfg.feat_dim = 4;
  cfg.seed = 3;
  Graph g = generate_sbm(cfg);
  double intra = 0, inter = 0;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j : g.neighbors(i)) {
      (i / 100 == j / 100 ? intra : inter) += 1.0;
    }
  }
  const double intra_pairs = 4.0 * 100 * 99;        // ordered pairs
  const double inter_pairs = 400.0 * 400 - 4.0 * 100 * 100;
  CHECK(intra / intra_pairs == doctest::Approx(cfg.p_in).epsilon(0.2));
  CHECK(inter / inter_pairs == doctest::Approx(cfg.p_out).epsilon(0.2));

  // deterministic per seed
  Graph g2 = generate_sbm(cfg);
  CHECK(g2.indices == g.indices);
  CHECK(g2.features == g.features);
  CHECK(g2.train_mask == g.train_mask);

  // 60/20/20 split
  Index n_train = 0;
  for (auto m : g.train_mask) n_train += m;
  CHECK(n_train == 240);

  SbmConfig bad = cfg;
  bad.p_out = 0.5;
  bad.p_in = 0.1;
  CHECK_THROWS_AS((void)generate_sbm(bad), ContractViolation);
}

TEST_CASE("dataset files round-trip through write and read") {
  SbmConfig cfg;
  cfg.nodes_per_block = 20;
  cfg.num_blocks = 2;
  cfg.p_in = 0.3;
  cfg.p_out = 0.02;
  cfg.feat_dim = 3;
  cfg.seed = 11;
  Graph g = generate_sbm(cfg);

  auto dir = std::filesystem::temp_directory_path() / "rgi_dataset_test";
  std::filesystem::create_directories(dir);
  DatasetPaths paths{(dir / "edges.txt").string(), (dir / "features.txt").string(),
                     (dir / "labels.txt").string(), (dir / "splits.txt").string()};
  write_dataset(paths, g);
  Graph back = read_dataset(paths);
  CHECK(back.offsets == g.offsets);
  CHECK(back.indices == g.indices);
  CHECK(back.features == g.features);
  CHECK(back.labels.classes == g.labels.classes);
  CHECK(back.train_mask == g.train_mask);
  CHECK(back.val_mask == g.val_mask);
  CHECK(back.test_mask == g.test_mask);

  // multilabel round trip
  Graph ml = g;
  ml.labels.classes.clear();
  ml.labels.matrix = Matrix::Zero(g.num_nodes(), 5);
  RandomStream rng(2);
  for (Index i = 0; i < ml.labels.matrix.rows(); ++i) {
    for (Index j = 0; j < 5; ++j) ml.labels.matrix(i, j) = rng.uniform() < 0.3 ? 1.0 : 0.0;
  }
  write_dataset(paths, ml);
  Graph back_ml = read_dataset(paths);
  CHECK(back_ml.labels.multilabel());
  CHECK(back_ml.labels.matrix == ml.labels.matrix);

  CHECK_THROWS_AS((void)read_dataset(DatasetPaths{paths.edges, "/nonexistent/f.txt",
                                                  paths.labels, paths.splits}),
                  IngestionError);
  std::filesystem::remove_all(dir);
}
