#include "rgi/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace rgi {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open file: " + path);
  return in;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw IngestionError("non-numeric token in " + path);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

Matrix read_matrix_file(const std::string& path) {
  auto rows = read_rows(path);
  if (rows.empty()) throw IngestionError("empty matrix file: " + path);
  const std::size_t width = rows[0].size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw IngestionError("ragged row " + std::to_string(i) + " in " + path);
    }
    for (std::size_t j = 0; j < width; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open file for writing: " + path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << " ";
      write_double(out, m(i, j));
    }
    out << "\n";
  }
  if (!out) throw IngestionError("failed writing " + path);
}

Graph read_dataset(const DatasetPaths& paths) {
  Matrix features = read_matrix_file(paths.features);
  const Index n = features.rows();

  std::vector<std::pair<NodeId, NodeId>> edges;
  {
    std::ifstream in = open_or_throw(paths.edges);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      NodeId s, d;
      if (!(ls >> s >> d)) throw IngestionError("malformed edge line in " + paths.edges);
      edges.emplace_back(s, d);
    }
  }

  Labels labels;
  {
    auto rows = read_rows(paths.labels);
    if (static_cast<Index>(rows.size()) != n) {
      throw IngestionError("label row count does not match features");
    }
    const bool multilabel = rows[0].size() > 1;
    if (multilabel) {
      labels.matrix.resize(n, static_cast<Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
          throw IngestionError("ragged label row in " + paths.labels);
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          const double v = rows[i][j];
          if (v != 0.0 && v != 1.0) throw IngestionError("multilabel entries must be 0/1");
          labels.matrix(static_cast<Index>(i), static_cast<Index>(j)) = v;
        }
      }
    } else {
      labels.classes.reserve(rows.size());
      for (const auto& r : rows) {
        if (r.size() != 1 || r[0] < 0 || r[0] != static_cast<double>(static_cast<int>(r[0]))) {
          throw IngestionError("multiclass labels must be one non-negative integer per line");
        }
        labels.classes.push_back(static_cast<int>(r[0]));
      }
    }
  }

  std::vector<std::uint8_t> train(static_cast<std::size_t>(n), 0),
      val(static_cast<std::size_t>(n), 0), test(static_cast<std::size_t>(n), 0);
  {
    std::ifstream in = open_or_throw(paths.splits);
    std::string tok;
    Index i = 0;
    while (in >> tok) {
      if (i >= n) throw IngestionError("too many split lines in " + paths.splits);
      if (tok == "train") {
        train[static_cast<std::size_t>(i)] = 1;
      } else if (tok == "val") {
        val[static_cast<std::size_t>(i)] = 1;
      } else if (tok == "test") {
        test[static_cast<std::size_t>(i)] = 1;
      } else {
        throw IngestionError("unknown split token '" + tok + "' in " + paths.splits);
      }
      ++i;
    }
    if (i != n) throw IngestionError("split count does not match node count");
  }

  return build_graph(edges, std::move(features), std::move(labels), std::move(train),
                     std::move(val), std::move(test), /*directed=*/false);
}

void write_dataset(const DatasetPaths& paths, const Graph& g) {
  {
    std::ofstream out(paths.edges);
    if (!out) throw IngestionError("cannot open file for writing: " + paths.edges);
    for (Index i = 0; i < g.num_nodes(); ++i) {
      for (NodeId j : g.neighbors(i)) {
        if (j >= i) out << i << " " << j << "\n";  // each undirected edge once
      }
    }
  }
  write_matrix_file(paths.features, g.features);
  {
    std::ofstream out(paths.labels);
    if (!out) throw IngestionError("cannot open file for writing: " + paths.labels);
    if (g.labels.multilabel()) {
      for (Index i = 0; i < g.labels.matrix.rows(); ++i) {
        for (Index j = 0; j < g.labels.matrix.cols(); ++j) {
          if (j > 0) out << " ";
          out << static_cast<int>(g.labels.matrix(i, j));
        }
        out << "\n";
      }
    } else {
      for (int c : g.labels.classes) out << c << "\n";
    }
  }
  {
    std::ofstream out(paths.splits);
    if (!out) throw IngestionError("cannot open file for writing: " + paths.splits);
    for (Index i = 0; i < g.num_nodes(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!g.train_mask.empty() && g.train_mask[k]) {
        out << "train\n";
      } else if (!g.val_mask.empty() && g.val_mask[k]) {
        out << "val\n";
      } else {
        out << "test\n";
      }
    }
  }
}

}  // namespace rgi
