#pragma once

#include <string>

#include "rgi/graph.hpp"

namespace rgi {

// On-disk dataset layout, one graph in four text files:
//   edges     one "src dst" integer pair per line (each undirected edge once)
//   features  one whitespace-separated float row per node
//   labels    one integer per line (multiclass) or one 0/1 row (multilabel)
//   splits    one of {train,val,test} per line
struct DatasetPaths {
  std::string edges;
  std::string features;
  std::string labels;
  std::string splits;
};

Graph read_dataset(const DatasetPaths& paths);
void write_dataset(const DatasetPaths& paths, const Graph& g);

// Plain whitespace-separated matrix files (features, embeddings).
Matrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Matrix& m);

}  // namespace rgi
