#include "rgi/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rgi {

namespace {

void write_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

void save_parameters(const std::string& path, const NamedMatrices& params) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open checkpoint for writing: " + path);
  out << "rgi-params 1\n" << params.size() << "\n";
  for (const auto& [name, m] : params) {
    check_contract(name.find_first_of(" \t\n") == std::string::npos,
                   "parameter name contains whitespace: " + name);
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j > 0) out << " ";
        write_double(out, m(i, j));
      }
      out << "\n";
    }
  }
  if (!out) throw IngestionError("failed writing checkpoint: " + path);
}

NamedMatrices load_parameters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "rgi-params" || version != 1) {
    throw IngestionError("not a parameter checkpoint: " + path);
  }
  std::size_t count = 0;
  in >> count;
  NamedMatrices out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    Index rows = 0, cols = 0;
    in >> name >> rows >> cols;
    if (!in || rows < 0 || cols < 0) throw IngestionError("malformed checkpoint: " + path);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (!(in >> m(i, j))) throw IngestionError("truncated checkpoint: " + path);
      }
    }
    out.emplace_back(std::move(name), std::move(m));
  }
  return out;
}

}  // namespace rgi
