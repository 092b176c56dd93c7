#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rgi {

// All numeric state is double precision, row-major. Vectors are stored as
// n-by-1 (column) matrices, scalars as 1-by-1.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;
using NodeId = std::int64_t;

// Error taxonomy. Library code throws; the CLI boundary turns these into
// nonzero exit codes.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IngestionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_dim(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}
inline void check_contract(bool ok, const std::string& msg) {
  if (!ok) throw ContractViolation(msg);
}

}  // namespace rgi
