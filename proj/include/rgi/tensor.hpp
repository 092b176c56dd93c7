#pragma once

#include <span>
#include <utility>

#include "rgi/common.hpp"

namespace rgi {

// Dense rank-2 value with an optional gradient buffer. The gradient is
// absent (empty) until a backward pass allocates it; once present it always
// matches the value's shape.
struct Tensor {
  Matrix values;
  Matrix grad;

  Tensor() = default;
  explicit Tensor(Matrix v) : values(std::move(v)) {}

  bool has_grad() const { return grad.size() != 0; }

  void ensure_grad() {
    if (!has_grad()) grad = Matrix::Zero(values.rows(), values.cols());
  }

  void zero_grad() {
    if (has_grad()) grad.setZero();
  }
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-5;

  void validate() const {
    check_contract(learning_rate > 0.0, "adam: learning_rate must be positive");
    check_contract(beta1 > 0.0 && beta1 < 1.0, "adam: beta1 out of (0,1)");
    check_contract(beta2 > 0.0 && beta2 < 1.0, "adam: beta2 out of (0,1)");
    check_contract(weight_decay >= 0.0, "adam: weight_decay must be non-negative");
  }
};

// Learnable tensor with Adam state. `grad_accumulated` is set by
// Tape::backward for every parameter registered on the tape and cleared by
// adam_step; stepping a parameter that no backward pass touched is a bug.
struct Parameter {
  Tensor tensor;
  Matrix adam_m;
  Matrix adam_v;
  long step_count = 0;
  bool grad_accumulated = false;

  Parameter() = default;
  explicit Parameter(Matrix init)
      : tensor(std::move(init)),
        adam_m(Matrix::Zero(tensor.values.rows(), tensor.values.cols())),
        adam_v(Matrix::Zero(tensor.values.rows(), tensor.values.cols())) {}

  Matrix& values() { return tensor.values; }
  const Matrix& values() const { return tensor.values; }
};

// One Adam update with decoupled weight decay (param -= lr*wd*param applied
// on top of the moment update). Increments step counts, then zeroes grads.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);

}  // namespace rgi
