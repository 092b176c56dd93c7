#include "rgi/rgi_loss.hpp"

namespace rgi {

namespace {

Matrix xavier_uniform(Index rows, Index cols, RandomStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
    }
  }
  return m;
}

}  // namespace

ReconstructionHead init_reconstruction_head(Index width, RandomStream& rng) {
  ReconstructionHead h;
  h.w1 = Parameter(xavier_uniform(width, width, rng));
  h.b1 = Parameter(Matrix::Zero(1, width));
  h.w2 = Parameter(xavier_uniform(width, width, rng));
  h.b2 = Parameter(Matrix::Zero(1, width));
  return h;
}

Var ReconstructionHead::forward(Tape& tape, Var x) {
  Var hidden = elu(add_row(matmul(x, tape.param(w1)), tape.param(b1)));
  return add_row(matmul(hidden, tape.param(w2)), tape.param(b2));
}

void ReconstructionHead::append_named(NamedMatrices& out, const std::string& prefix) const {
  out.emplace_back(prefix + ".w1", w1.values());
  out.emplace_back(prefix + ".b1", b1.values());
  out.emplace_back(prefix + ".w2", w2.values());
  out.emplace_back(prefix + ".b2", b2.values());
}

Var variance_loss(Var cov) {
  Tape& t = *cov.tape;
  const Index d = t.value(cov).rows();
  check_dim(d == t.value(cov).cols(), "variance_loss: covariance must be square");
  Var shortfall = add_scalar(mul_scalar(diag(cov), -1.0), 1.0);
  return mul_scalar(sum(square(shortfall)), 1.0 / static_cast<double>(d));
}

Var covariance_loss(Var cov) {
  Tape& t = *cov.tape;
  const Index d = t.value(cov).rows();
  check_dim(d == t.value(cov).cols(), "covariance_loss: covariance must be square");
  Var all_sq = sum(square(cov));
  Var diag_sq = sum(square(diag(cov)));
  return mul_scalar(sub(all_sq, diag_sq), 1.0 / static_cast<double>(d));
}

RgiLossTerms RgiLossVars::values() const {
  RgiLossTerms out;
  Tape& t = *total.tape;
  out.rec_u = t.scalar_value(rec_u);
  out.rec_v = t.scalar_value(rec_v);
  out.var_u = t.scalar_value(var_u);
  out.var_v = t.scalar_value(var_v);
  out.cov_u = t.scalar_value(cov_u);
  out.cov_v = t.scalar_value(cov_v);
  out.total = t.scalar_value(total);
  return out;
}

RgiLossVars rgi_loss(Tape& tape, Var u, Var v, ReconstructionHead& phi,
                     ReconstructionHead& psi, const LossWeights& w) {
  w.validate();
  const Matrix& uv = tape.value(u);
  const Matrix& vv = tape.value(v);
  check_dim(uv.rows() == vv.rows() && uv.cols() == vv.cols(), "rgi_loss: view shape mismatch");
  if (uv.rows() < 2) {
    throw DegenerateInputError("rgi_loss: needs at least 2 rows for the covariance");
  }

  RgiLossVars out;
  out.rec_u = mse_rows(u, phi.forward(tape, v));
  out.rec_v = mse_rows(v, psi.forward(tape, u));
  Var cov_mat_u = covariance_matrix(u);
  Var cov_mat_v = covariance_matrix(v);
  out.var_u = variance_loss(cov_mat_u);
  out.var_v = variance_loss(cov_mat_v);
  out.cov_u = covariance_loss(cov_mat_u);
  out.cov_v = covariance_loss(cov_mat_v);
  Var rec = mul_scalar(add(out.rec_u, out.rec_v), w.rec);
  Var var = mul_scalar(add(out.var_u, out.var_v), w.var);
  Var cov = mul_scalar(add(out.cov_u, out.cov_v), w.cov);
  out.total = add(add(rec, var), cov);
  return out;
}

}  // namespace rgi
