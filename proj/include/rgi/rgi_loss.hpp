#pragma once

#include <string>

#include "rgi/autodiff.hpp"
#include "rgi/checkpoint.hpp"
#include "rgi/rng.hpp"

namespace rgi {

struct LossWeights {
  double rec = 25.0;  // reconstruction
  double var = 25.0;  // variance regularization
  double cov = 20.0;  // covariance regularization

  void validate() const {
    check_contract(rec >= 0.0 && var >= 0.0 && cov >= 0.0,
                   "loss weights must be non-negative");
    check_contract(rec > 0.0 || var > 0.0 || cov > 0.0,
                   "at least one loss weight must be positive");
  }
};

struct RgiLossTerms {
  double rec_u = 0, rec_v = 0;
  double var_u = 0, var_v = 0;
  double cov_u = 0, cov_v = 0;
  double total = 0;
};

// Two affine layers with an ELU in between, width D throughout. One pair
// per trained module; discarded after training, never used at inference.
struct ReconstructionHead {
  Parameter w1, b1, w2, b2;

  Var forward(Tape& tape, Var x);
  std::vector<Parameter*> parameters() { return {&w1, &b1, &w2, &b2}; }
  void append_named(NamedMatrices& out, const std::string& prefix) const;
};

ReconstructionHead init_reconstruction_head(Index width, RandomStream& rng);

// (1/D) sum_n (1 - C_nn)^2 : pushes every variance toward 1.
Var variance_loss(Var cov);
// (1/D) sum_n sum_{m != n} C_nm^2 : pushes covariances toward 0.
Var covariance_loss(Var cov);

// The loss graph for one batch: symmetric reconstruction between the local
// view `u` and the propagated view `v` plus variance/covariance
// regularization of both. Terms stay live on the tape so the total can be
// backpropagated; values() snapshots the six terms.
struct RgiLossVars {
  Var rec_u, rec_v, var_u, var_v, cov_u, cov_v, total;
  RgiLossTerms values() const;
};

RgiLossVars rgi_loss(Tape& tape, Var u, Var v, ReconstructionHead& phi,
                     ReconstructionHead& psi, const LossWeights& w);

}  // namespace rgi
