#pragma once

#include <string>
#include <vector>

#include "rgi/encoder.hpp"
#include "rgi/graph.hpp"
#include "rgi/tensor.hpp"

namespace rgi {

enum class ProbeTask { kMulticlass, kMultilabel };

struct ProbeConfig {
  int epochs = 500;  // full-batch
  AdamConfig adam;   // same defaults as the encoder optimizer
  std::uint64_t seed = 0;
};

struct ProbeResult {
  std::string metric;  // "accuracy" or "micro_f1"
  double train_score = 0;
  double val_score = 0;
  double test_score = 0;
  Matrix weight;  // D x C
  Matrix bias;    // 1 x C
};

struct LinearProbeModel {
  ProbeTask task = ProbeTask::kMulticlass;
  Matrix weight;
  Matrix bias;
};

// Softmax regression (multiclass) or independent logistic outputs
// (multilabel, threshold 0.5) fit with full-batch Adam on frozen
// embeddings. The encoder is never touched.
LinearProbeModel fit_linear_probe(const Matrix& z_train, const Labels& y_train, ProbeTask task,
                                  const ProbeConfig& cfg);

// Accuracy (multiclass) or micro-averaged F1 (multilabel).
double probe_score(const LinearProbeModel& model, const Matrix& z, const Labels& y);

ProbeResult linear_probe(const Matrix& z_train, const Labels& y_train, const Matrix& z_val,
                         const Labels& y_val, const Matrix& z_test, const Labels& y_test,
                         ProbeTask task, const ProbeConfig& cfg);

// Rows of `labels` selected by node ids.
Labels labels_subset(const Labels& labels, const std::vector<NodeId>& ids);

// Mean over nodes with neighbors of the mean cosine distance to their
// neighbors. Zero-norm rows contribute distance 0 (with a warning on
// stderr). Low values signal oversmoothing.
double mad(const Matrix& u, const Graph& g);

struct MadReport {
  std::vector<double> per_layer;  // one value per encoder layer output
};

MadReport mad_per_layer(const Encoder& encoder, const Graph& g);

}  // namespace rgi
