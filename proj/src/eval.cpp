#include "rgi/eval.hpp"

#include <cmath>
#include <iostream>

#include "rgi/autodiff.hpp"
#include "rgi/rng.hpp"

namespace rgi {

namespace {

void check_labels(const Matrix& z, const Labels& y, ProbeTask task) {
  check_contract(y.size() == z.rows(), "linear_probe: label rows must match embedding rows");
  if (task == ProbeTask::kMultilabel) {
    check_contract(y.multilabel(), "linear_probe: multilabel task needs a label matrix");
  } else {
    check_contract(!y.multilabel(), "linear_probe: multiclass task needs class-id labels");
  }
}

double accuracy(const Matrix& logits, const std::vector<int>& classes) {
  Index hits = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    Index argmax = 0;
    logits.row(i).maxCoeff(&argmax);
    if (static_cast<int>(argmax) == classes[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

double micro_f1(const Matrix& logits, const Matrix& targets) {
  // threshold 0.5 on the sigmoid == logit > 0
  double tp = 0, fp = 0, fn = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    for (Index c = 0; c < logits.cols(); ++c) {
      const bool pred = logits(i, c) > 0.0;
      const bool truth = targets(i, c) != 0.0;
      if (pred && truth) ++tp;
      if (pred && !truth) ++fp;
      if (!pred && truth) ++fn;
    }
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 1.0 : 2.0 * tp / denom;
}

}  // namespace

Labels labels_subset(const Labels& labels, const std::vector<NodeId>& ids) {
  Labels out;
  if (labels.multilabel()) {
    out.matrix.resize(static_cast<Index>(ids.size()), labels.matrix.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out.matrix.row(static_cast<Index>(i)) = labels.matrix.row(ids[i]);
    }
  } else {
    out.classes.reserve(ids.size());
    for (NodeId v : ids) out.classes.push_back(labels.classes[static_cast<std::size_t>(v)]);
  }
  return out;
}

LinearProbeModel fit_linear_probe(const Matrix& z_train, const Labels& y_train, ProbeTask task,
                                  const ProbeConfig& cfg) {
  check_labels(z_train, y_train, task);
  const int num_classes = y_train.num_classes();
  check_contract(num_classes >= 1, "linear_probe: no classes");

  LinearProbeModel model;
  model.task = task;
  Parameter weight(Matrix::Zero(z_train.cols(), num_classes));
  Parameter bias(Matrix::Zero(1, num_classes));
  std::vector<Parameter*> params = {&weight, &bias};

  std::vector<Index> class_ids;
  if (task == ProbeTask::kMulticlass) {
    class_ids.reserve(y_train.classes.size());
    for (int c : y_train.classes) class_ids.push_back(c);
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    Var logits = add_row(matmul(tape.leaf(z_train), tape.param(weight)), tape.param(bias));
    Var loss = task == ProbeTask::kMulticlass
                   ? softmax_cross_entropy(logits, std::vector<Index>(class_ids))
                   : binary_cross_entropy_logits(logits, y_train.matrix);
    tape.backward(loss);
    adam_step(params, cfg.adam);
  }
  model.weight = weight.values();
  model.bias = bias.values();
  return model;
}

double probe_score(const LinearProbeModel& model, const Matrix& z, const Labels& y) {
  check_labels(z, y, model.task);
  Matrix logits = (z * model.weight).rowwise() + model.bias.row(0);
  return model.task == ProbeTask::kMulticlass ? accuracy(logits, y.classes)
                                              : micro_f1(logits, y.matrix);
}

ProbeResult linear_probe(const Matrix& z_train, const Labels& y_train, const Matrix& z_val,
                         const Labels& y_val, const Matrix& z_test, const Labels& y_test,
                         ProbeTask task, const ProbeConfig& cfg) {
  LinearProbeModel model = fit_linear_probe(z_train, y_train, task, cfg);
  ProbeResult out;
  out.metric = task == ProbeTask::kMulticlass ? "accuracy" : "micro_f1";
  out.train_score = probe_score(model, z_train, y_train);
  out.val_score = z_val.rows() > 0 ? probe_score(model, z_val, y_val) : 0.0;
  out.test_score = z_test.rows() > 0 ? probe_score(model, z_test, y_test) : 0.0;
  out.weight = model.weight;
  out.bias = model.bias;
  return out;
}

double mad(const Matrix& u, const Graph& g) {
  check_dim(u.rows() == g.num_nodes(), "mad: embedding rows must match node count");
  Eigen::VectorXd norms(u.rows());
  for (Index i = 0; i < u.rows(); ++i) norms(i) = u.row(i).norm();
  Index zero_norm_rows = 0;
  for (Index i = 0; i < u.rows(); ++i) {
    if (norms(i) == 0.0) ++zero_norm_rows;
  }
  if (zero_norm_rows > 0) {
    std::cerr << "mad: " << zero_norm_rows
              << " zero-norm embedding rows; their pairs count as distance 0\n";
  }
  double total = 0.0;
  Index counted = 0;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    auto nbrs = g.neighbors(i);
    if (nbrs.empty()) continue;
    double acc = 0.0;
    for (NodeId j : nbrs) {
      if (norms(i) == 0.0 || norms(j) == 0.0) continue;  // contributes 0
      acc += 1.0 - u.row(i).dot(u.row(j)) / (norms(i) * norms(j));
    }
    total += acc / static_cast<double>(nbrs.size());
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

MadReport mad_per_layer(const Encoder& encoder, const Graph& g) {
  MadReport report;
  Matrix x = g.features;
  for (const GatLayerParams& layer : encoder.layers) {
    x = full_graph_layer_inference(layer, g, x);
    report.per_layer.push_back(mad(x, g));
  }
  return report;
}

}  // namespace rgi
