#include "rgi/metrics_io.hpp"

#include <cstdio>
#include <fstream>

namespace rgi {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open file for writing: " + path);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_loss_csv(const std::string& path, const std::vector<RgiLossTerms>& history) {
  std::ofstream out = open_out(path);
  out << "epoch,rec_u,rec_v,var_u,var_v,cov_u,cov_v,total\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    const RgiLossTerms& t = history[e];
    out << e << "," << fmt(t.rec_u) << "," << fmt(t.rec_v) << "," << fmt(t.var_u) << ","
        << fmt(t.var_v) << "," << fmt(t.cov_u) << "," << fmt(t.cov_v) << "," << fmt(t.total)
        << "\n";
  }
}

void write_mad_csv(const std::string& path, const std::vector<double>& per_layer) {
  std::ofstream out = open_out(path);
  out << "layer_index,mad\n";
  for (std::size_t l = 0; l < per_layer.size(); ++l) {
    out << l << "," << fmt(per_layer[l]) << "\n";
  }
}

void write_probe_json(const std::string& path, const ProbeResult& result) {
  std::ofstream out = open_out(path);
  out << "{\n"
      << "  \"metric\": \"" << result.metric << "\",\n"
      << "  \"train\": " << fmt(result.train_score) << ",\n"
      << "  \"val\": " << fmt(result.val_score) << ",\n"
      << "  \"test\": " << fmt(result.test_score) << "\n"
      << "}\n";
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ofstream out = open_out(path);
  out << "mode,layers,batch_size,fanout_conv,fanout_prop,batches,mean_nodes,mean_edges,"
         "mean_total\n";
  for (const BenchRow& r : rows) {
    out << r.mode << "," << r.layers << "," << r.batch_size << "," << r.fanout_conv << ","
        << r.fanout_prop << "," << r.batches << "," << fmt(r.mean_nodes) << ","
        << fmt(r.mean_edges) << "," << fmt(r.mean_total) << "\n";
  }
}

}  // namespace rgi
