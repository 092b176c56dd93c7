#pragma once

#include <string>
#include <vector>

#include "rgi/eval.hpp"
#include "rgi/rgi_loss.hpp"

namespace rgi {

// epoch,rec_u,rec_v,var_u,var_v,cov_u,cov_v,total
void write_loss_csv(const std::string& path, const std::vector<RgiLossTerms>& history);

// layer_index,mad
void write_mad_csv(const std::string& path, const std::vector<double>& per_layer);

void write_probe_json(const std::string& path, const ProbeResult& result);

struct BenchRow {
  std::string mode;
  int layers = 0;
  Index batch_size = 0;
  std::int64_t fanout_conv = 0;
  std::int64_t fanout_prop = 0;
  int batches = 0;
  double mean_nodes = 0;
  double mean_edges = 0;
  double mean_total = 0;
};

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace rgi
