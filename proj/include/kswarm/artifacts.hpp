#pragma once

// On-disk run artifacts. All numbers are written with 17 significant digits.
//
//   metrics.csv        step,t,mean_basis_count,max_fill_distance,sup_error,exchanges_cum,stage,stage_end
//   exchanges.csv      step,agent_i,agent_j,centers_i,centers_j
//   steps.csv          step,agent,basis_count,novelty,residual,enriched
//   error_surface.csv  x1,...,xd,abs_error
//   centers_agent_<i>.csv  x1,...,xd,alpha,sample
//   manifest.txt       run id, config path, resolved config

#include <cstdint>
#include <filesystem>
#include <string>

#include "kswarm/config.hpp"
#include "kswarm/sim.hpp"

namespace kswarm {

struct RunManifest {
    std::string config_path;
    ExperimentConfig config;
    std::filesystem::path out_dir;
    std::string run_id;
};

/// FNV-1a hash of the resolved config, independent of the parallel flag.
std::string run_id(const ExperimentConfig& cfg);

void write_metrics_csv(const std::filesystem::path& file, const std::vector<MetricsRecord>& records);
void write_run_artifacts(const RunManifest& manifest, const SimResult& result);

}  // namespace kswarm
