#pragma once

// Experiment orchestration: stepping the agents, fusing, metrics and
// diagnostics (persistence of excitation, empirical rates, threshold tuning).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kswarm/agent.hpp"
#include "kswarm/field.hpp"
#include "kswarm/fusion.hpp"
#include "kswarm/geometry.hpp"

namespace kswarm {

enum class PathStart {
    lo,      // every sweep starts at its subdomain's lo corner
    mirror,  // sweeps start at the corner facing away from omega's center
};

struct SimConfig {
    // Ground truth.
    KernelSpec field_kernel{KernelFamily::matern52, 1.0, 1.0, 2};
    Eigen::Index field_grid_n = 30;
    std::uint64_t field_seed = 1;
    double noise_std = 0.0;
    std::string field_artifact;  // if set, the field is loaded from this file

    Cover cover;
    PouKind pou_kind = PouKind::overlap_average;
    PartitionOfUnity::Table pou_table;

    StepperConfig stepper;
    KernelSpec estimator{KernelFamily::matern52, 1.0, 1.0, 2};

    std::vector<double> resolutions{1.0, 0.5, 0.25};
    PathStart path_start = PathStart::mirror;

    Eigen::Index eval_grid_n = 100;
    double fill_resolution = 0.05;
    Eigen::Index fuse_every = 0;  // 0 fuses at stage ends only
    std::uint64_t seed = 1;       // measurement-noise streams
    bool parallel = false;

    FieldSpec field_spec() const;
    PartitionOfUnity pou() const;
    /// Per-agent trajectory including stage boundaries.
    Trajectory trajectory(int agent_index) const;
    void validate() const;
};

struct MetricsRecord {
    Eigen::Index step = 0;
    double t = 0.0;
    int stage = 0;  // 1-based stage in progress (0 for the initial record)
    bool stage_end = false;
    double mean_basis_count = 0.0;
    double max_fill_distance = 0.0;
    double sup_error = 0.0;
    Eigen::Index exchanges_cum = 0;
    std::vector<Eigen::Index> basis_counts;
};

struct SimResult {
    KernelExpansion field;
    std::vector<MetricsRecord> records;
    std::vector<ExchangeEvent> exchanges;
    std::vector<StepLog> step_log;
    std::vector<AgentState> agents;
    SnapshotStore snapshots;
    PointSet eval_grid;
    Vector abs_error;  // |ghat - g| on eval_grid after the final step

    const MetricsRecord& first_stage_record() const;
    const MetricsRecord& final_record() const { return records.back(); }
};

/// Called after each agent update on the coordinating thread, in agent order.
using StepObserver = std::function<void(const AgentState&, const StepLog&)>;

/// Runs the full experiment. If field is given it is used as the ground
/// truth instead of synthesizing one from the config.
SimResult run_simulation(const SimConfig& cfg, const std::optional<KernelExpansion>& field = std::nullopt,
                         const StepObserver& observer = {});

/// max over the grid of |g(x) - fused(x)|.
double sup_error(const KernelExpansion& g, const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou,
                 const PointSet& grid);

/// Persistence-of-excitation margin of a trajectory segment on span{k(z,.)}:
/// the smallest generalized eigenvalue of (h sum_k k(Z,x_k) k(x_k,Z), K(Z,Z)).
double pe_margin(const PointSet& segment, const PointSet& z, const KernelSpec& spec, double h);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

/// Least-squares fit of log(sup_error) against log(max_fill_distance) over
/// stage-final records (all records when none are flagged); needs three
/// usable records. Records with a
/// non-positive error or fill distance are skipped.
RateFit rate_fit(const std::vector<MetricsRecord>& records);

struct EpsilonTuning {
    double epsilon_bar = 0.0;
    double mean_count = 0.0;
    std::vector<Eigen::Index> counts;
    int iterations = 0;
    bool converged = false;
};

/// Bisection on log(epsilon_bar) so that the mean number of admitted centers
/// per agent over the full schedule is within tolerance * budget of budget.
EpsilonTuning tune_epsilon(const SimConfig& cfg, double budget, double tolerance = 0.1);

/// Mean admitted-center count per agent for a threshold (geometry only).
std::vector<Eigen::Index> dry_run_counts(const SimConfig& cfg, double epsilon_bar, Eigen::Index cap = 0);

struct PeReport {
    int agent = 0;
    int stage = 0;
    double resolution = 0.0;
    Eigen::Index centers = 0;
    double margin = 0.0;
};

/// pe_margin of the trajectory up to each stage end against the centers
/// admitted by then. A single sweep alone can have fewer waypoints than the
/// accumulated centers, which forces a zero margin.
std::vector<PeReport> pe_check(const SimConfig& cfg);

}  // namespace kswarm
