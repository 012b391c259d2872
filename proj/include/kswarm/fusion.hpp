#pragma once

// Partition-of-unity fusion of local estimates and the snapshot exchange
// between agents that meet in overlapping subdomains.

#include <vector>

#include "kswarm/agent.hpp"
#include "kswarm/geometry.hpp"
#include "kswarm/rkhs.hpp"

namespace kswarm {

/// An agent's (centers, coefficients) as last seen by the fusing side.
struct PeerSnapshot {
    int agent_id = 0;
    KernelExpansion estimate;
    Eigen::Index taken_at = 0;

    static PeerSnapshot of(const AgentState& agent, Eigen::Index step) { return {agent.id(), agent.estimate(), step}; }
};

/// One snapshot per agent, index i holding agent i + 1.
class SnapshotStore {
public:
    SnapshotStore() = default;
    explicit SnapshotStore(const std::vector<AgentState>& agents, Eigen::Index step = 0);

    const std::vector<PeerSnapshot>& snapshots() const { return snapshots_; }
    const PeerSnapshot& operator[](std::size_t i) const { return snapshots_.at(i); }
    std::size_t size() const { return snapshots_.size(); }

    void refresh(const AgentState& agent, Eigen::Index step);
    void refresh_all(const std::vector<AgentState>& agents, Eigen::Index step);

private:
    std::vector<PeerSnapshot> snapshots_;
};

/// sum_i psi_i(x) ghat_i(x).
double fused_evaluate(const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou,
                      const Eigen::Ref<const Point>& x);

struct ReducedEvaluation {
    double value = 0.0;
    std::vector<int> contacted;  // agent ids with psi_j(x) != 0
};

/// Same value as fused_evaluate, touching only agents whose weight is
/// nonzero at x.
ReducedEvaluation fused_evaluate_reduced(const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou,
                                         const Eigen::Ref<const Point>& x);

struct ExchangeEvent {
    Eigen::Index step = 0;
    int agent_i = 0;
    int agent_j = 0;
    Eigen::Index centers_i = 0;
    Eigen::Index centers_j = 0;
};

/// Agents i and j swap snapshots when both current positions lie in
/// the intersection of their subdomains. Returns the exchanges performed.
std::vector<ExchangeEvent> overlap_exchange(const std::vector<AgentState>& agents, const Cover& cover,
                                            SnapshotStore& store, Eigen::Index step);

}  // namespace kswarm
