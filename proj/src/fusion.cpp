#include "kswarm/fusion.hpp"

#include "kswarm/errors.hpp"

namespace kswarm {

SnapshotStore::SnapshotStore(const std::vector<AgentState>& agents, Eigen::Index step) {
    snapshots_.reserve(agents.size());
    for (const auto& a : agents) snapshots_.push_back(PeerSnapshot::of(a, step));
}

void SnapshotStore::refresh(const AgentState& agent, Eigen::Index step) {
    const auto i = static_cast<std::size_t>(agent.id() - 1);
    if (agent.id() < 1 || i >= snapshots_.size()) throw InvalidArgument("snapshot store: unknown agent id");
    snapshots_[i] = PeerSnapshot::of(agent, step);
}

void SnapshotStore::refresh_all(const std::vector<AgentState>& agents, Eigen::Index step) {
    for (const auto& a : agents) refresh(a, step);
}

namespace {

void check_sizes(const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou) {
    if (static_cast<int>(snapshots.size()) != pou.cover().size())
        throw InvalidArgument("fusion: need exactly one snapshot per subdomain");
}

}  // namespace

double fused_evaluate(const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou,
                      const Eigen::Ref<const Point>& x) {
    check_sizes(snapshots, pou);
    const PouWeights w = pou_weights(pou, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const double wi = w.w(static_cast<Eigen::Index>(i));
        if (wi != 0.0) acc += wi * evaluate(snapshots[i].estimate, x);
    }
    return acc;
}

ReducedEvaluation fused_evaluate_reduced(const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou,
                                         const Eigen::Ref<const Point>& x) {
    check_sizes(snapshots, pou);
    const PouWeights w = pou_weights(pou, x);
    ReducedEvaluation out;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const double wi = w.w(static_cast<Eigen::Index>(i));
        if (wi == 0.0) continue;
        out.contacted.push_back(snapshots[i].agent_id);
        out.value += wi * evaluate(snapshots[i].estimate, x);
    }
    return out;
}

std::vector<ExchangeEvent> overlap_exchange(const std::vector<AgentState>& agents, const Cover& cover,
                                            SnapshotStore& store, Eigen::Index step) {
    if (static_cast<int>(agents.size()) != cover.size())
        throw InvalidArgument("overlap_exchange: one agent per subdomain required");
    std::vector<Point> pos;
    pos.reserve(agents.size());
    for (const auto& a : agents) pos.push_back(a.position());

    std::vector<ExchangeEvent> events;
    const auto& subs = cover.subdomains();
    for (std::size_t i = 0; i < agents.size(); ++i) {
        for (std::size_t j = i + 1; j < agents.size(); ++j) {
            const bool meet = subs[i].contains(pos[i]) && subs[j].contains(pos[i]) && subs[i].contains(pos[j]) &&
                              subs[j].contains(pos[j]);
            if (!meet) continue;
            store.refresh(agents[i], step);
            store.refresh(agents[j], step);
            events.push_back({step, agents[i].id(), agents[j].id(), agents[i].basis_count(), agents[j].basis_count()});
        }
    }
    return events;
}

}  // namespace kswarm
