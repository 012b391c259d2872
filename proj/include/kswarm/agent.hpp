#pragma once

// One agent's online estimator: multistep coefficient evolution,
// novelty-gated basis enrichment and the interpolation reset.

#include <deque>
#include <vector>

#include "kswarm/geometry.hpp"
#include "kswarm/kernel.hpp"
#include "kswarm/random.hpp"
#include "kswarm/rkhs.hpp"

namespace kswarm {

struct StepperConfig {
    double gamma = 1.0;
    double h = 0.5;
    int q = 1;
    std::vector<double> a;  // multistep weights, newest sample first; empty selects Adams-Bashforth
    bool preconditioned = true;
    double epsilon_bar = 0.1;

    /// Weights for order q (a if given, else Adams-Bashforth).
    std::vector<double> weights() const;
    void validate() const;
};

/// Explicit Adams-Bashforth weights for q = 1..5, newest first.
std::vector<double> adams_bashforth(int q);

struct HistoryEntry {
    Point x;
    double residual = 0.0;  // frozen at the step the sample was taken
};

struct StepLog {
    int agent = 0;
    Eigen::Index step = 0;
    Eigen::Index basis_count = 0;
    double novelty = 0.0;
    double residual = 0.0;
    bool enriched = false;
};

class AgentState {
public:
    AgentState() = default;
    AgentState(int id, Rect subdomain, KernelSpec spec, PointSet trajectory = {});

    /// Agent with a prescribed basis, e.g. for studying the coefficient law
    /// in isolation. samples are the stored values at the centers.
    static AgentState with_basis(int id, Rect subdomain, KernelSpec spec, PointSet centers, Vector coefficients,
                                 Vector samples, PointSet trajectory = {});

    int id() const { return id_; }
    const Rect& subdomain() const { return subdomain_; }
    const KernelSpec& spec() const { return estimate_.spec(); }
    const KernelExpansion& estimate() const { return estimate_; }
    const Vector& samples() const { return samples_; }
    Eigen::Index basis_count() const { return estimate_.size(); }
    const GramFactor& factor() const { return factor_; }
    const std::deque<HistoryEntry>& history() const { return history_; }

    const PointSet& trajectory() const { return trajectory_; }
    Eigen::Index cursor() const { return cursor_; }
    bool exhausted() const { return cursor_ >= trajectory_.rows(); }
    /// Last visited waypoint (the first waypoint before any step).
    Point position() const;

    void set_trajectory(PointSet trajectory, Eigen::Index cursor = 0);
    void advance_cursor() { ++cursor_; }

    /// Initial basis: centers X0, stored samples Y0, coefficients
    /// interpolating Y0.
    void initialize(const PointSet& x0, const Vector& y0);

    /// Replaces the coefficient vector (length must match the basis).
    void set_coefficients(Vector alpha);

    // Mutators used by the update operations.
    void push_history(HistoryEntry e, int q);
    void admit(const Eigen::Ref<const Point>& x, double y, const Vector& w, double pivot);

private:
    int id_ = 0;
    Rect subdomain_;
    KernelExpansion estimate_;
    Vector samples_;
    GramFactor factor_;
    std::deque<HistoryEntry> history_;
    PointSet trajectory_;
    Eigen::Index cursor_ = 0;
};

/// Records the residual of (x, y) against the current estimate and advances
/// the coefficients by one multistep update over the history window:
///   preconditioned: alpha += h gamma sum_s a_s K(Xi,Xi)^{-1} K(Xi,x_s) e_s
///   raw:            alpha += h gamma sum_s a_s K(Xi,x_s) e_s
/// With fewer than q stored samples the highest available order is used.
/// Returns the residual of the new sample. No-op on an empty basis apart
/// from recording history.
double coefficient_step(AgentState& agent, const Eigen::Ref<const Point>& x, double y, const StepperConfig& cfg);

/// sqrt of the power function of the agent's centers at x.
double novelty(const AgentState& agent, const Eigen::Ref<const Point>& x);

/// Adds (x, y) to the basis and resets the coefficients to interpolate the
/// stored samples. Throws PreconditionError unless novelty(x) > epsilon_bar.
void enrich(AgentState& agent, const Eigen::Ref<const Point>& x, double y, const StepperConfig& cfg);

/// One pass of the estimator loop: sample at the next waypoint, update
/// coefficients, then enrich if the point is novel.
StepLog agent_update(AgentState& agent, const StepperConfig& cfg, const KernelExpansion& field, double noise_std,
                     CounterRng& rng);

/// Centers a novelty-gated agent would admit along a path. Admission does
/// not depend on sampled values, so this matches a full run exactly. Stops
/// early once more than max_centers are admitted (0 = no limit).
PointSet admit_centers(const KernelSpec& spec, const PointSet& path, double epsilon_bar,
                       Eigen::Index max_centers = 0);

/// Throws DivergenceError when the coefficients blow up relative to the data.
void check_divergence(const AgentState& agent, const StepperConfig& cfg);

}  // namespace kswarm
