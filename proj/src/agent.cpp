#include "kswarm/agent.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "kswarm/errors.hpp"
#include "kswarm/field.hpp"
#include "kswarm/log.hpp"

namespace kswarm {

std::vector<double> adams_bashforth(int q) {
    switch (q) {
        case 1: return {1.0};
        case 2: return {3.0 / 2.0, -1.0 / 2.0};
        case 3: return {23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0};
        case 4: return {55.0 / 24.0, -59.0 / 24.0, 37.0 / 24.0, -9.0 / 24.0};
        case 5: return {1901.0 / 720.0, -2774.0 / 720.0, 2616.0 / 720.0, -1274.0 / 720.0, 251.0 / 720.0};
        default: throw InvalidArgument("adams_bashforth: order must be in 1..5");
    }
}

std::vector<double> StepperConfig::weights() const { return a.empty() ? adams_bashforth(q) : a; }

void StepperConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("stepper: gamma must be positive");
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("stepper: h must be positive");
    if (q < 1 || q > 5) throw InvalidArgument("stepper: q must be in 1..5");
    if (!a.empty() && static_cast<int>(a.size()) != q)
        throw InvalidArgument("stepper: a must have q entries");
    if (!(epsilon_bar > 0.0)) throw InvalidArgument("stepper: epsilon_bar must be positive");
    const auto w = weights();
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12)
        log::warn("stepper: multistep weights sum to " + std::to_string(sum) + ", not 1");
}

AgentState::AgentState(int id, Rect subdomain, KernelSpec spec, PointSet trajectory)
    : id_(id), subdomain_(std::move(subdomain)), estimate_(spec), samples_(0) {
    if (subdomain_.dim() != spec.dim) throw DimensionError("agent: subdomain and kernel dimensions differ");
    set_trajectory(std::move(trajectory));
}

AgentState AgentState::with_basis(int id, Rect subdomain, KernelSpec spec, PointSet centers, Vector coefficients,
                                  Vector samples, PointSet trajectory) {
    AgentState a(id, std::move(subdomain), spec, std::move(trajectory));
    a.initialize(centers, samples);
    a.set_coefficients(std::move(coefficients));
    return a;
}

Point AgentState::position() const {
    if (trajectory_.rows() == 0) return subdomain_.lo;
    const Eigen::Index i = cursor_ == 0 ? 0 : std::min(cursor_ - 1, trajectory_.rows() - 1);
    return trajectory_.row(i).transpose();
}

void AgentState::set_trajectory(PointSet trajectory, Eigen::Index cursor) {
    if (trajectory.rows() > 0 && trajectory.cols() != spec().dim)
        throw DimensionError("agent: trajectory dimension mismatch");
    for (Eigen::Index p = 0; p < trajectory.rows(); ++p)
        if (!subdomain_.contains(trajectory.row(p)))
            throw InvalidArgument("agent " + std::to_string(id_) + ": trajectory leaves its subdomain at waypoint " +
                                  std::to_string(p));
    trajectory_ = std::move(trajectory);
    if (trajectory_.rows() == 0) trajectory_.resize(0, spec().dim);
    cursor_ = cursor;
}

void AgentState::initialize(const PointSet& x0, const Vector& y0) {
    if (x0.rows() != y0.size()) throw DimensionError("initialize: centers and samples differ in length");
    estimate_ = KernelExpansion(spec());
    samples_.resize(0);
    factor_.clear();
    history_.clear();
    for (Eigen::Index i = 0; i < x0.rows(); ++i) {
        if (!subdomain_.contains(x0.row(i)))
            throw InvalidArgument("initialize: center outside the agent's subdomain");
        const Vector k = kernel_column(spec(), estimate_.centers(), x0.row(i).transpose());
        const Vector w = factor_.forward(k);
        const double p2 = spec().variance() - w.squaredNorm();
        if (!(p2 > 0.0)) throw SingularGramError("initialize: initial centers are not linearly independent");
        admit(x0.row(i).transpose(), y0(i), w, std::sqrt(p2));
    }
}

void AgentState::set_coefficients(Vector alpha) { estimate_.set_coefficients(std::move(alpha)); }

void AgentState::push_history(HistoryEntry e, int q) {
    history_.push_front(std::move(e));
    while (static_cast<int>(history_.size()) > q) history_.pop_back();
}

void AgentState::admit(const Eigen::Ref<const Point>& x, double y, const Vector& w, double pivot) {
    estimate_.add_center(x, 0.0);
    samples_.conservativeResize(samples_.size() + 1);
    samples_(samples_.size() - 1) = y;
    factor_.append(w, pivot);
    estimate_.set_coefficients(factor_.solve(samples_));
}

double coefficient_step(AgentState& agent, const Eigen::Ref<const Point>& x, double y, const StepperConfig& cfg) {
    const KernelSpec& spec = agent.spec();
    const PointSet& centers = agent.estimate().centers();
    Vector k = kernel_column(spec, centers, x);
    const double residual = y - agent.estimate().coefficients().dot(k);
    agent.push_history({x, residual}, cfg.q);
    if (agent.basis_count() == 0) return residual;

    const auto& hist = agent.history();
    const int order = static_cast<int>(hist.size());
    const std::vector<double> a = order < cfg.q ? adams_bashforth(order) : cfg.weights();

    Vector drive = (a[0] * hist[0].residual) * k;
    for (int s = 1; s < order; ++s) {
        if (hist[s].residual == 0.0 || a[s] == 0.0) continue;
        drive += (a[s] * hist[s].residual) * kernel_column(spec, centers, hist[s].x);
    }
    if (cfg.preconditioned) drive = agent.factor().solve(drive);
    agent.set_coefficients(agent.estimate().coefficients() + (cfg.h * cfg.gamma) * drive);
    return residual;
}

namespace {

// Novelty from the incremental factor; also returns w = L^{-1} k(Xi, x).
double novelty_with(const GramFactor& factor, const KernelSpec& spec, const PointSet& centers,
                    const Eigen::Ref<const Point>& x, Vector& w) {
    // Exactly zero at a stored center; sqrt would magnify roundoff to ~1e-8.
    if (detail::contains_row(centers, x)) {
        w.resize(0);
        return 0.0;
    }
    w = factor.forward(kernel_column(spec, centers, x));
    const double p2 = detail::clamp_quadratic(spec.variance() - w.squaredNorm(), spec.variance(), "novelty");
    return std::sqrt(p2);
}

}  // namespace

double novelty(const AgentState& agent, const Eigen::Ref<const Point>& x) {
    Vector w;
    return novelty_with(agent.factor(), agent.spec(), agent.estimate().centers(), x, w);
}

void enrich(AgentState& agent, const Eigen::Ref<const Point>& x, double y, const StepperConfig& cfg) {
    Vector w;
    const double eps = novelty_with(agent.factor(), agent.spec(), agent.estimate().centers(), x, w);
    if (!(eps > cfg.epsilon_bar))
        throw PreconditionError("enrich: novelty " + std::to_string(eps) + " does not exceed epsilon_bar " +
                                std::to_string(cfg.epsilon_bar));
    if (!agent.subdomain().contains(x)) throw PreconditionError("enrich: point outside the agent's subdomain");
    agent.admit(x, y, w, eps);
}

void check_divergence(const AgentState& agent, const StepperConfig& cfg) {
    if (agent.basis_count() == 0) return;
    const double alpha_max = agent.estimate().coefficients().cwiseAbs().maxCoeff();
    const double data_max = agent.samples().size() ? agent.samples().cwiseAbs().maxCoeff() : 0.0;
    if (!(alpha_max <= 1e6 * (data_max + 1.0))) {
        std::ostringstream msg;
        msg << "agent " << agent.id() << " diverged: max |alpha| = " << alpha_max << " with max |sample| = "
            << data_max << "; h*gamma = " << cfg.h * cfg.gamma << " is likely too large for the explicit integrator";
        throw DivergenceError(msg.str());
    }
}

StepLog agent_update(AgentState& agent, const StepperConfig& cfg, const KernelExpansion& field, double noise_std,
                     CounterRng& rng) {
    if (agent.exhausted()) throw PreconditionError("agent_update: trajectory exhausted");
    const Eigen::Index step = agent.cursor();
    const Point x = agent.trajectory().row(step).transpose();
    agent.advance_cursor();
    const double y = sample_field(field, x, noise_std, rng);

    StepLog out;
    out.agent = agent.id();
    out.step = step;
    out.residual = coefficient_step(agent, x, y, cfg);

    Vector w;
    out.novelty = novelty_with(agent.factor(), agent.spec(), agent.estimate().centers(), x, w);
    if (out.novelty > cfg.epsilon_bar) {
        agent.admit(x, y, w, out.novelty);
        out.enriched = true;
    }
    check_divergence(agent, cfg);
    out.basis_count = agent.basis_count();
    return out;
}

PointSet admit_centers(const KernelSpec& spec, const PointSet& path, double epsilon_bar, Eigen::Index max_centers) {
    PointSet centers(0, spec.dim);
    GramFactor factor;
    Vector w;
    for (Eigen::Index p = 0; p < path.rows(); ++p) {
        const double eps = novelty_with(factor, spec, centers, path.row(p).transpose(), w);
        if (eps > epsilon_bar) {
            factor.append(w, eps);
            append_row(centers, path.row(p));
            if (max_centers > 0 && centers.rows() > max_centers) break;
        }
    }
    return centers;
}

}  // namespace kswarm
