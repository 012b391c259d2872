#include "kswarm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <thread>

#include <Eigen/Eigenvalues>

#include "kswarm/errors.hpp"
#include "kswarm/log.hpp"

namespace kswarm {

FieldSpec SimConfig::field_spec() const {
    return FieldSpec::on_grid(field_kernel, cover.omega(), field_grid_n, field_seed, noise_std);
}

PartitionOfUnity SimConfig::pou() const {
    if (pou_kind == PouKind::custom_table) return PartitionOfUnity(cover, pou_table);
    return PartitionOfUnity(cover);
}

Trajectory SimConfig::trajectory(int agent_index) const {
    const Rect& sub = cover.subdomains().at(static_cast<std::size_t>(agent_index));
    Trajectory t = refine_schedule(sub, resolutions);
    if (path_start == PathStart::mirror) {
        std::uint64_t mask = 0;
        const Point mid = cover.omega().center();
        for (int k = 0; k < sub.dim(); ++k)
            if (sub.center()(k) > mid(k)) mask |= std::uint64_t{1} << k;
        t.points = reflect_path(t.points, sub, mask);
    }
    return t;
}

void SimConfig::validate() const {
    field_kernel.validate();
    estimator.validate();
    stepper.validate();
    if (cover.size() == 0) throw ConfigError("config: cover has no subdomains");
    if (field_kernel.dim != cover.dim() || estimator.dim != cover.dim())
        throw ConfigError("config: kernel dimension differs from domain dimension");
    if (field_artifact.empty() && field_grid_n < 2) throw ConfigError("config: field grid needs >= 2 points per side");
    if (resolutions.empty()) throw ConfigError("config: empty resolution schedule");
    for (std::size_t s = 0; s < resolutions.size(); ++s) {
        if (!(resolutions[s] > 0.0)) throw ConfigError("config: resolutions must be positive");
        if (s > 0 && !(resolutions[s] < resolutions[s - 1]))
            throw ConfigError("config: resolutions must be strictly decreasing");
    }
    if (eval_grid_n < 2) throw ConfigError("config: eval grid needs >= 2 points per side");
    if (!(fill_resolution > 0.0)) throw ConfigError("config: fill_resolution must be positive");
    if (fuse_every < 0) throw ConfigError("config: fuse_every must be >= 0");
    if (!(noise_std >= 0.0)) throw ConfigError("config: noise_std must be >= 0");
    pou();
}

const MetricsRecord& SimResult::first_stage_record() const {
    for (const auto& r : records)
        if (r.stage_end) return r;
    throw Error("no stage-final record");
}

double sup_error(const KernelExpansion& g, const std::vector<PeerSnapshot>& snapshots, const PartitionOfUnity& pou,
                 const PointSet& grid) {
    if (grid.rows() == 0) throw InvalidArgument("sup_error: empty grid");
    double worst = 0.0;
    for (Eigen::Index p = 0; p < grid.rows(); ++p) {
        const Point x = grid.row(p).transpose();
        worst = std::max(worst, std::abs(evaluate(g, x) - fused_evaluate(snapshots, pou, x)));
    }
    return worst;
}

namespace {

struct RunContext {
    const SimConfig& cfg;
    const KernelExpansion& field;
    PartitionOfUnity pou;
    PointSet eval_grid;
    Vector field_on_grid;
};

Vector fused_on_grid(const RunContext& ctx, const SnapshotStore& store) {
    Vector out(ctx.eval_grid.rows());
    for (Eigen::Index p = 0; p < ctx.eval_grid.rows(); ++p)
        out(p) = fused_evaluate(store.snapshots(), ctx.pou, ctx.eval_grid.row(p).transpose());
    return out;
}

MetricsRecord make_record(const RunContext& ctx, const std::vector<AgentState>& agents, const SnapshotStore& store,
                          Eigen::Index step, int stage, bool stage_end, Eigen::Index exchanges) {
    MetricsRecord r;
    r.step = step;
    r.t = static_cast<double>(step) * ctx.cfg.stepper.h;
    r.stage = stage;
    r.stage_end = stage_end;
    r.exchanges_cum = exchanges;
    double total = 0.0;
    for (const auto& a : agents) {
        r.basis_counts.push_back(a.basis_count());
        total += static_cast<double>(a.basis_count());
        r.max_fill_distance = std::max(
            r.max_fill_distance, fill_distance(a.estimate().centers(), a.subdomain(), ctx.cfg.fill_resolution).value);
    }
    r.mean_basis_count = total / static_cast<double>(agents.size());
    r.sup_error = (fused_on_grid(ctx, store) - ctx.field_on_grid).cwiseAbs().maxCoeff();
    return r;
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg, const std::optional<KernelExpansion>& field, const StepObserver& observer) {
    cfg.validate();
    SimResult result;
    if (field) {
        result.field = *field;
    } else if (!cfg.field_artifact.empty()) {
        result.field = read_field(cfg.field_artifact);
    } else {
        result.field = synthesize_field(cfg.field_spec());
    }
    if (result.field.spec().dim != cfg.cover.dim()) throw ConfigError("field dimension differs from domain");

    RunContext ctx{cfg, result.field, cfg.pou(), {}, {}};
    ctx.eval_grid = grid_points(cfg.cover.omega(), std::vector<Eigen::Index>(cfg.cover.dim(), cfg.eval_grid_n));
    ctx.field_on_grid = evaluate_all(result.field, ctx.eval_grid);

    const int n = cfg.cover.size();
    std::vector<AgentState> agents;
    std::vector<CounterRng> rngs;
    std::vector<Eigen::Index> stage_steps(cfg.resolutions.size(), 0);
    Eigen::Index total_steps = 0;
    for (int i = 0; i < n; ++i) {
        Trajectory traj = cfg.trajectory(i);
        for (std::size_t s = 0; s < traj.stage_ends.size(); ++s)
            stage_steps[s] = std::max(stage_steps[s], traj.stage_ends[s] - 1);
        total_steps = std::max(total_steps, traj.points.rows() - 1);
        rngs.emplace_back(cfg.seed, static_cast<std::uint64_t>(i + 1));
        agents.emplace_back(i + 1, cfg.cover.subdomains()[i], cfg.estimator, std::move(traj.points));
        // The first waypoint seeds the basis.
        AgentState& a = agents.back();
        PointSet x0 = a.trajectory().topRows(1);
        Vector y0(1);
        y0(0) = sample_field(result.field, x0.row(0).transpose(), cfg.noise_std, rngs.back());
        a.initialize(x0, y0);
        a.advance_cursor();
    }

    SnapshotStore store(agents, 0);
    Eigen::Index exchanges = 0;
    std::size_t next_stage = 0;
    result.records.push_back(make_record(ctx, agents, store, 0, 0, false, 0));

    auto after_step = [&](Eigen::Index k, const std::vector<StepLog>& logs) {
        for (std::size_t i = 0; i < logs.size(); ++i) {
            if (logs[i].agent == 0) continue;
            result.step_log.push_back(logs[i]);
            if (observer) observer(agents[i], logs[i]);
        }
        const auto events = overlap_exchange(agents, cfg.cover, store, k);
        exchanges += static_cast<Eigen::Index>(events.size());
        result.exchanges.insert(result.exchanges.end(), events.begin(), events.end());

        bool stage_end = false;
        while (next_stage < stage_steps.size() && stage_steps[next_stage] <= k) {
            stage_end = true;
            ++next_stage;
        }
        const bool fuse = stage_end || (cfg.fuse_every > 0 && k % cfg.fuse_every == 0);
        if (fuse) {
            store.refresh_all(agents, k);
            const int stage = static_cast<int>(std::min(next_stage + (stage_end ? 0 : 1), stage_steps.size()));
            result.records.push_back(make_record(ctx, agents, store, k, stage, stage_end, exchanges));
            log::info("step " + std::to_string(k) + " sup_error " + std::to_string(result.records.back().sup_error));
        }
    };

    auto step_agent = [&](std::size_t i) -> StepLog {
        if (agents[i].exhausted()) return StepLog{};
        return agent_update(agents[i], cfg.stepper, result.field, cfg.noise_std, rngs[i]);
    };

    std::vector<StepLog> logs(agents.size());
    if (!cfg.parallel || n == 1) {
        for (Eigen::Index k = 1; k <= total_steps; ++k) {
            for (std::size_t i = 0; i < agents.size(); ++i) logs[i] = step_agent(i);
            after_step(k, logs);
        }
    } else {
        // Workers own one agent each between barriers; the coordinator does
        // exchange and metrics while the workers wait.
        std::barrier sync(n + 1);
        std::atomic<bool> stop{false};
        std::vector<std::exception_ptr> errors(agents.size());
        std::vector<std::jthread> workers;
        for (int i = 0; i < n; ++i) {
            workers.emplace_back([&, i] {
                const auto idx = static_cast<std::size_t>(i);
                for (Eigen::Index k = 1; k <= total_steps; ++k) {
                    sync.arrive_and_wait();
                    if (stop.load()) return;
                    try {
                        logs[idx] = step_agent(idx);
                    } catch (...) {
                        errors[idx] = std::current_exception();
                    }
                    sync.arrive_and_wait();
                }
            });
        }
        std::exception_ptr failure;
        for (Eigen::Index k = 1; k <= total_steps; ++k) {
            sync.arrive_and_wait();
            sync.arrive_and_wait();
            for (auto& e : errors)
                if (e && !failure) failure = e;
            if (!failure) {
                try {
                    after_step(k, logs);
                } catch (...) {
                    failure = std::current_exception();
                }
            }
            if (failure) {
                if (k < total_steps) {
                    stop.store(true);
                    sync.arrive_and_wait();
                }
                break;
            }
        }
        workers.clear();
        if (failure) std::rethrow_exception(failure);
    }

    if (result.records.back().step != total_steps || !result.records.back().stage_end) {
        store.refresh_all(agents, total_steps);
        result.records.push_back(make_record(ctx, agents, store, total_steps,
                                             static_cast<int>(stage_steps.size()), true, exchanges));
    }
    result.abs_error = (fused_on_grid(ctx, store) - ctx.field_on_grid).cwiseAbs();
    result.eval_grid = std::move(ctx.eval_grid);
    result.agents = std::move(agents);
    result.snapshots = std::move(store);
    return result;
}

double pe_margin(const PointSet& segment, const PointSet& z, const KernelSpec& spec, double h) {
    if (segment.rows() == 0) throw InvalidArgument("pe_margin: empty trajectory segment");
    if (z.rows() == 0) throw InvalidArgument("pe_margin: empty center set");
    if (!(h > 0.0)) throw InvalidArgument("pe_margin: h must be positive");
    detail::require_distinct(z);
    auto [llt, jitter] = factor_spd(gram(spec, z), default_jitter(spec), "PE Gram");
    if (jitter > 0.0) log::warn("pe_margin: Gram needed jitter " + std::to_string(jitter));
    // B = L^{-1} [k(Z,x_1) ... k(Z,x_n)], so M' = h B B^T is similar to K^{-1} M.
    Matrix b = gram(spec, z, segment);
    llt.matrixL().solveInPlace(b);
    const Matrix c = h * (b * b.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("pe_margin: eigenvalue solver failed");
    const double beta = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, es.eigenvalues().maxCoeff());
    if (beta >= 0.0) return beta;
    if (beta >= -1e-10 * scale) return 0.0;
    throw ConsistencyError("pe_margin: negative generalized eigenvalue " + std::to_string(beta));
}

RateFit rate_fit(const std::vector<MetricsRecord>& records) {
    const bool any_flagged = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.stage_end; });
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        if (any_flagged && !r.stage_end) continue;
        if (!(r.sup_error > 0.0) || !(r.max_fill_distance > 0.0) || !std::isfinite(r.max_fill_distance)) continue;
        xs.push_back(std::log(r.max_fill_distance));
        ys.push_back(std::log(r.sup_error));
    }
    if (xs.size() < 3) throw InvalidArgument("rate_fit: need at least three usable records");
    const auto m = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("rate_fit: fill distances are all equal");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = static_cast<int>(xs.size());
    return fit;
}

std::vector<Eigen::Index> dry_run_counts(const SimConfig& cfg, double epsilon_bar, Eigen::Index cap) {
    std::vector<Eigen::Index> counts;
    for (int i = 0; i < cfg.cover.size(); ++i)
        counts.push_back(admit_centers(cfg.estimator, cfg.trajectory(i).points, epsilon_bar, cap).rows());
    return counts;
}

EpsilonTuning tune_epsilon(const SimConfig& cfg, double budget, double tolerance) {
    if (!(budget >= 1.0)) throw InvalidArgument("tune_epsilon: budget must be >= 1");
    if (!(tolerance > 0.0)) throw InvalidArgument("tune_epsilon: tolerance must be positive");
    const double sigma = cfg.estimator.sigma;
    double lo = std::log(1e-9 * sigma);  // many centers
    double hi = std::log(sigma);         // one center
    const auto cap = static_cast<Eigen::Index>(std::ceil(2.0 * budget));
    EpsilonTuning out;
    for (out.iterations = 1; out.iterations <= 60; ++out.iterations) {
        const double mid = 0.5 * (lo + hi);
        out.epsilon_bar = std::exp(mid);
        out.counts = dry_run_counts(cfg, out.epsilon_bar, cap);
        double sum = 0.0;
        for (auto c : out.counts) sum += static_cast<double>(c);
        out.mean_count = sum / static_cast<double>(out.counts.size());
        if (std::abs(out.mean_count - budget) <= tolerance * budget) {
            out.converged = true;
            break;
        }
        if (out.mean_count > budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.iterations = std::min(out.iterations, 60);
    return out;
}

std::vector<PeReport> pe_check(const SimConfig& cfg) {
    cfg.validate();
    std::vector<PeReport> out;
    for (int i = 0; i < cfg.cover.size(); ++i) {
        const Trajectory traj = cfg.trajectory(i);
        for (std::size_t s = 0; s < traj.stage_ends.size(); ++s) {
            const Eigen::Index end = traj.stage_ends[s];
            const PointSet segment = traj.points.topRows(end);
            const PointSet prefix = admit_centers(cfg.estimator, segment, cfg.stepper.epsilon_bar);
            PeReport r;
            r.agent = i + 1;
            r.stage = static_cast<int>(s) + 1;
            r.resolution = cfg.resolutions[s];
            r.centers = prefix.rows();
            r.margin = pe_margin(segment, prefix, cfg.estimator, cfg.stepper.h);
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace kswarm
