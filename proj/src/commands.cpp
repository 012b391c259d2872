#include "kswarm/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kswarm/artifacts.hpp"
#include "kswarm/config.hpp"
#include "kswarm/errors.hpp"
#include "kswarm/field.hpp"
#include "kswarm/log.hpp"
#include "kswarm/sim.hpp"

namespace kswarm {

namespace fs = std::filesystem;

namespace {

ExperimentConfig resolve(const CommandOptions& opt) {
    if (opt.config_path.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = load_config(opt.config_path);
    if (opt.seed) {
        cfg.sim.field_seed = *opt.seed;
        cfg.sim.seed = *opt.seed;
    }
    if (opt.parallel) cfg.sim.parallel = *opt.parallel;
    return cfg;
}

void require_out(const CommandOptions& opt) {
    if (opt.out_dir.empty()) throw ConfigError("--out is required");
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw Error("cannot create output directory " + opt.out_dir + ": " + ec.message());
}

KernelExpansion field_for(const ExperimentConfig& cfg) {
    if (!cfg.sim.field_artifact.empty()) return read_field(cfg.sim.field_artifact);
    return synthesize_field(cfg.sim.field_spec());
}

void maybe_tune(ExperimentConfig& cfg, std::ostream& out) {
    if (cfg.epsilon_budget <= 0.0) return;
    const auto t = tune_epsilon(cfg.sim, cfg.epsilon_budget, cfg.epsilon_tolerance);
    if (!t.converged)
        log::warn("epsilon tuning did not reach the center budget; using epsilon_bar " + std::to_string(t.epsilon_bar));
    cfg.sim.stepper.epsilon_bar = t.epsilon_bar;
    out << "tuned epsilon_bar = " << std::setprecision(17) << t.epsilon_bar << " (mean centers " << t.mean_count
        << ", " << t.iterations << " iterations)\n";
}

// cfg receives the tuned threshold when tuning is configured.
SimResult run_into(ExperimentConfig& cfg, const KernelExpansion& field, const fs::path& dir,
                   const std::string& config_path, std::ostream& out) {
    maybe_tune(cfg, out);
    SimResult result = run_simulation(cfg.sim, field);
    RunManifest manifest{config_path, cfg, dir, run_id(cfg)};
    write_run_artifacts(manifest, result);
    const auto& last = result.final_record();
    out << std::setprecision(6) << "run " << manifest.run_id << ": step " << last.step
        << " mean_basis_count " << last.mean_basis_count << " max_fill_distance " << last.max_fill_distance
        << " sup_error " << last.sup_error << " exchanges " << last.exchanges_cum << "\n";
    return result;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kBadConfig;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kBadConfig;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << "\n";
        return kDiverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

std::string factor_label(double c) {
    std::ostringstream os;
    os << std::setprecision(6) << c;
    return "c_" + os.str();
}

}  // namespace

int cmd_synth_field(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentConfig cfg = resolve(opt);
        require_out(opt);
        const fs::path file = fs::path(opt.out_dir) / "field.txt";
        write_field(file.string(), synthesize_field(cfg.sim.field_spec()));
        out << "wrote " << file.string() << "\n";
        return kOk;
    });
}

int cmd_run(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ExperimentConfig cfg = resolve(opt);
        require_out(opt);
        run_into(cfg, field_for(cfg), opt.out_dir, opt.config_path, out);
        return kOk;
    });
}

int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentConfig base = resolve(opt);
        require_out(opt);
        const std::vector<double> factors = opt.factors.empty() ? base.sweep_factors : opt.factors;
        if (factors.empty()) throw ConfigError("sweep: no factors");

        // One field for every factor.
        const KernelExpansion field = field_for(base);
        const fs::path root(opt.out_dir);
        write_field((root / "field.txt").string(), field);

        std::ofstream summary(root / "summary.csv");
        if (!summary) throw Error("cannot write sweep summary");
        summary << std::setprecision(17);
        summary << "c,sigma,ell,gamma,epsilon_bar,mean_basis_count,first_stage_sup_error,final_sup_error,ratio\n";
        for (double c : factors) {
            if (!(c > 0.0)) throw ConfigError("sweep: factors must be positive");
            ExperimentConfig cfg = base;
            cfg.sim.estimator = base.sim.estimator.scaled(c);
            if (base.rescale_gamma) cfg.sim.stepper.gamma = base.sim.stepper.gamma / (c * c);
            out << "factor " << c << ": ";
            const SimResult r = run_into(cfg, field, root / factor_label(c), opt.config_path, out);
            const auto& first = r.first_stage_record();
            const auto& last = r.final_record();
            summary << c << ',' << cfg.sim.estimator.sigma << ',' << cfg.sim.estimator.ell << ','
                    << cfg.sim.stepper.gamma << ',' << cfg.sim.stepper.epsilon_bar << ',' << last.mean_basis_count << ','
                    << first.sup_error << ',' << last.sup_error << ',' << last.sup_error / first.sup_error << '\n';
        }
        out << "wrote " << (root / "summary.csv").string() << "\n";
        return kOk;
    });
}

int cmd_tune_epsilon(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ExperimentConfig cfg = resolve(opt);
        const double budget = opt.budget ? *opt.budget : (cfg.epsilon_budget > 0.0 ? cfg.epsilon_budget : 500.0);
        const auto t = tune_epsilon(cfg.sim, budget, cfg.epsilon_tolerance);
        out << std::setprecision(17) << "epsilon_bar = " << t.epsilon_bar << "\nmean_centers = " << t.mean_count
            << "\ncounts =";
        for (auto c : t.counts) out << ' ' << c;
        out << "\nconverged = " << (t.converged ? "yes" : "no") << "\n";
        if (!opt.out_dir.empty()) {
            require_out(opt);
            cfg.sim.stepper.epsilon_bar = t.epsilon_bar;
            cfg.epsilon_budget = 0.0;
            std::ofstream os(fs::path(opt.out_dir) / "config.tuned.ini");
            os << serialize_config(cfg);
        }
        return t.converged ? kOk : kFailure;
    });
}

int cmd_pe_check(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ExperimentConfig cfg = resolve(opt);
        maybe_tune(cfg, out);
        const auto report = pe_check(cfg.sim);
        std::ostringstream csv;
        csv << std::setprecision(17) << "agent,stage,resolution,centers,pe_margin\n";
        for (const auto& r : report)
            csv << r.agent << ',' << r.stage << ',' << r.resolution << ',' << r.centers << ',' << r.margin << '\n';
        out << csv.str();
        if (!opt.out_dir.empty()) {
            require_out(opt);
            std::ofstream os(fs::path(opt.out_dir) / "pe_check.csv");
            os << csv.str();
        }
        return kOk;
    });
}

}  // namespace kswarm
