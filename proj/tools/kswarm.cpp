// kswarm: decentralized kernel field estimation experiments.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kswarm/commands.hpp"
#include "kswarm/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Decentralized multi-agent kernel field estimation"};
    app.require_subcommand(1);

    kswarm::CommandOptions opt;
    std::string parallel;
    std::string factors;
    std::uint64_t seed = 0;
    double budget = 0.0;

    auto common = [&](CLI::App* cmd, bool out_required) {
        cmd->add_option("--config", opt.config_path, "experiment config file")->required()->check(CLI::ExistingFile);
        auto* out = cmd->add_option("--out", opt.out_dir, "output directory");
        if (out_required) out->required();
        cmd->add_option("--seed", seed, "overrides field and run seeds");
        cmd->add_option("--parallel", parallel, "one worker per agent")->check(CLI::IsMember({"on", "off"}));
    };

    auto* synth = app.add_subcommand("synth-field", "synthesize the ground-truth field artifact");
    common(synth, true);
    auto* run = app.add_subcommand("run", "run one experiment");
    common(run, true);
    auto* sweep = app.add_subcommand("sweep", "run once per estimator hyperparameter factor c");
    common(sweep, true);
    sweep->add_option("--factors", factors, "comma separated factors, e.g. 1/4,1/3,1/2,2,3,4");
    auto* tune = app.add_subcommand("tune-epsilon", "tune the novelty threshold to a center budget");
    common(tune, false);
    tune->add_option("--budget", budget, "target centers per agent");
    auto* pe = app.add_subcommand("pe-check", "persistence-of-excitation margin per agent and stage");
    common(pe, false);

    CLI11_PARSE(app, argc, argv);

    if (app.get_subcommands().front()->count("--seed")) opt.seed = seed;
    if (!parallel.empty()) opt.parallel = parallel == "on";
    if (tune->count("--budget")) opt.budget = budget;
    if (!factors.empty()) {
        std::stringstream in(factors);
        try {
            for (std::string tok; std::getline(in, tok, ',');) opt.factors.push_back(kswarm::parse_real(tok));
        } catch (const std::exception& e) {
            std::cerr << "--factors: " << e.what() << "\n";
            return kswarm::kBadConfig;
        }
    }

    if (synth->parsed()) return kswarm::cmd_synth_field(opt, std::cout, std::cerr);
    if (run->parsed()) return kswarm::cmd_run(opt, std::cout, std::cerr);
    if (sweep->parsed()) return kswarm::cmd_sweep(opt, std::cout, std::cerr);
    if (tune->parsed()) return kswarm::cmd_tune_epsilon(opt, std::cout, std::cerr);
    return kswarm::cmd_pe_check(opt, std::cout, std::cerr);
}
