#include "kswarm/artifacts.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "kswarm/errors.hpp"

namespace kswarm {

namespace fs = std::filesystem;

std::string run_id(const ExperimentConfig& cfg) {
    ExperimentConfig canonical = cfg;
    canonical.sim.parallel = false;
    const std::string text = serialize_config(canonical);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace {

std::ofstream open_csv(const fs::path& file) {
    std::ofstream os(file);
    if (!os) throw Error("cannot open " + file.string() + " for writing");
    os << std::setprecision(17);
    return os;
}

std::string coord_header(int dim) {
    std::string h;
    for (int k = 1; k <= dim; ++k) h += "x" + std::to_string(k) + ",";
    return h;
}

}  // namespace

void write_metrics_csv(const fs::path& file, const std::vector<MetricsRecord>& records) {
    auto os = open_csv(file);
    os << "step,t,mean_basis_count,max_fill_distance,sup_error,exchanges_cum,stage,stage_end\n";
    for (const auto& r : records)
        os << r.step << ',' << r.t << ',' << r.mean_basis_count << ',' << r.max_fill_distance << ',' << r.sup_error
           << ',' << r.exchanges_cum << ',' << r.stage << ',' << (r.stage_end ? 1 : 0) << '\n';
}

void write_run_artifacts(const RunManifest& manifest, const SimResult& result) {
    const fs::path& dir = manifest.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

    write_metrics_csv(dir / "metrics.csv", result.records);

    {
        auto os = open_csv(dir / "exchanges.csv");
        os << "step,agent_i,agent_j,centers_i,centers_j\n";
        for (const auto& e : result.exchanges)
            os << e.step << ',' << e.agent_i << ',' << e.agent_j << ',' << e.centers_i << ',' << e.centers_j << '\n';
    }
    {
        auto os = open_csv(dir / "steps.csv");
        os << "step,agent,basis_count,novelty,residual,enriched\n";
        for (const auto& s : result.step_log)
            os << s.step << ',' << s.agent << ',' << s.basis_count << ',' << s.novelty << ',' << s.residual << ','
               << (s.enriched ? 1 : 0) << '\n';
    }
    {
        const int d = static_cast<int>(result.eval_grid.cols());
        auto os = open_csv(dir / "error_surface.csv");
        os << coord_header(d) << "abs_error\n";
        for (Eigen::Index p = 0; p < result.eval_grid.rows(); ++p) {
            for (int k = 0; k < d; ++k) os << result.eval_grid(p, k) << ',';
            os << result.abs_error(p) << '\n';
        }
    }
    for (const auto& a : result.agents) {
        const auto& est = a.estimate();
        const int d = est.spec().dim;
        auto os = open_csv(dir / ("centers_agent_" + std::to_string(a.id()) + ".csv"));
        os << coord_header(d) << "alpha,sample\n";
        for (Eigen::Index l = 0; l < est.size(); ++l) {
            for (int k = 0; k < d; ++k) os << est.centers()(l, k) << ',';
            os << est.coefficients()(l) << ',' << a.samples()(l) << '\n';
        }
    }
    {
        std::ofstream os(dir / "manifest.txt");
        if (!os) throw Error("cannot write manifest in " + dir.string());
        os << "# run_id " << manifest.run_id << "\n# config " << manifest.config_path << "\n"
           << serialize_config(manifest.config);
    }
}

}  // namespace kswarm
