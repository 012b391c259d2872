#include "kswarm/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kswarm/errors.hpp"

namespace kswarm {

double parse_real(const std::string& token) {
    const auto slash = token.find('/');
    auto number = [](const std::string& t) {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    };
    try {
        if (slash == std::string::npos) return number(token);
        const double den = number(token.substr(slash + 1));
        if (den == 0.0) throw std::invalid_argument(token);
        return number(token.substr(0, slash)) / den;
    } catch (const std::exception&) {
        throw InvalidArgument("'" + token + "' is not a number");
    }
}

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Sections tokenize(std::istream& is) {
    Sections out;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const std::string text = trim(raw.substr(0, raw.find('#')));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ParseError("unterminated section header", line);
            section = trim(text.substr(1, text.size() - 2));
            if (section.empty()) throw ParseError("empty section name", line);
            out[section];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        if (section.empty()) throw ParseError("key outside of any section", line);
        const std::string key = trim(text.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", line);
        if (out[section].count(key)) throw ParseError("duplicate key " + section + "." + key, line);
        out[section][key] = {trim(text.substr(eq + 1)), line};
    }
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

// Reads typed values and accumulates every violation instead of stopping
// at the first one.
class Reader {
public:
    explicit Reader(Sections s) : sections_(std::move(s)) {}

    bool has(const std::string& sec, const std::string& key) const {
        auto it = sections_.find(sec);
        return it != sections_.end() && it->second.count(key);
    }

    const Entry* find(const std::string& sec, const std::string& key) {
        used_.insert(sec + "." + key);
        auto it = sections_.find(sec);
        if (it == sections_.end()) return nullptr;
        auto kv = it->second.find(key);
        return kv == it->second.end() ? nullptr : &kv->second;
    }

    void missing(const std::string& sec, const std::string& key) {
        errors_.push_back("missing required key " + sec + "." + key);
    }

    void bad(const std::string& sec, const std::string& key, const Entry& e, const std::string& why) {
        errors_.push_back(sec + "." + key + " (line " + std::to_string(e.line) + "): " + why);
    }

    void error(const std::string& msg) { errors_.push_back(msg); }

    template <class T, class Fn>
    void read(const std::string& sec, const std::string& key, T& out, bool required, Fn convert) {
        const Entry* e = find(sec, key);
        if (e == nullptr) {
            if (required) missing(sec, key);
            return;
        }
        try {
            out = convert(e->value);
        } catch (const std::exception& ex) {
            bad(sec, key, *e, ex.what());
        }
    }

    void real(const std::string& sec, const std::string& key, double& out, bool required = false) {
        read(sec, key, out, required, [](const std::string& v) {
            const auto toks = split(v);
            if (toks.size() != 1) throw InvalidArgument("expected one number");
            return parse_real(toks[0]);
        });
    }

    void reals(const std::string& sec, const std::string& key, std::vector<double>& out, bool required = false) {
        read(sec, key, out, required, [](const std::string& v) {
            std::vector<double> r;
            for (const auto& t : split(v)) r.push_back(parse_real(t));
            if (r.empty()) throw InvalidArgument("expected at least one number");
            return r;
        });
    }

    template <class Int>
    void integer(const std::string& sec, const std::string& key, Int& out, bool required = false) {
        read(sec, key, out, required, [](const std::string& v) {
            const auto toks = split(v);
            if (toks.size() != 1) throw InvalidArgument("expected one integer");
            std::size_t used = 0;
            const unsigned long long u = std::stoull(toks[0], &used);
            if (used != toks[0].size() || toks[0].front() == '-') throw InvalidArgument("expected a non-negative integer");
            return static_cast<Int>(u);
        });
    }

    void boolean(const std::string& sec, const std::string& key, bool& out) {
        read(sec, key, out, false, [](const std::string& v) {
            if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
            if (v == "false" || v == "off" || v == "no" || v == "0") return false;
            throw InvalidArgument("expected on/off");
        });
    }

    void text(const std::string& sec, const std::string& key, std::string& out, bool required = false) {
        read(sec, key, out, required, [](const std::string& v) { return v; });
    }

    void unknown_keys() {
        for (const auto& [sec, kv] : sections_)
            for (const auto& [key, e] : kv)
                if (!used_.count(sec + "." + key))
                    errors_.push_back("unknown key " + sec + "." + key + " (line " + std::to_string(e.line) + ")");
    }

    const Sections& sections() const { return sections_; }
    const std::vector<std::string>& errors() const { return errors_; }

private:
    Sections sections_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

KernelFamily family_of(const std::string& v) {
    const auto f = parse_kernel_family(v);
    if (!f) throw InvalidArgument("unknown kernel family '" + v + "'");
    return *f;
}

std::uint64_t parse_mask(const std::string& label) {
    std::uint64_t mask = 0;
    std::istringstream in(label);
    for (std::string part; std::getline(in, part, '+');) {
        const int i = std::stoi(part);
        if (i < 1 || i > 64) throw InvalidArgument("agent index out of range in '" + label + "'");
        mask |= std::uint64_t{1} << (i - 1);
    }
    return mask;
}

std::string mask_label(std::uint64_t mask) {
    std::string out;
    for (int i = 0; i < 64; ++i) {
        if (!((mask >> i) & 1u)) continue;
        if (!out.empty()) out += '+';
        out += std::to_string(i + 1);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
    Reader r(tokenize(is));
    ExperimentConfig cfg;
    SimConfig& sim = cfg.sim;

    std::string kernel = "matern52";
    double sigma = 1.0, ell = 1.0;
    r.text("field", "kernel", kernel);
    r.real("field", "sigma", sigma);
    r.real("field", "ell", ell);
    r.integer("field", "grid_n", sim.field_grid_n);
    r.integer("field", "seed", sim.field_seed);
    r.real("field", "noise_std", sim.noise_std);
    r.text("field", "artifact", sim.field_artifact);

    std::vector<double> lo, hi;
    r.reals("domain", "lo", lo, true);
    r.reals("domain", "hi", hi, true);
    const int dim = static_cast<int>(lo.size());
    if (!lo.empty() && !hi.empty() && lo.size() != hi.size()) r.error("domain.lo and domain.hi differ in dimension");

    KernelFamily field_family = KernelFamily::matern52;
    try {
        field_family = family_of(kernel);
    } catch (const std::exception& e) {
        r.error(std::string("field.kernel: ") + e.what());
    }

    std::string est_kernel = kernel;
    double est_sigma = sigma, est_ell = ell;
    r.text("estimator", "kernel", est_kernel);
    r.real("estimator", "sigma", est_sigma);
    r.real("estimator", "ell", est_ell);
    KernelFamily est_family = field_family;
    try {
        est_family = family_of(est_kernel);
    } catch (const std::exception& e) {
        r.error(std::string("estimator.kernel: ") + e.what());
    }

    std::string cover_kind = "orthants";
    double overlap = 0.2;
    r.text("cover", "kind", cover_kind);
    r.real("cover", "overlap", overlap);
    std::vector<std::vector<double>> explicit_subs;
    if (cover_kind == "explicit") {
        for (int i = 1;; ++i) {
            const std::string key = "subdomain." + std::to_string(i);
            if (!r.has("cover", key)) break;
            std::vector<double> box;
            r.reals("cover", key, box);
            explicit_subs.push_back(box);
        }
        if (explicit_subs.empty()) r.error("cover.kind = explicit needs cover.subdomain.1, cover.subdomain.2, ...");
    } else if (cover_kind != "orthants") {
        r.error("cover.kind: expected orthants or explicit, got '" + cover_kind + "'");
    }

    std::string pou_kind = "overlap_average";
    r.text("pou", "kind", pou_kind);
    if (pou_kind == "custom_table") {
        sim.pou_kind = PouKind::custom_table;
        if (auto it = r.sections().find("pou"); it != r.sections().end()) {
            for (const auto& [key, e] : it->second) {
                if (key.rfind("table.", 0) != 0) continue;
                std::vector<double> w;
                r.reals("pou", key, w);
                try {
                    sim.pou_table[parse_mask(key.substr(6))] = w;
                } catch (const std::exception& ex) {
                    r.bad("pou", key, e, ex.what());
                }
            }
        }
    } else if (pou_kind != "overlap_average") {
        r.error("pou.kind: expected overlap_average or custom_table, got '" + pou_kind + "'");
    }

    StepperConfig& st = sim.stepper;
    r.real("stepper", "epsilon_budget", cfg.epsilon_budget);
    r.real("stepper", "epsilon_tolerance", cfg.epsilon_tolerance);
    r.real("stepper", "gamma", st.gamma, true);
    r.real("stepper", "h", st.h, true);
    r.real("stepper", "epsilon_bar", st.epsilon_bar, cfg.epsilon_budget <= 0.0);
    r.integer("stepper", "q", st.q);
    r.reals("stepper", "a", st.a);
    r.boolean("stepper", "preconditioned", st.preconditioned);

    r.reals("schedule", "resolutions", sim.resolutions, true);
    std::string start = "mirror";
    r.text("schedule", "start", start);
    if (start == "lo") {
        sim.path_start = PathStart::lo;
    } else if (start != "mirror") {
        r.error("schedule.start: expected mirror or lo, got '" + start + "'");
    }

    r.integer("metrics", "eval_grid_n", sim.eval_grid_n);
    r.real("metrics", "fill_resolution", sim.fill_resolution);
    r.integer("metrics", "fuse_every", sim.fuse_every);

    r.integer("run", "seed", sim.seed);
    r.boolean("run", "parallel", sim.parallel);

    r.reals("sweep", "factors", cfg.sweep_factors);
    r.boolean("sweep", "rescale_gamma", cfg.rescale_gamma);

    r.unknown_keys();

    // Structural checks only make sense once the fields parsed.
    if (r.errors().empty()) {
        try {
            sim.field_kernel = KernelSpec(field_family, sigma, ell, dim);
            sim.estimator = KernelSpec(est_family, est_sigma, est_ell, dim);
            Rect omega(Eigen::Map<const Point>(lo.data(), dim), Eigen::Map<const Point>(hi.data(), dim));
            if (cover_kind == "orthants") {
                sim.cover = Cover::orthants(omega, overlap);
            } else {
                std::vector<Rect> subs;
                for (std::size_t i = 0; i < explicit_subs.size(); ++i) {
                    const auto& b = explicit_subs[i];
                    if (static_cast<int>(b.size()) != 2 * dim)
                        throw ConfigError("cover.subdomain." + std::to_string(i + 1) + ": expected " +
                                          std::to_string(2 * dim) + " numbers (lo then hi)");
                    subs.emplace_back(Eigen::Map<const Point>(b.data(), dim), Eigen::Map<const Point>(b.data() + dim, dim));
                }
                sim.cover = Cover(omega, std::move(subs));
            }
            if (cfg.epsilon_budget > 0.0 && !r.has("stepper", "epsilon_bar")) st.epsilon_bar = sim.estimator.sigma;
            sim.validate();
            if (cfg.epsilon_budget < 0.0) throw ConfigError("stepper.epsilon_budget must be >= 0");
            for (double c : cfg.sweep_factors)
                if (!(c > 0.0)) throw ConfigError("sweep.factors must be positive");
        } catch (const Error& e) {
            r.error(e.what());
        }
    }

    if (!r.errors().empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : r.errors()) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    const SimConfig& sim = cfg.sim;
    std::ostringstream os;
    os.precision(17);
    auto vec = [&](const auto& v) {
        std::ostringstream s;
        s.precision(17);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(v.size()); ++i) s << (i ? " " : "") << v[i];
        return s.str();
    };
    os << "[field]\n"
       << "kernel = " << to_string(sim.field_kernel.family) << "\n"
       << "sigma = " << sim.field_kernel.sigma << "\n"
       << "ell = " << sim.field_kernel.ell << "\n"
       << "grid_n = " << sim.field_grid_n << "\n"
       << "seed = " << sim.field_seed << "\n"
       << "noise_std = " << sim.noise_std << "\n";
    if (!sim.field_artifact.empty()) os << "artifact = " << sim.field_artifact << "\n";

    const Rect& omega = sim.cover.omega();
    os << "\n[domain]\nlo = " << vec(omega.lo) << "\nhi = " << vec(omega.hi) << "\n";

    os << "\n[cover]\nkind = explicit\n";
    for (int i = 0; i < sim.cover.size(); ++i) {
        const Rect& s = sim.cover.subdomains()[i];
        os << "subdomain." << i + 1 << " = " << vec(s.lo) << " " << vec(s.hi) << "\n";
    }

    os << "\n[pou]\nkind = " << (sim.pou_kind == PouKind::custom_table ? "custom_table" : "overlap_average") << "\n";
    for (const auto& [mask, w] : sim.pou_table) os << "table." << mask_label(mask) << " = " << vec(w) << "\n";

    const StepperConfig& st = sim.stepper;
    os << "\n[stepper]\n"
       << "gamma = " << st.gamma << "\n"
       << "h = " << st.h << "\n"
       << "q = " << st.q << "\n";
    if (!st.a.empty()) os << "a = " << vec(st.a) << "\n";
    os << "preconditioned = " << (st.preconditioned ? "on" : "off") << "\n"
       << "epsilon_bar = " << st.epsilon_bar << "\n";
    if (cfg.epsilon_budget > 0.0)
        os << "epsilon_budget = " << cfg.epsilon_budget << "\nepsilon_tolerance = " << cfg.epsilon_tolerance << "\n";

    os << "\n[estimator]\n"
       << "kernel = " << to_string(sim.estimator.family) << "\n"
       << "sigma = " << sim.estimator.sigma << "\n"
       << "ell = " << sim.estimator.ell << "\n";

    os << "\n[schedule]\nresolutions = " << vec(sim.resolutions) << "\n"
       << "start = " << (sim.path_start == PathStart::mirror ? "mirror" : "lo") << "\n";

    os << "\n[metrics]\n"
       << "eval_grid_n = " << sim.eval_grid_n << "\n"
       << "fill_resolution = " << sim.fill_resolution << "\n"
       << "fuse_every = " << sim.fuse_every << "\n";

    os << "\n[run]\nseed = " << sim.seed << "\nparallel = " << (sim.parallel ? "on" : "off") << "\n";

    os << "\n[sweep]\nfactors = " << vec(cfg.sweep_factors) << "\n"
       << "rescale_gamma = " << (cfg.rescale_gamma ? "on" : "off") << "\n";
    return os.str();
}

}  // namespace kswarm
