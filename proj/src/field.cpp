#include "kswarm/field.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "kswarm/errors.hpp"
#include "kswarm/log.hpp"

namespace kswarm {

FieldSpec FieldSpec::on_grid(const KernelSpec& spec, const Rect& omega, Eigen::Index per_dim, std::uint64_t seed,
                             double noise_std) {
    FieldSpec fs;
    fs.spec = spec;
    fs.grid = grid_points(omega, std::vector<Eigen::Index>(omega.dim(), per_dim));
    fs.seed = seed;
    fs.noise_std = noise_std;
    return fs;
}

KernelExpansion synthesize_field(const FieldSpec& fs) {
    fs.spec.validate();
    if (fs.grid.rows() == 0) throw InvalidArgument("synthesize_field: empty grid");
    const Matrix k = gram(fs.spec, fs.grid);
    auto [llt, jitter] = factor_spd(k, default_jitter(fs.spec), "field synthesis Gram");
    if (jitter > 0.0) log::warn("field synthesis Gram needed jitter " + std::to_string(jitter));

    CounterRng rng(fs.seed);
    Vector z(fs.grid.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    const Vector values = llt.matrixL() * z;
    const auto alpha = solve_spd(k, values, default_jitter(fs.spec), "field synthesis Gram");
    return KernelExpansion(fs.spec, fs.grid, alpha.x.col(0));
}

double sample_field(const KernelExpansion& g, const Eigen::Ref<const Point>& x, double noise_std, CounterRng& rng) {
    const double v = evaluate(g, x);
    if (noise_std == 0.0) return v;
    return v + noise_std * rng.normal();
}

void write_field(std::ostream& os, const KernelExpansion& g) {
    const auto& s = g.spec();
    os << std::setprecision(17);
    os << "kernel " << to_string(s.family) << " sigma=" << s.sigma << " ell=" << s.ell << " dim=" << s.dim << '\n';
    for (Eigen::Index l = 0; l < g.size(); ++l) {
        for (int k = 0; k < s.dim; ++k) os << g.centers()(l, k) << ' ';
        os << g.coefficients()(l) << ' ' << evaluate(g, g.centers().row(l).transpose()) << '\n';
    }
}

void write_field(const std::string& path, const KernelExpansion& g) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_field(os, g);
    if (!os) throw Error("write to " + path + " failed");
}

namespace {

double parse_number(const std::string& tok, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError("'" + tok + "' is not a number", line);
    }
    if (used != tok.size()) throw ParseError("'" + tok + "' is not a number", line);
    return v;
}

double parse_keyed(const std::string& tok, const std::string& key, int line) {
    if (tok.rfind(key + "=", 0) != 0) throw ParseError("expected " + key + "=<value>, got '" + tok + "'", line);
    return parse_number(tok.substr(key.size() + 1), line);
}

}  // namespace

KernelExpansion read_field(std::istream& is) {
    std::string text;
    int line = 1;
    if (!std::getline(is, text)) throw ParseError("missing kernel line", line);
    std::istringstream head(text);
    std::string word, family, sigma, ell, dim, extra;
    head >> word >> family >> sigma >> ell >> dim;
    if (word != "kernel" || dim.empty() || (head >> extra))
        throw ParseError("expected 'kernel <family> sigma=<s> ell=<l> dim=<d>'", line);
    const auto fam = parse_kernel_family(family);
    if (!fam) throw ParseError("unknown kernel family '" + family + "'", line);
    const double d = parse_keyed(dim, "dim", line);
    if (d < 1 || d != static_cast<int>(d)) throw ParseError("dim must be a positive integer", line);
    KernelSpec spec;
    try {
        spec = KernelSpec(*fam, parse_keyed(sigma, "sigma", line), parse_keyed(ell, "ell", line), static_cast<int>(d));
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line);
    }

    PointSet centers(0, spec.dim);
    std::vector<double> alpha;
    while (std::getline(is, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(text);
        std::vector<std::string> toks;
        for (std::string t; row >> t;) toks.push_back(t);
        if (static_cast<int>(toks.size()) != spec.dim + 2)
            throw ParseError("expected " + std::to_string(spec.dim + 2) + " columns, got " +
                                 std::to_string(toks.size()),
                             line);
        Point x(spec.dim);
        for (int k = 0; k < spec.dim; ++k) x(k) = parse_number(toks[k], line);
        append_row(centers, x);
        alpha.push_back(parse_number(toks[spec.dim], line));
        parse_number(toks[spec.dim + 1], line);
    }
    try {
        return KernelExpansion(spec, std::move(centers), Eigen::Map<const Vector>(alpha.data(), alpha.size()));
    } catch (const Error& e) {
        throw ParseError(e.what(), line);
    }
}

KernelExpansion read_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open field artifact " + path);
    return read_field(is);
}

}  // namespace kswarm
