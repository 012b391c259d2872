#pragma once

// Ground-truth fields: seeded Gaussian-process draws stored exactly as
// kernel expansions.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "kswarm/geometry.hpp"
#include "kswarm/kernel.hpp"
#include "kswarm/random.hpp"
#include "kswarm/rkhs.hpp"

namespace kswarm {

struct FieldSpec {
    KernelSpec spec;
    PointSet grid;  // synthesis centers, distinct
    std::uint64_t seed = 0;
    double noise_std = 0.0;

    /// n x n x ... grid covering omega, faces included.
    static FieldSpec on_grid(const KernelSpec& spec, const Rect& omega, Eigen::Index per_dim, std::uint64_t seed,
                             double noise_std = 0.0);
};

/// Draws g = chol(K) z with z from CounterRng(seed) and returns the
/// expansion whose coefficients are K^{-1} g, so it interpolates the draw.
KernelExpansion synthesize_field(const FieldSpec& fs);

/// g(x) plus optional Gaussian noise.
double sample_field(const KernelExpansion& g, const Eigen::Ref<const Point>& x, double noise_std, CounterRng& rng);

/// Text artifact: a kernel line, then one line per center holding its
/// coordinates, its coefficient and the field value there.
void write_field(std::ostream& os, const KernelExpansion& g);
void write_field(const std::string& path, const KernelExpansion& g);
KernelExpansion read_field(std::istream& is);
KernelExpansion read_field(const std::string& path);

}  // namespace kswarm
