#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "kswarm/kernel.hpp"

using namespace kswarm;

namespace {

Point pt(double a, double b) { return (Point(2) << a, b).finished(); }

const KernelSpec kMatern{KernelFamily::matern52, 1.0, 1.0, 2};
const KernelSpec kGauss{KernelFamily::gaussian, 1.0, 1.0, 2};
const KernelSpec kWendland{KernelFamily::wendland_c2, 1.0, 1.0, 2};

PointSet random_separated(std::mt19937_64& gen, int n, double extent, double min_sep) {
    std::uniform_real_distribution<double> u(0.0, extent);
    PointSet z(0, 2);
    while (z.rows() < n) {
        const Point x = pt(u(gen), u(gen));
        bool ok = true;
        for (Eigen::Index i = 0; i < z.rows(); ++i) ok = ok && (z.row(i).transpose() - x).norm() >= min_sep;
        if (ok) append_row(z, x);
    }
    return z;
}

}  // namespace

TEST_CASE("matern52 values") {
    CHECK(eval(kMatern, pt(0.3, -1.2), pt(0.3, -1.2)) == doctest::Approx(1.0).epsilon(1e-15));
    // r = 1: (1 + sqrt5 + 5/3) exp(-sqrt5)
    const double s5 = std::sqrt(5.0);
    const double expected = (1.0 + s5 + 5.0 / 3.0) * std::exp(-s5);
    CHECK(expected == doctest::Approx(0.523994).epsilon(1e-5));
    CHECK(eval(kMatern, pt(0, 0), pt(0.6, 0.8)) == doctest::Approx(expected).epsilon(1e-14));

    const KernelSpec scaled{KernelFamily::matern52, 2.0, 3.0, 2};
    const double r = 1.7;
    const double a = s5 * r / 3.0;
    CHECK(eval(scaled, pt(0, 0), pt(r, 0)) == doctest::Approx(4.0 * (1 + a + 5 * r * r / 27.0) * std::exp(-a)));
}

TEST_CASE("gaussian and wendland values") {
    CHECK(eval(kGauss, pt(0, 0), pt(1, 0)) == doctest::Approx(std::exp(-0.5)));
    CHECK(eval(kWendland, pt(0, 0), pt(1.5, 0)) == 0.0);
    CHECK(eval(kWendland, pt(0, 0), pt(1.0, 0)) == 0.0);
    // (1 - 0.5)^4 (4 * 0.5 + 1)
    CHECK(eval(kWendland, pt(0, 0), pt(0.5, 0)) == doctest::Approx(0.1875));
    const KernelSpec w2{KernelFamily::wendland_c2, 3.0, 2.0, 2};
    CHECK(eval(w2, pt(1, 1), pt(1, 1)) == doctest::Approx(9.0));
}

TEST_CASE("eval is symmetric and normalized for every family") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n(0.0, 2.0);
    for (auto fam : {KernelFamily::matern52, KernelFamily::gaussian, KernelFamily::wendland_c2}) {
        const KernelSpec spec{fam, 1.3, 2.1, 2};
        for (int i = 0; i < 50; ++i) {
            const Point x = pt(n(gen), n(gen));
            const Point y = pt(n(gen), n(gen));
            CHECK(eval(spec, x, y) == eval(spec, y, x));
            CHECK(eval(spec, x, x) == doctest::Approx(1.69));
        }
    }
}

TEST_CASE("eval rejects bad input") {
    CHECK_THROWS_AS(eval(kMatern, pt(0, 0), Point::Zero(3)), DimensionError);
    CHECK_THROWS_AS(eval(kMatern, pt(0, NAN), pt(0, 0)), InvalidArgument);
    CHECK_THROWS_AS(eval(kMatern, pt(INFINITY, 0), pt(0, 0)), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::matern52, 0.0, 1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::matern52, 1.0, -1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::matern52, 1.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("eval is Lipschitz in r with the analytic derivative bound") {
    // Finite-difference sweep of |k(r) - k(r + d)| / d, compared against the
    // maximum of |k'(r)| from the closed-form derivatives.
    const double d = 1e-7;
    struct Case {
        KernelSpec spec;
        double dk_max;
    };
    const double s5 = std::sqrt(5.0);
    auto matern_dk = [&](double r) { return 5.0 * r / 3.0 * (1 + s5 * r) * std::exp(-s5 * r); };
    auto gauss_dk = [](double r) { return r * std::exp(-r * r / 2); };
    auto wend_dk = [](double r) { return r < 1 ? 20 * r * std::pow(1 - r, 3) : 0.0; };
    double m_max = 0, g_max = 0, w_max = 0;
    for (double r = 0; r <= 4.0; r += 1e-4) {
        m_max = std::max(m_max, matern_dk(r));
        g_max = std::max(g_max, gauss_dk(r));
        w_max = std::max(w_max, wend_dk(r));
    }
    for (const Case& c : {Case{kMatern, m_max}, Case{kGauss, g_max}, Case{kWendland, w_max}}) {
        double lipschitz = 0.0;
        for (double r = 0; r <= 4.0; r += 1e-3) {
            const double diff = std::abs(eval_radial(c.spec, r) - eval_radial(c.spec, r + d));
            lipschitz = std::max(lipschitz, diff / d);
        }
        CAPTURE(to_string(c.spec.family));
        CHECK(lipschitz == doctest::Approx(c.dk_max).epsilon(1e-3));
        CHECK(lipschitz < 2.2);
    }
}

TEST_CASE("gram shapes and entries") {
    PointSet one(1, 2);
    one << 0.4, 0.9;
    const Matrix g1 = gram(kMatern, one);
    REQUIRE(g1.rows() == 1);
    CHECK(g1(0, 0) == 1.0);

    PointSet empty(0, 2);
    PointSet three(3, 2);
    three << 0, 0, 1, 0, 0.5, 0.7;
    CHECK(gram(kMatern, empty, three).rows() == 0);
    CHECK(gram(kMatern, empty, three).cols() == 3);
    CHECK(gram(kMatern, three, empty).cols() == 0);

    const Matrix g3 = gram(kMatern, three);
    CHECK((g3 - g3.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(g3(i, j) == eval(kMatern, three.row(i), three.row(j)));
    Eigen::SelfAdjointEigenSolver<Matrix> es(g3);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    const Matrix rect = gram(kGauss, three, one);
    CHECK(rect.rows() == 3);
    CHECK(rect(2, 0) == eval(kGauss, three.row(2), one.row(0)));
}

TEST_CASE("solve_spd") {
    const Matrix id = Matrix::Identity(3, 3);
    const Vector b = Vector::LinSpaced(3, 1.0, 3.0);
    CHECK((solve_spd(id, b, 0.0).x.col(0) - b).norm() == 0.0);

    Matrix d(2, 2);
    d << 1, 0, 0, 4;
    Vector rhs(2);
    rhs << 1, 2;
    const auto sol = solve_spd(d, rhs, 0.0);
    CHECK(sol.x(0, 0) == doctest::Approx(1.0));
    CHECK(sol.x(1, 0) == doctest::Approx(0.5));
    CHECK(sol.jitter == 0.0);

    std::mt19937_64 gen(11);
    std::normal_distribution<double> n;
    Matrix a(5, 5);
    for (int i = 0; i < 25; ++i) a(i / 5, i % 5) = n(gen);
    const Matrix spd = a * a.transpose() + 0.5 * Matrix::Identity(5, 5);
    Matrix bb(5, 2);
    for (int i = 0; i < 10; ++i) bb(i / 2, i % 2) = n(gen);
    const auto s = solve_spd(spd, bb, 0.0);
    CHECK(s.jitter == 0.0);
    CHECK((spd * s.x - bb).norm() <= 1e-10 * bb.norm());
}

TEST_CASE("solve_spd jitter escalation") {
    Matrix singular(2, 2);
    singular << 1, 1, 1, 1;
    Vector b(2);
    b << 1, 1;
    const auto s = solve_spd(singular, b, 1e-12);
    CHECK(s.jitter >= 1e-12);
    CHECK(s.jitter <= 1e-4);
    CHECK(std::isfinite(s.x.norm()));

    CHECK_THROWS_AS(solve_spd(singular, b, 0.0), SingularGramError);
    Matrix indefinite(2, 2);
    indefinite << 1, 0, 0, -1;
    CHECK_THROWS_AS(solve_spd(indefinite, b, 1e-12), SingularGramError);
    CHECK_THROWS_AS(solve_spd(Matrix(2, 3), b, 0.0), DimensionError);
    CHECK_THROWS_AS(solve_spd(singular, Vector(3), 0.0), DimensionError);
}

TEST_CASE("distinct center sets factor with tiny jitter") {
    std::mt19937_64 gen(5);
    for (auto fam : {KernelFamily::matern52, KernelFamily::gaussian}) {
        const KernelSpec spec{fam, 1.5, 1.0, 2};
        for (int trial = 0; trial < 20; ++trial) {
            const PointSet z = random_separated(gen, 12, 2.0, spec.ell / 100.0);
            const auto [llt, jitter] = factor_spd(gram(spec, z), default_jitter(spec));
            CHECK(jitter <= 1e-8 * spec.variance());
        }
    }
}

TEST_CASE("solve_spd reproduces B when no jitter was needed") {
    std::mt19937_64 gen(9);
    const PointSet z = random_separated(gen, 15, 5.0, 0.3);
    const Matrix g = gram(kMatern, z);
    Vector b(z.rows());
    std::normal_distribution<double> n;
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(gen);
    const auto s = solve_spd(g, b, default_jitter(kMatern));
    REQUIRE(s.jitter == 0.0);
    CHECK((g * s.x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("GramFactor grows like a full Cholesky factor") {
    std::mt19937_64 gen(21);
    const PointSet z = random_separated(gen, 10, 3.0, 0.2);
    GramFactor f;
    PointSet sofar(0, 2);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const Vector w = f.forward(kernel_column(kMatern, sofar, z.row(i).transpose()));
        f.append(w, std::sqrt(kMatern.variance() - w.squaredNorm()));
        append_row(sofar, z.row(i));
    }
    const Matrix g = gram(kMatern, z);
    const Matrix l = f.lower();
    CHECK((l * l.transpose() - g).cwiseAbs().maxCoeff() < 1e-12);
    const Vector b = Vector::Ones(z.rows());
    CHECK((g * f.solve(b) - b).norm() < 1e-9);
    CHECK_THROWS_AS(f.append(Vector::Zero(3), 1.0), DimensionError);
    CHECK_THROWS_AS(f.append(Vector::Zero(f.size()), 0.0), SingularGramError);
}

TEST_CASE("kernel templates instantiate for long double") {
    const KernelSpecT<long double> spec{KernelFamily::matern52, 1.0L, 1.0L, 1};
    PointSetT<long double> z(2, 1);
    z << 0.0L, 1.0L;
    const auto g = gram(spec, z);
    CHECK(static_cast<double>(g(0, 1)) == doctest::Approx(0.523994).epsilon(1e-5));
}
