#include <doctest.h>

#include <cmath>
#include <random>

#include "kswarm/errors.hpp"
#include "kswarm/geometry.hpp"

using namespace kswarm;

namespace {

Point pt(double a, double b) { return (Point(2) << a, b).finished(); }

Rect box(double x0, double y0, double x1, double y1) { return Rect(pt(x0, y0), pt(x1, y1)); }

Cover default_cover() { return Cover::orthants(box(0, 0, 10, 10), 0.2); }

Vector weights(double a, double b, double c, double d) { return (Vector(4) << a, b, c, d).finished(); }

}  // namespace

TEST_CASE("rect validation") {
    CHECK_THROWS_AS(box(0, 0, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(box(1, 0, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(Rect(pt(0, 0), Point::Ones(3)), DimensionError);
    const Rect r = box(0, 0, 2, 1);
    CHECK(r.contains(pt(2, 1)));
    CHECK_FALSE(r.contains(pt(2.0001, 1)));
    CHECK(r.contains(box(0.5, 0.5, 1, 1)));
    CHECK_FALSE(r.intersect(box(3, 0, 4, 1)).is_valid());
}

TEST_CASE("orthant cover with 20 percent overlap") {
    const Cover c = default_cover();
    REQUIRE(c.size() == 4);
    CHECK(c.subdomains()[0] == box(0, 0, 6, 6));
    CHECK(c.subdomains()[1] == box(4, 0, 10, 6));
    CHECK(c.subdomains()[2] == box(0, 4, 6, 10));
    CHECK(c.subdomains()[3] == box(4, 4, 10, 10));
    CHECK(c.membership(pt(5, 5)) == 0b1111u);
    CHECK(c.membership(pt(1, 1)) == 0b0001u);
    CHECK(c.membership(pt(11, 1)) == 0u);
}

TEST_CASE("cover rejects subdomains outside omega and gaps") {
    CHECK_THROWS_AS(Cover(box(0, 0, 10, 10), {box(0, 0, 11, 10)}), InvalidArgument);
    CHECK_THROWS_AS(Cover(box(0, 0, 10, 10), {box(0, 0, 4, 10), box(6, 0, 10, 10)}), InvalidArgument);
    CHECK_NOTHROW(Cover(box(0, 0, 10, 10), {box(0, 0, 5, 10), box(5, 0, 10, 10)}));
}

TEST_CASE("overlap average weights") {
    const PartitionOfUnity pou(default_cover());
    CHECK(pou_weights(pou, pt(1, 1)).w == weights(1, 0, 0, 0));
    CHECK(pou_weights(pou, pt(5, 1)).w == weights(0.5, 0.5, 0, 0));
    CHECK(pou_weights(pou, pt(5, 5)).w == weights(0.25, 0.25, 0.25, 0.25));
    CHECK(pou_weights(pou, pt(9, 9)).w == weights(0, 0, 0, 1));
    CHECK(pou_weights(pou, pt(1, 5)).w == weights(0.5, 0, 0.5, 0));
    // Closed rectangles: the boundary x = 6 still belongs to the first subdomain.
    CHECK(pou_weights(pou, pt(6, 1)).w == weights(0.5, 0.5, 0, 0));

    const PouWeights out = pou_weights(pou, pt(-1, 3));
    CHECK_FALSE(out.inside);
    CHECK(out.w.isZero());
}

TEST_CASE("overlap average is a partition of unity on a 200 x 200 grid") {
    const Cover c = default_cover();
    const PartitionOfUnity pou(c);
    const PointSet g = grid_points(c.omega(), {200, 200});
    REQUIRE(g.rows() == 40000);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const Point x = g.row(i).transpose();
        const PouWeights w = pou_weights(pou, x);
        REQUIRE(w.inside);
        CHECK(w.w.sum() == doctest::Approx(1.0).epsilon(1e-15));
        for (int k = 0; k < 4; ++k) {
            CHECK(w.w(k) >= 0.0);
            CHECK(w.w(k) <= 1.0);
            if (w.w(k) > 0) CHECK(c.subdomains()[k].contains(x));
        }
    }
}

TEST_CASE("custom table overrides listed patterns") {
    PartitionOfUnity::Table table;
    table[0b0011] = {0.8, 0.2, 0.0, 0.0};
    const PartitionOfUnity pou(default_cover(), table);
    CHECK(pou.kind() == PouKind::custom_table);
    CHECK(pou_weights(pou, pt(5, 1)).w == weights(0.8, 0.2, 0, 0));
    CHECK(pou_weights(pou, pt(5, 5)).w == weights(0.25, 0.25, 0.25, 0.25));

    PartitionOfUnity::Table bad_sum{{0b0011, {0.8, 0.3, 0.0, 0.0}}};
    CHECK_THROWS_AS(PartitionOfUnity(default_cover(), bad_sum), InvalidArgument);
    PartitionOfUnity::Table bad_support{{0b0011, {0.5, 0.0, 0.5, 0.0}}};
    CHECK_THROWS_AS(PartitionOfUnity(default_cover(), bad_support), InvalidArgument);
    PartitionOfUnity::Table bad_len{{0b0011, {0.5, 0.5}}};
    CHECK_THROWS_AS(PartitionOfUnity(default_cover(), bad_len), InvalidArgument);
}

TEST_CASE("grids") {
    const PointSet g = grid_points(box(0, 0, 1, 2), {2, 3});
    REQUIRE(g.rows() == 6);
    CHECK(g.row(0) == pt(0, 0).transpose());
    CHECK(g.row(1) == pt(1, 0).transpose());
    CHECK(g.row(5) == pt(1, 2).transpose());
    const auto counts = grid_counts(box(0, 0, 1, 2), 0.3);
    CHECK(counts == std::vector<Eigen::Index>{5, 8});
    CHECK(grid_counts(box(0, 0, 1, 1), 0.5) == std::vector<Eigen::Index>{3, 3});
}

TEST_CASE("fill distance") {
    const Rect a = box(0, 0, 1, 1);
    const PointSet g = grid_points(a, 0.1);
    CHECK(fill_distance(g, a, 0.1).value == 0.0);

    PointSet center(1, 2);
    center << 0.5, 0.5;
    const FillDistance f = fill_distance(center, a, 0.01);
    CHECK(f.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(f.grid_bound == doctest::Approx(0.01 * std::sqrt(2.0) / 2));

    const FillDistance e = fill_distance(PointSet(0, 2), a, 0.1);
    CHECK(e.empty);
    CHECK(std::isinf(e.value));
    CHECK_THROWS_AS(fill_distance(center, a, 0.0), InvalidArgument);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0, 1);
    PointSet z(0, 2);
    double prev = INFINITY;
    for (int i = 0; i < 30; ++i) {
        append_row(z, pt(u(gen), u(gen)));
        const double v = fill_distance(z, a, 0.02).value;
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("fill distance pruning agrees with a brute-force scan") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0, 3);
    const Rect a = box(0, 0, 3, 3);
    for (int trial = 0; trial < 5; ++trial) {
        PointSet z(40, 2);
        for (int i = 0; i < 40; ++i) z.row(i) << u(gen), u(gen);
        const PointSet g = grid_points(a, 0.05);
        double brute = 0;
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            brute = std::max(brute, (z.rowwise() - g.row(i)).rowwise().norm().minCoeff());
        CHECK(fill_distance(z, a, 0.05).value == doctest::Approx(brute).epsilon(1e-14));
    }
}

TEST_CASE("lawnmower paths") {
    const Rect a = box(0, 0, 1, 1);
    const PointSet p1 = lawnmower_path(a, 1.0);
    PointSet expected(4, 2);
    expected << 0, 0, 1, 0, 1, 1, 0, 1;
    CHECK(p1 == expected);

    const PointSet p2 = lawnmower_path(a, 0.5);
    REQUIRE(p2.rows() == 9);
    for (Eigen::Index i = 1; i < p2.rows(); ++i)
        CHECK((p2.row(i) - p2.row(i - 1)).norm() == doctest::Approx(0.5));
    for (Eigen::Index i = 0; i < p2.rows(); ++i) CHECK(a.contains(p2.row(i).transpose()));

    // Spacing is at most the resolution and every grid vertex appears once.
    const Rect b = box(2, 1, 5, 3);
    const PointSet p3 = lawnmower_path(b, 0.7);
    const auto counts = grid_counts(b, 0.7);
    CHECK(p3.rows() == counts[0] * counts[1]);
    for (Eigen::Index i = 1; i < p3.rows(); ++i) CHECK((p3.row(i) - p3.row(i - 1)).norm() <= 0.7 + 1e-12);
    CHECK(fill_distance(p3, b, 0.01).value <= 0.7 * std::sqrt(2.0) / 2 + 0.01);
    CHECK_THROWS_AS(lawnmower_path(a, -1.0), InvalidArgument);
}

TEST_CASE("lawnmower in three dimensions snakes through every layer") {
    const Rect a(Point::Zero(3), Point::Ones(3));
    const PointSet p = lawnmower_path(a, 1.0);
    REQUIRE(p.rows() == 8);
    for (Eigen::Index i = 1; i < p.rows(); ++i) CHECK((p.row(i) - p.row(i - 1)).norm() == doctest::Approx(1.0));
}

TEST_CASE("reflect_path") {
    const Rect a = box(0, 0, 1, 1);
    const PointSet p = lawnmower_path(a, 1.0);
    const PointSet r = reflect_path(p, a, 0b01);
    CHECK(r.row(0) == pt(1, 0).transpose());
    CHECK(r.row(1) == pt(0, 0).transpose());
    CHECK(reflect_path(p, a, 0) == p);
    CHECK(reflect_path(reflect_path(p, a, 0b11), a, 0b11) == p);
}

TEST_CASE("refine_schedule") {
    const Rect a = box(0, 0, 1, 1);
    const Trajectory t1 = refine_schedule(a, {1.0});
    CHECK(t1.points == lawnmower_path(a, 1.0));
    const Trajectory t2 = refine_schedule(a, {1.0, 0.5});
    CHECK(t2.points.rows() == 13);
    CHECK(t2.stage_ends == std::vector<Eigen::Index>{4, 13});
    CHECK_THROWS_AS(refine_schedule(a, {0.5, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(refine_schedule(a, {0.5, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(refine_schedule(a, {}), InvalidArgument);

    const Trajectory t = refine_schedule(box(0, 0, 6, 6), {1, 0.7, 0.45, 0.3, 0.2});
    double prev = INFINITY;
    for (Eigen::Index end : t.stage_ends) {
        const double v = fill_distance(t.points.topRows(end), box(0, 0, 6, 6), 0.05).value;
        CHECK(v <= prev);
        prev = v;
    }
}
