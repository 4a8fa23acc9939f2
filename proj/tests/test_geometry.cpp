#include <catch2/catch_amalgamated.hpp>

#include <visnav/geometry.hpp>
#include <visnav/rng.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace visnav;

TEST_CASE("point algebra basics", "[geometry]") {
    const Point2 a{1.0, 2.0}, b{3.0, -1.0};
    REQUIRE((a + b).x == Catch::Approx(4.0));
    REQUIRE(a.cross(b) == Catch::Approx(-7.0));
    REQUIRE(Point2{3.0, 4.0}.norm() == Catch::Approx(5.0));

    const Point3 p{0.0, 0.0, 0.0}, q{2.0, 4.0, 6.0};
    const Point3 m = lerp(p, q, 0.5);
    REQUIRE(m == Point3{1.0, 2.0, 3.0});
    REQUIRE(distance(p, q) == Catch::Approx(std::sqrt(56.0)));
}

TEST_CASE("polygon construction normalizes orientation", "[geometry]") {
    const std::vector<Point2> ccw{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    std::vector<Point2> cw(ccw.rbegin(), ccw.rend());

    const Polygon2D p1(ccw);
    const Polygon2D p2(cw);
    REQUIRE(p1.area() == Catch::Approx(4.0));
    REQUIRE(p2.area() == Catch::Approx(4.0));
    REQUIRE(polygon_signed_area(p2.pts()) > 0.0);

    REQUIRE_THROWS_AS(Polygon2D({{0, 0}, {1, 0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(Polygon2D({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("point_segment_distance hand values", "[geometry]") {
    REQUIRE(point_segment_distance({1, 1}, {0, 0}, {2, 0}) == Catch::Approx(1.0));
    REQUIRE(point_segment_distance({-3, 4}, {0, 0}, {2, 0}) == Catch::Approx(5.0));
    REQUIRE(point_segment_distance({5, 0}, {0, 0}, {2, 0}) == Catch::Approx(3.0));
    // Degenerate segment collapses to point distance.
    REQUIRE(point_segment_distance({3, 4}, {0, 0}, {0, 0}) == Catch::Approx(5.0));
}

TEST_CASE("containment agrees with crossing-parity oracle", "[geometry]") {
    // L-shaped (concave) polygon.
    const Polygon2D poly({{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}});
    Rng rng(20260101ull);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const Point2 p{uniform_double(rng, -1.0, 5.0), uniform_double(rng, -1.0, 5.0)};
        // The oracle has no boundary handling; skip near-boundary samples.
        if (polygon_boundary_distance(p, poly) < 1e-7) continue;
        ++checked;
        REQUIRE(point_in_polygon(p, poly) == test::brute_point_in_polygon(p, poly.pts()));
    }
    REQUIRE(checked > 1900);
}

TEST_CASE("boundary points are inside but not strictly inside", "[geometry]") {
    const Polygon2D poly({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
    const Point2 edge_mid{1.0, 0.0};
    const Point2 corner{2.0, 2.0};
    const Point2 inside{1.0, 1.0};
    REQUIRE(point_in_polygon(edge_mid, poly));
    REQUIRE(point_in_polygon(corner, poly));
    REQUIRE_FALSE(point_strictly_inside(edge_mid, poly));
    REQUIRE_FALSE(point_strictly_inside(corner, poly));
    REQUIRE(point_strictly_inside(inside, poly));
    REQUIRE_FALSE(point_strictly_inside(inside, poly, 1.5));  // margin eats the interior
}

TEST_CASE("segment/polygon intersections match brute edge-by-edge oracle", "[geometry]") {
    const Polygon2D convex({{0, 0}, {3, 0}, {3, 3}, {0, 3}});
    const Polygon2D concave({{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}});
    Rng rng(777ull);

    for (const Polygon2D* poly : {&convex, &concave}) {
        for (int i = 0; i < 500; ++i) {
            const Segment2 seg{{uniform_double(rng, -2.0, 6.0), uniform_double(rng, -2.0, 6.0)},
                               {uniform_double(rng, -2.0, 6.0), uniform_double(rng, -2.0, 6.0)}};
            std::vector<double> params;
            const auto& pts = poly->pts();
            for (std::size_t e = 0; e < pts.size(); ++e) {
                const auto hits = test::brute_segment_params(seg.a, seg.b, pts[e],
                                                             pts[(e + 1) % pts.size()]);
                params.insert(params.end(), hits.begin(), hits.end());
            }
            std::sort(params.begin(), params.end());
            std::vector<Point2> expected;
            for (double t : params) {
                const Point2 p = seg.at(t);
                if (expected.empty() || distance(expected.back(), p) > kGeomTol)
                    expected.push_back(p);
            }

            const auto got = segment_polygon_intersections(seg, *poly);
            REQUIRE(got.size() == expected.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                REQUIRE(distance(got[k], expected[k]) < 1e-7);
            }
        }
    }
}

TEST_CASE("slab clipping", "[geometry]") {
    const LayerSlab slab{0, 1.0, 2.0};

    SECTION("segment crossing the whole slab") {
        const Segment3 seg{{0, 0, 0}, {0, 0, 4}};
        const auto p = clip_params_to_slab(seg, slab);
        REQUIRE(p);
        REQUIRE(p->first == Catch::Approx(0.25));
        REQUIRE(p->second == Catch::Approx(0.5));
    }
    SECTION("horizontal segment inside / outside") {
        REQUIRE(clip_params_to_slab({{0, 0, 1.5}, {9, 9, 1.5}}, slab) ==
                std::make_pair(0.0, 1.0));
        REQUIRE_FALSE(clip_params_to_slab({{0, 0, 2.5}, {9, 9, 2.5}}, slab).has_value());
    }
    SECTION("touching the boundary only") {
        const auto p = clip_params_to_slab({{0, 0, 2.0}, {0, 0, 3.0}}, slab);
        REQUIRE(p);
        REQUIRE(p->first == Catch::Approx(0.0));
        REQUIRE(p->second == Catch::Approx(0.0));
    }
    SECTION("fully below") {
        REQUIRE_FALSE(clip_params_to_slab({{0, 0, -2}, {0, 0, 0.5}}, slab).has_value());
    }
    SECTION("clip_segment_to_slab endpoints") {
        const auto s = clip_segment_to_slab({{0, 0, 0}, {4, 0, 4}}, slab);
        REQUIRE(s);
        REQUIRE(s->a == Point3{1, 0, 1});
        REQUIRE(s->b == Point3{2, 0, 2});
    }
}

TEST_CASE("segment_enters_polygon open-interior semantics", "[geometry]") {
    const Polygon2D sq({{0, 0}, {2, 0}, {2, 2}, {0, 2}});

    // Penetrating chords block.
    REQUIRE(segment_enters_polygon({{-1, 1}, {3, 1}}, sq));
    REQUIRE(segment_enters_polygon({{1, 1}, {5, 5}}, sq));  // endpoint inside
    REQUIRE(segment_enters_polygon({{0.5, 0.5}, {1.5, 1.5}}, sq));
    REQUIRE(segment_enters_polygon({{-1, -1}, {1, 1}}, sq));  // corner entry
    // The chord through (0,2) and (2,0) cuts the interior, so it blocks.
    REQUIRE(segment_enters_polygon({{-1, 3}, {3, -1}}, sq));

    // Boundary contact does not.
    REQUIRE_FALSE(segment_enters_polygon({{0, 0}, {2, 0}}, sq));     // along an edge
    REQUIRE_FALSE(segment_enters_polygon({{-1, 0}, {3, 0}}, sq));    // collinear overshoot
    REQUIRE_FALSE(segment_enters_polygon({{2, -1}, {2, 3}}, sq));    // along right edge
    REQUIRE_FALSE(segment_enters_polygon({{1, 3}, {3, 1}}, sq));     // touches (2,2) only
    REQUIRE_FALSE(segment_enters_polygon({{-1, 5}, {-1, -5}}, sq));  // disjoint
}

TEST_CASE("aabb expand/overlap", "[geometry]") {
    Aabb2 box;
    REQUIRE(box.empty());
    box.expand({1, 1});
    box.expand({3, 5});
    REQUIRE_FALSE(box.empty());
    REQUIRE(box.contains({2, 3}));
    REQUIRE_FALSE(box.contains({0.9, 3}));
    Aabb2 other;
    other.expand({3.5, 0});
    other.expand({4, 2});
    REQUIRE_FALSE(box.overlaps(other));
    REQUIRE(box.overlaps(other, 0.6));
}
