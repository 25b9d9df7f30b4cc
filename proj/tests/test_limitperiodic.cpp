#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "hill/limitperiodic.hpp"

using namespace hill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("next epsilon takes the minimum of the three terms", "[limitperiodic]") {
    CHECK(next_epsilon(2, 0.5, 1.0, 100.0, 2.0) == 0.25);
    CHECK(next_epsilon(2, 0.5, 10.0, 100.0, 2.0) == 0.5 * std::pow(2.0, -10.0));
    CHECK(next_epsilon(3, 0.5, 1.0, 0.08, 2.0) == 0.01);
}

TEST_CASE("schedule argument checks", "[limitperiodic]") {
    Potential V = Potential::cosine_series(1.0, {1.0});
    CHECK_THROWS_AS(hd0_sequence(V, 0.5, 0, {}), InvalidArgument);
    CHECK_THROWS_AS(hd0_sequence(V, -0.5, 1, {10}), InvalidArgument);
    CHECK_THROWS_AS(hd0_sequence(V, 0.5, 2, {10}), InvalidArgument);
    CHECK_THROWS_AS(hd0_sequence(V, 0.5, 1, {-3}), InvalidArgument);
}

TEST_CASE("epsilon underflow stops the schedule", "[limitperiodic]") {
    Potential V = Potential::cosine_series(1.0, {1.0});
    Hd0Schedule s = hd0_sequence(V, 1e-14, 1, {10});
    CHECK_FALSE(s.complete);
    CHECK(s.levels.empty());
    CHECK(s.pending_epsilon == 5e-15);
    CHECK(s.stop_reason.find("underflow") != std::string::npos);
}

TEST_CASE("failing levels propagate or are recorded", "[limitperiodic]") {
    Potential V = Potential::cosine_series(1.0, {2.0});
    Hd0Settings hs;
    hs.thin.max_Nprime = 2;
    CHECK_THROWS_AS(hd0_sequence(V, 0.5, 1, {100}, hs), Error);
    hs.keep_partial = true;
    Hd0Schedule s = hd0_sequence(V, 0.5, 1, {100}, hs);
    CHECK_FALSE(s.complete);
    CHECK(s.pending_epsilon == 0.25);
    CHECK(s.stop_reason.rfind("level 1", 0) == 0);
}

TEST_CASE("tail sums", "[limitperiodic]") {
    Hd0Schedule s;
    for (int n = 1; n <= 3; ++n) {
        Hd0Level l;
        l.n = n;
        l.epsilon = std::ldexp(1.0, -2 * n);
        l.delta = 1.0;
        l.Lambda = std::ldexp(1.0, n);
        s.levels.push_back(l);
    }
    s.pending_epsilon = 1.0 / 1024.0;
    CHECK(tail_sum(s, 1) == 1.0 / 16 + 1.0 / 64 + 1.0 / 1024);
    CHECK(tail_sum(s, 3) == 1.0 / 1024);
    CHECK(tail_inequality_holds(s, 1));  // 2 * 0.0791 < 0.5
    s.levels[0].delta = 0.1;
    CHECK_FALSE(tail_inequality_holds(s, 1));
    CHECK_THROWS_AS(s.level(7), InvalidArgument);
}

TEST_CASE("cover sums", "[limitperiodic]") {
    CoverSum one = cover_sum({{-2.0, 2.0}}, 0.0, 2.0, 2.0, 0.5);
    CHECK_THAT(one.sum, WithinAbs(2.0, 1e-15));
    CoverSum none = cover_sum({}, 0.01, 2.0, 2.0, 0.5);
    CHECK_THAT(none.sum, WithinRel(2.0 * std::sqrt(0.02), 1e-15));
    // bands outside the window are dropped
    CoverSum far = cover_sum({{5.0, 6.0}}, 0.01, 8.0, 2.0, 1.0);
    CHECK(far.intervals.size() == 2);
    // monotone in alpha when every interval is shorter than 1
    std::vector<Interval> bands = {{0.0, 0.1}, {0.5, 0.52}, {1.0, 1.3}};
    double prev = 1e300;
    for (double a : {0.2, 0.5, 0.8, 1.0}) {
        double s = cover_sum(bands, 0.01, 2.0, 2.0, a).sum;
        CHECK(s <= prev);
        prev = s;
    }
    CHECK_THROWS_AS(cover_sum(bands, 0.01, 2.0, 2.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(cover_sum(bands, 0.01, 2.0, 2.0, 1.5), InvalidArgument);
}

TEST_CASE("Gordon defect", "[limitperiodic]") {
    Potential V = Potential::cosine_series(2.0, {1.0, 0.3});
    CHECK_THAT(gordon_defect(V, 2.0, 64).defect, WithinAbs(0.0, 1e-12));
    Potential C = Potential::cosine_series(2.0 * std::numbers::pi, {1.0});
    GordonReport g = gordon_defect(C, std::numbers::pi, 256, 0.5);
    CHECK_THAT(g.defect, WithinAbs(2.0, 1e-4));
    CHECK_THAT(g.ratio, WithinRel(g.defect / 0.5, 1e-15));
    CHECK(std::isinf(gordon_defect(C, 1.0, 8).ratio));
    CHECK_THROWS_AS(gordon_defect(C, 0.0, 8), InvalidArgument);
    CHECK_THAT(level_distance(C, shift(C, 0.1), 3.0, 16), WithinAbs(0.1, 1e-14));
}

TEST_CASE("hausdorff bound argument checks", "[limitperiodic]") {
    Hd0Schedule s;
    Hd0Level l;
    l.n = 1;
    l.V = Potential::cosine_series(2.0 * std::numbers::pi, {2.0});
    l.T = 2.0 * std::numbers::pi;
    l.Lambda = 2.0;
    l.r = 2.0;
    l.delta = 0.01;
    l.epsilon = 0.25;
    s.levels.push_back(l);
    s.V0 = l.V;
    CHECK_THROWS_AS(hausdorff_upper_bound(s, 1, 0.5, 4.0, 1), InvalidArgument);
    CHECK_THROWS_AS(hausdorff_upper_bound(s, 1, 0.5, 1.0, 2), InvalidArgument);
    CoverSum c = hausdorff_upper_bound(s, 1, 0.5, 1.0, 1);
    CHECK(c.intervals.size() == 3 + 2);  // three bands of 2 cos x in [-2, 2] plus the edge intervals
    CHECK(c.comparison_bound > 0.0);
}
