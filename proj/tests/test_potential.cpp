#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "hill/potential.hpp"

using namespace hill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("constant potential", "[potential]") {
    Potential V = Potential::constant(-1.5, 2.0);
    CHECK(V.kind() == PotentialKind::constant);
    CHECK(V.period() == 2.0);
    CHECK(V(0.3) == -1.5);
    CHECK(V(-17.0) == -1.5);
    CHECK(V.sup_bound() == 1.5);
    Potential Z;
    CHECK(Z(4.2) == 0.0);
    CHECK(Z.period() == 1.0);
}

TEST_CASE("cosine series evaluation and sup bound", "[potential]") {
    Potential V = Potential::cosine_series(2.0, {1.0, -0.5}, 0.25, {0.0, 2.0});
    for (double x : {-3.1, 0.0, 0.4, 1.7, 9.9}) {
        double w = 2.0 * std::numbers::pi * x / 2.0;
        double expect = 0.25 + std::cos(w) - 0.5 * std::cos(2 * w) + 2.0 * std::sin(2 * w);
        CHECK_THAT(V(x), WithinAbs(expect, 1e-13));
        CHECK_THAT(V(x + 2.0), WithinAbs(V(x), 1e-12));
    }
    CHECK(V.sup_bound() == 3.75);
    Potential W = tighten_sup_bound(V);
    CHECK(W.sup_bound() <= V.sup_bound());
    double mx = 0.0;
    for (int i = 0; i < 20000; ++i) mx = std::max(mx, std::abs(V(2.0 * i / 20000)));
    CHECK(W.sup_bound() >= mx);
    CHECK_THAT(W(0.77), WithinAbs(V(0.77), 0.0));
}

TEST_CASE("sampled potential is periodic linear interpolation", "[potential]") {
    Potential V = Potential::samples(2.0, {0.0, 0.5, 1.0, 1.5}, {0.0, 1.0, 0.0, -1.0});
    CHECK_THAT(V(0.25), WithinAbs(0.5, 1e-15));
    CHECK_THAT(V(1.75), WithinAbs(-0.5, 1e-15));  // wraps to the first sample
    CHECK_THAT(V(-0.25), WithinAbs(-0.5, 1e-15));
    CHECK_THAT(V(4.5), WithinAbs(1.0, 1e-15));
    CHECK(V.sup_bound() == 1.0);
    auto bp = V.breakpoints(0.1, 2.1);
    REQUIRE(bp.size() == 4);
    CHECK_THAT(bp[0], WithinAbs(0.5, 1e-15));
    CHECK_THAT(bp[3], WithinAbs(2.0, 1e-15));
}

TEST_CASE("invalid potentials are rejected", "[potential]") {
    CHECK_THROWS_AS(Potential::constant(1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(Potential::cosine_series(-1.0, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(Potential::samples(1.0, {0.0, 0.0}, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(Potential::samples(1.0, {0.0, 1.0}, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(Potential::samples(1.0, {0.0}, {}), InvalidArgument);
    CHECK_THROWS_AS(Potential::sum({Potential::constant(1.0, 0.7)}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(scale(Potential::constant(1.0), 0.0), InvalidArgument);
    CHECK_THROWS_AS(Potential::constant(1.0).with_repeat(0), InvalidArgument);
}

TEST_CASE("scale, shift, repeat and add", "[potential]") {
    Potential V = Potential::cosine_series(1.0, {2.0}, 0.5);
    Potential S = scale(V, 3.0);
    CHECK_THAT(S(0.1), WithinAbs(3.0 * V(0.1), 1e-13));
    CHECK_THAT(S.sup_bound(), WithinRel(3.0 * V.sup_bound(), 1e-15));
    Potential H = shift(V, -1.0);
    CHECK_THAT(H(0.3), WithinAbs(V(0.3) - 1.0, 1e-14));
    Potential R = extend_period(V, 5);
    CHECK(R.period() == 5.0);
    CHECK(R.natural_period() == 1.0);
    CHECK(R.repeat() == 5);
    CHECK(R(0.3) == V(0.3));

    Potential W = Potential::cosine_series(2.0, {0.0, 1.0});
    Potential A = add(V, W);  // commensurate: merged into one series of period 2
    CHECK(A.kind() == PotentialKind::cosine_series);
    CHECK(A.period() == 2.0);
    for (double x : {0.0, 0.31, 1.4}) CHECK_THAT(A(x), WithinAbs(V(x) + W(x), 1e-13));

    Potential B = add(V, Potential::samples(1.0, {0.0, 0.5}, {0.0, 1.0}));
    CHECK(B.kind() == PotentialKind::sum);
    CHECK_THAT(B(0.25), WithinAbs(V(0.25) + 0.5, 1e-14));
}

TEST_CASE("sampled distance", "[potential]") {
    Potential V = Potential::cosine_series(1.0, {1.0});
    CHECK_THAT(sampled_distance(V, shift(V, 0.3), 0.0, 1.0, 100), WithinAbs(0.3, 1e-14));
}

TEST_CASE("connector ramps between block endpoints", "[potential]") {
    Potential base = Potential::constant(0.0);
    Connector c = make_connector(0.1, -0.2, base, 2.0, 3.0, 0.5);
    CHECK_THAT(c(2.0), WithinAbs(0.1, 1e-15));
    CHECK_THAT(c(3.0), WithinAbs(-0.2, 1e-15));
    CHECK_THAT(c(2.5), WithinAbs(-0.05, 1e-15));
    CHECK_THROWS_AS(make_connector(1.0, 0.0, base, 2.0, 3.0, 0.5), InvalidArgument);
}

TEST_CASE("block concatenation", "[potential]") {
    Potential base = Potential::cosine_series(1.0, {1.0});
    std::vector<Potential> blocks = {shift(base, 0.1), shift(base, -0.1), base};
    // T' = 1, three repeats per block, anchors s_j = 4 j, total period 14
    BlockLayout L = make_block_layout(blocks, 1.0, 3, 14.0);
    REQUIRE(L.anchors == std::vector<double>{0.0, 4.0, 8.0, 12.0});
    Potential V = concatenate_blocks(L, base, 0.2);
    CHECK(V.kind() == PotentialKind::concatenation);
    CHECK(V.period() == 14.0);
    CHECK_THAT(V(0.5), WithinAbs(blocks[0](0.5), 1e-14));
    CHECK_THAT(V(6.2), WithinAbs(blocks[1](6.2), 1e-14));
    CHECK_THAT(V(10.9), WithinAbs(blocks[2](10.9), 1e-14));
    CHECK_THAT(V(0.5 + 14.0), WithinAbs(V(0.5), 1e-13));
    // continuity at the connector ends
    CHECK_THAT(V(3.0 - 1e-12), WithinAbs(V(3.0 + 1e-12), 1e-9));
    CHECK_THAT(V(4.0 - 1e-12), WithinAbs(V(4.0 + 1e-12), 1e-9));
    CHECK_THAT(V(14.0 - 1e-12), WithinAbs(V(1e-12), 1e-9));
    // |V - base| < epsilon everywhere
    CHECK(sampled_distance(V, base, 0.0, 14.0, 5000) < 0.2);
    CHECK(layout_of(V) != nullptr);
    CHECK(concatenation_base(V) != nullptr);
    CHECK(layout_of(base) == nullptr);
    Potential S = scale(V, 2.0);
    CHECK_THAT(S(6.2), WithinAbs(2.0 * V(6.2), 1e-13));
}

TEST_CASE("concatenation validation", "[potential]") {
    Potential base = Potential::cosine_series(1.0, {1.0});
    BlockLayout L = make_block_layout({shift(base, 0.5)}, 1.0, 2, 3.0);
    CHECK_THROWS_AS(concatenate_blocks(L, base, 0.2), InvalidArgument);  // block too far from base
    BlockLayout bad = make_block_layout({base, base}, 1.0, 2, 6.0);
    bad.anchors[1] = 2.5;
    CHECK_THROWS_AS(concatenate_blocks(bad, base, 0.2), InvalidArgument);
    BlockLayout shortp = make_block_layout({base, base}, 1.0, 2, 5.0);
    CHECK_THROWS_AS(concatenate_blocks(shortp, base, 0.2), InvalidArgument);
    BlockLayout period = make_block_layout({Potential::cosine_series(0.7, {0.01})}, 1.0, 2, 3.0);
    CHECK_THROWS_AS(concatenate_blocks(period, Potential::constant(0.0), 0.2), InvalidArgument);
}
