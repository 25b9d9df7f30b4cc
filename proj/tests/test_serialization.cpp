#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "hill/serialization.hpp"

using namespace hill;
using Catch::Matchers::WithinAbs;

namespace {

void check_same(const Potential& a, const Potential& b) {
    CHECK(a.kind() == b.kind());
    CHECK(a.period() == b.period());
    for (double x : {-1.3, 0.0, 0.41, 2.9, 7.77}) CHECK(a(x) == b(x));
}

Potential round_trip(const Potential& V) { return potential_from_json(json::parse(to_json(V).dump())); }

} // namespace

TEST_CASE("potential kinds round-trip through JSON", "[serialization]") {
    check_same(Potential::constant(0.3, 2.0), round_trip(Potential::constant(0.3, 2.0)));
    Potential C = Potential::cosine_series(1.0 / 3.0, {0.1, 1.0 / 7.0}, -0.2, {0.0, 0.3});
    check_same(C, round_trip(C));
    Potential S = Potential::samples(2.0, {0.0, 0.5, 1.1}, {1.0, -1.0 / 3.0, 0.0});
    check_same(S, round_trip(S));
    Potential U = add(C, S);
    check_same(U, round_trip(U));
    Potential R = extend_period(C, 3);
    Potential R2 = round_trip(R);
    check_same(R, R2);
    CHECK(R2.repeat() == 3);
}

TEST_CASE("concatenations round-trip through JSON", "[serialization]") {
    Potential base = Potential::cosine_series(1.0, {1.0});
    Potential V = concatenate_blocks(make_block_layout({shift(base, 0.1), shift(base, -0.05)}, 1.0, 3, 9.0), base, 0.2);
    Potential W = round_trip(V);
    check_same(V, W);
    for (double x = 0.0; x < 9.0; x += 0.37) CHECK(V(x) == W(x));
    REQUIRE(layout_of(W) != nullptr);
    CHECK(layout_of(W)->anchors == layout_of(V)->anchors);
}

TEST_CASE("minimal documents load with defaults", "[serialization]") {
    Potential V = potential_from_json(json::parse(R"({"kind":"cosine_series","period":1,"coeffs":[2.0],"mean":0.5})"));
    CHECK_THAT(V(0.0), WithinAbs(2.5, 1e-15));
    Potential K = potential_from_json(json::parse(R"({"kind":"constant","value":-1})"));
    CHECK(K.period() == 1.0);
    CHECK(K(3.0) == -1.0);
}

TEST_CASE("malformed documents are rejected", "[serialization]") {
    CHECK_THROWS_AS(potential_from_json(json::parse(R"({"kind":"wavelet"})")), InvalidArgument);
    CHECK_THROWS_AS(potential_from_json(json::parse(R"({"period":1})")), InvalidArgument);
    CHECK_THROWS_AS(potential_from_json(json::parse(R"({"kind":"cosine_series","coeffs":[1]})")), InvalidArgument);
    CHECK_THROWS_AS(potential_from_json(json::parse(R"({"kind":"samples","period":1,"xs":[0,0.5],"vs":[1]})")),
                    InvalidArgument);
    CHECK_THROWS_AS(potential_from_json(json::parse(R"({"kind":"cosine_series","period":"x","coeffs":[1]})")),
                    InvalidArgument);
    CHECK_THROWS_AS(load_potential("/nonexistent/file.json"), InvalidArgument);
}

TEST_CASE("sample inputs parse", "[serialization]") {
    for (const char* name : {"free", "mathieu", "cos2pi", "tight_binding", "sawtooth_samples"}) {
        Potential V = load_potential(std::string(HILL_DATA_DIR) + "/potentials/" + name + ".json");
        CHECK(V.period() > 0.0);
    }
}

TEST_CASE("schedules round-trip through JSON", "[serialization]") {
    Hd0Schedule s;
    s.V0 = Potential::cosine_series(1.0, {2.0});
    s.epsilon0 = 0.5;
    s.pending_epsilon = 1e-30;
    s.stop_reason = "stopped";
    Hd0Level l;
    l.n = 1;
    l.V = extend_period(s.V0, 5);
    l.T = 5.0;
    l.N = 5;
    l.epsilon = 0.25;
    l.delta = 0.125;
    l.Lambda = 2.0;
    l.r = 2.0;
    l.lambdas = {0.5, 1.0, 2.0};
    l.measures = {0.1, 0.2, 1.0 / 3.0};
    s.levels.push_back(l);
    Hd0Schedule t = schedule_from_json(json::parse(to_json(s).dump()));
    REQUIRE(t.levels.size() == 1);
    CHECK(t.levels[0].measures == l.measures);
    CHECK(t.levels[0].delta == l.delta);
    CHECK(t.pending_epsilon == 1e-30);
    CHECK(t.levels[0].V.period() == 5.0);
    CHECK_THROWS_AS(schedule_from_json(json::parse(R"({"levels":[]})")), InvalidArgument);
}

TEST_CASE("band structure JSON", "[serialization]") {
    BandStructure b = band_structure(Potential::cosine_series(2.0 * std::numbers::pi, {2.0}), 2.0);
    json j = to_json(b);
    CHECK(j["bands"].size() == b.bands.size());
    CHECK(j["bands"][0]["lo_kind"] == "periodic");
    CHECK(j["bands"].back()["hi_kind"] == "window");
}
