#include <doctest.h>

#include <algorithm>
#include <random>

#include "csiloc/errors.hpp"
#include "csiloc/features.hpp"
#include "csiloc/rng.hpp"

using namespace csiloc;

namespace {

EstimatedPath est(double power, double toa_s, double az = 0, double el = 0) {
    EstimatedPath p;
    p.power_dbm = power;
    p.toa = toa_s;
    p.aaoa = az;
    p.eaoa = el;
    return p;
}

PathComponent sim(PathKind kind, double power, double delay) {
    PathComponent p;
    p.kind = kind;
    p.power_dbm = power;
    p.delay = delay;
    p.gain = std::pow(10.0, power / 20.0);
    return p;
}

} // namespace

TEST_CASE("extract_mp picks the maximum-power path") {
    SUBCASE("singleton") {
        const MpFeature f = extract_mp({est(-70.0, 12e-9, 15.0, -5.0)});
        CHECK(f.rss == -70.0);
        CHECK(f.aaoa == 15.0);
        CHECK(f.eaoa == -5.0);
        CHECK(f.toa == doctest::Approx(12.0)); // nanoseconds
    }
    SUBCASE("max selection") {
        const MpFeature f = extract_mp({est(-70.0, 5e-9), est(-60.0, 9e-9)});
        CHECK(f.rss == -60.0);
        CHECK(f.toa == doctest::Approx(9.0));
    }
    SUBCASE("power tie breaks to the smaller toa") {
        const MpFeature f = extract_mp({est(-60.0, 9e-9), est(-60.0, 4e-9)});
        CHECK(f.toa == doctest::Approx(4.0));
    }
    SUBCASE("empty list is an outage") {
        CHECK_THROWS_AS(extract_mp({}), OutageError);
    }
}

TEST_CASE("extract_mp is permutation invariant") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EstimatedPath> paths;
        const int n = 1 + static_cast<int>(uniform_index(rng, 6));
        for (int i = 0; i < n; ++i)
            paths.push_back(est(uniform_range(rng, -90.0, -50.0),
                                uniform_range(rng, 1e-9, 40e-9)));
        const MpFeature a = extract_mp(paths);
        std::shuffle(paths.begin(), paths.end(), rng);
        const MpFeature b = extract_mp(paths);
        CHECK(a.rss == b.rss);
        CHECK(a.toa == b.toa);
    }
}

TEST_CASE("oracle_features reads simulator truth") {
    SUBCASE("LoS dominates in free space") {
        const MpFeature f = oracle_features(
            {sim(PathKind::LoS, -62.0, 10e-9), sim(PathKind::Reflection, -71.0, 14e-9)});
        CHECK(f.rss == -62.0);
        CHECK(f.toa == doctest::Approx(10.0));
    }
    SUBCASE("blocked LoS leaves the reflection") {
        const MpFeature f =
            oracle_features({sim(PathKind::Reflection, -71.0, 14e-9)});
        CHECK(f.rss == -71.0);
    }
    SUBCASE("equal power tie breaks to the smaller delay") {
        const MpFeature f = oracle_features({sim(PathKind::Reflection, -70.0, 20e-9),
                                             sim(PathKind::Diffraction, -70.0, 8e-9)});
        CHECK(f.toa == doctest::Approx(8.0));
    }
    SUBCASE("empty list is an outage") {
        CHECK_THROWS_AS(oracle_features({}), OutageError);
    }
}

TEST_CASE("estimated path CSV export") {
    const std::string csv = estimated_paths_csv(
        {{"rp0/AP1", {est(-60.0, 5e-9, 10.0, -20.0)}},
         {"rp1/AP2", {est(-62.0, 6e-9), est(-75.0, 9e-9)}}});
    CHECK(csv.find("link_id,aaoa_deg,eaoa_deg,toa_ns,power_dbm\n") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("rp0/AP1,10,-20,5,-60") != std::string::npos);
}
