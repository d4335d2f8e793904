#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "csiloc/errors.hpp"
#include "csiloc/music.hpp"
#include "csiloc/rng.hpp"

using namespace csiloc;

namespace {

CsiConfig est_cfg() {
    CsiConfig cfg;
    cfg.carrier_freq = 60e9;
    cfg.bandwidth = 3e9;
    cfg.n_subcarriers = 32;
    cfg.array_rows = 4;
    cfg.array_cols = 4;
    cfg.snr_db = 30.0;
    cfg.n_snapshots = 4;
    return cfg;
}

MusicGrid coarse_grid(const CsiConfig &cfg) {
    MusicGrid g = default_grid(cfg);
    g.az_min = -180.0;
    g.az_max = 178.0;
    g.az_step = 2.0;
    g.el_min = -60.0;
    g.el_max = 60.0;
    g.el_step = 2.0;
    return g;
}

PathComponent make_path(double amp, double delay, double aaoa, double eaoa) {
    PathComponent p;
    p.gain = amp;
    p.delay = delay;
    p.aaoa = aaoa;
    p.eaoa = eaoa;
    p.power_dbm = 20.0 * std::log10(amp);
    return p;
}

} // namespace

TEST_CASE("single noiseless source is recovered within tight bounds") {
    CsiConfig cfg = est_cfg();
    cfg.snr_db = INFINITY;
    cfg.n_snapshots = 1;
    const double az = 30.0, el = 0.0, toa = 10e-9;
    const auto snaps = synthesize_csi({make_path(1.0, toa, az, el)}, cfg, 1);
    const auto cov = fb_smooth(snaps, {3, 3, 16});
    const auto est = music_estimate(cov, cfg, 1, coarse_grid(cfg));
    REQUIRE(est.size() == 1);
    CHECK(std::abs(est[0].aaoa - az) < 0.5);
    CHECK(std::abs(est[0].eaoa - el) < 0.5);
    CHECK(std::abs(est[0].toa - toa) < 0.2e-9);
    // unit-amplitude source: LS power fit should land near 0 dBm
    CHECK(std::abs(est[0].power_dbm) < 2.0);
}

TEST_CASE("zero sources requested yields an empty list") {
    const CsiConfig cfg = est_cfg();
    const auto snaps = synthesize_csi({make_path(1.0, 5e-9, 10.0, 5.0)}, cfg, 2);
    const auto cov = fb_smooth(snaps, {3, 3, 16});
    CHECK(music_estimate(cov, cfg, 0, coarse_grid(cfg)).empty());
}

TEST_CASE("two well-separated sources at 30 dB are both found") {
    const CsiConfig cfg = est_cfg();
    // Elevations in the lower half-space, away from the el = 0 blind spot of
    // the horizontal array (sensitivity goes as sin el).
    const double az1 = -50.0, el1 = -20.0, toa1 = 2e-9;
    const double az2 = 60.0, el2 = -35.0, toa2 = 6e-9;
    MusicGrid grid = default_grid(cfg); // 1 degree, T_s/4: the library defaults
    grid.az_min = -90.0;
    grid.az_max = 90.0;
    grid.el_min = -60.0;
    grid.el_max = 0.0;
    int hits = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto snaps = synthesize_csi({make_path(1.0, toa1, az1, el1),
                                           make_path(1.0, toa2, az2, el2)},
                                          cfg, 100 + t);
        const auto cov = fb_smooth(snaps, {3, 3, 16});
        const auto est = music_estimate(cov, cfg, 2, grid);
        if (est.size() != 2)
            continue;
        // match each estimate to its nearest truth
        auto close = [](const EstimatedPath &e, double az, double el, double toa) {
            return std::abs(e.aaoa - az) < 1.0 && std::abs(e.eaoa - el) < 1.0 &&
                   std::abs(e.toa - toa) < 0.5e-9;
        };
        const bool ok =
            (close(est[0], az1, el1, toa1) && close(est[1], az2, el2, toa2)) ||
            (close(est[0], az2, el2, toa2) && close(est[1], az1, el1, toa1));
        if (ok)
            ++hits;
    }
    CHECK(hits >= trials * 95 / 100);
}

TEST_CASE("estimates are invariant to a common phase rotation") {
    const CsiConfig cfg = est_cfg();
    auto snaps = synthesize_csi({make_path(1.0, 8e-9, -20.0, 10.0)}, cfg, 5);
    const auto est_a =
        music_estimate(fb_smooth(snaps, {3, 3, 16}), cfg, 1, coarse_grid(cfg));
    const std::complex<double> rot = std::polar(1.0, 0.7);
    for (auto &s : snaps)
        s.h *= rot;
    const auto est_b =
        music_estimate(fb_smooth(snaps, {3, 3, 16}), cfg, 1, coarse_grid(cfg));
    REQUIRE(est_a.size() == est_b.size());
    for (std::size_t i = 0; i < est_a.size(); ++i) {
        CHECK(est_a[i].aaoa == doctest::Approx(est_b[i].aaoa).epsilon(1e-9));
        CHECK(est_a[i].eaoa == doctest::Approx(est_b[i].eaoa).epsilon(1e-9));
        CHECK(est_a[i].toa == doctest::Approx(est_b[i].toa).epsilon(1e-9));
    }
}

TEST_CASE("horizontal URA resolves elevation up to its mirror ambiguity") {
    // All elements sit in one horizontal plane, so +el and -el produce the
    // same steering vector; the magnitude is still recovered, and a grid
    // restricted to one half-space pins the sign.
    CsiConfig cfg = est_cfg();
    cfg.snr_db = INFINITY;
    cfg.n_snapshots = 1;
    const auto snaps = synthesize_csi({make_path(1.0, 4e-9, 10.0, -25.0)}, cfg, 3);
    const auto cov = fb_smooth(snaps, {3, 3, 16});

    const auto est = music_estimate(cov, cfg, 1, coarse_grid(cfg));
    REQUIRE(est.size() == 1);
    CHECK(std::abs(std::abs(est[0].eaoa) - 25.0) < 0.5);

    MusicGrid below = coarse_grid(cfg);
    below.el_max = 0.0;
    const auto est_below = music_estimate(cov, cfg, 1, below);
    REQUIRE(est_below.size() == 1);
    CHECK(std::abs(est_below[0].eaoa + 25.0) < 0.5);
}

TEST_CASE("source count selection falls back to the eigenvalue ratio") {
    const CsiConfig cfg = est_cfg();
    const auto snaps = synthesize_csi({make_path(1.0, 4e-9, 45.0, -10.0)}, cfg, 9);
    const auto cov = fb_smooth(snaps, {3, 3, 16});
    const auto est = music_estimate(cov, cfg, std::nullopt, coarse_grid(cfg));
    REQUIRE(!est.empty());
    CHECK(std::abs(est[0].aaoa - 45.0) < 0.5);
}

TEST_CASE("grid-limited error before interpolation") {
    // For noiseless single-path CSI the raw grid peak is
    // within one step of the truth; interpolation then tightens it.
    CsiConfig cfg = est_cfg();
    cfg.snr_db = INFINITY;
    cfg.n_snapshots = 1;
    const double az = 33.3, el = 7.7, toa = 5.55e-9;
    const auto snaps = synthesize_csi({make_path(1.0, toa, az, el)}, cfg, 1);
    const auto cov = fb_smooth(snaps, {3, 3, 16});
    const auto est = music_estimate(cov, cfg, 1, coarse_grid(cfg));
    REQUIRE(est.size() == 1);
    CHECK(std::abs(est[0].aaoa - az) <= 2.0);
    CHECK(std::abs(est[0].eaoa - el) <= 2.0);
    CHECK(std::abs(est[0].toa - toa) <= default_grid(cfg).toa_step);
}

TEST_CASE("invalid inputs are rejected") {
    const CsiConfig cfg = est_cfg();
    const auto snaps = synthesize_csi({make_path(1.0, 4e-9, 0.0, 0.0)}, cfg, 1);
    auto cov = fb_smooth(snaps, {2, 2, 4});
    CHECK_THROWS_AS(music_estimate(cov, cfg, 16, coarse_grid(cfg)),
                    std::invalid_argument);
    MusicGrid bad = coarse_grid(cfg);
    bad.az_step = 0.0;
    CHECK_THROWS_AS(music_estimate(cov, cfg, 1, bad), std::invalid_argument);

    cov.r(0, 0) = -10.0 * cov.r.cwiseAbs().maxCoeff(); // break PSD
    CHECK_THROWS_AS(music_estimate(cov, cfg, 1, coarse_grid(cfg)), NumericError);
}
