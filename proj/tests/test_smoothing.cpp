#include <doctest.h>

#include <cmath>
#include <random>

#include "csiloc/rng.hpp"
#include "csiloc/smoothing.hpp"

using namespace csiloc;

namespace {

CsiConfig cfg_16x4() {
    CsiConfig cfg;
    cfg.carrier_freq = 60e9;
    cfg.bandwidth = 3e9;
    cfg.n_subcarriers = 16;
    cfg.array_rows = 2;
    cfg.array_cols = 2;
    cfg.snr_db = INFINITY;
    cfg.n_snapshots = 1;
    return cfg;
}

PathComponent make_path(double amp, double delay, double aaoa, double eaoa) {
    PathComponent p;
    p.gain = amp;
    p.delay = delay;
    p.aaoa = aaoa;
    p.eaoa = eaoa;
    return p;
}

int numerical_rank(const Eigen::MatrixXcd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
    const double lam_max = eig.eigenvalues().maxCoeff();
    int rank = 0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
        if (eig.eigenvalues()(i) > 1e-6 * lam_max)
            ++rank;
    return rank;
}

void check_invariants(const Eigen::MatrixXcd &r) {
    const Eigen::Index d = r.rows();
    CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    CHECK(eig.eigenvalues()(0) >= -1e-8 * std::abs(r.trace().real()));
    const Eigen::MatrixXcd pers = r.conjugate().reverse();
    CHECK((pers - r).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(d == r.cols());
}

} // namespace

TEST_CASE("fb_average of the identity is the identity") {
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(6, 6);
    CHECK((fb_average(id) - id).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smoothed covariance satisfies its invariants on random CSI") {
    std::mt19937_64 rng(3);
    CsiConfig cfg = cfg_16x4();
    cfg.snr_db = 15.0;
    cfg.n_snapshots = 3;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<PathComponent> paths;
        const int n = 1 + static_cast<int>(uniform_index(rng, 4));
        for (int i = 0; i < n; ++i)
            paths.push_back(make_path(uniform_range(rng, 0.1, 2.0),
                                      uniform_range(rng, 0.0, 4e-9),
                                      uniform_range(rng, -170.0, 170.0),
                                      uniform_range(rng, -60.0, 60.0)));
        const auto snaps = synthesize_csi(paths, cfg, trial);
        const auto cov = fb_smooth(snaps, {2, 2, 8});
        check_invariants(cov.r);
        CHECK(cov.n_averages == 9L * cfg.n_snapshots);
        CHECK(cov.r.rows() == 32);
    }
}

TEST_CASE("smoothing restores rank lost to coherent sources") {
    const CsiConfig cfg = cfg_16x4();
    // Two perfectly coherent arrivals in one noiseless channel.
    const std::vector<PathComponent> paths{make_path(1.0, 1e-9, 40.0, 0.0),
                                           make_path(0.8, 3e-9, -60.0, 10.0)};
    const auto snaps = synthesize_csi(paths, cfg, 1);

    // No smoothing: one full-size subvector, rank 1.
    const auto full = sample_covariance(snaps, {2, 2, 16});
    CHECK(numerical_rank(full) == 1);

    // Space-frequency smoothing (no FB): rank at least 2.
    const auto smoothed = sample_covariance(snaps, {2, 2, 8});
    CHECK(numerical_rank(smoothed) >= 2);
}

TEST_CASE("FB step turns a rank-1 forward covariance into rank <= 2") {
    const CsiConfig cfg = cfg_16x4();
    const std::vector<PathComponent> paths{make_path(1.0, 2e-9, 25.0, 5.0)};
    const auto snaps = synthesize_csi(paths, cfg, 1);

    const auto forward = sample_covariance(snaps, {2, 2, 16});
    REQUIRE(numerical_rank(forward) == 1);
    const auto fb = fb_average(forward);
    CHECK(numerical_rank(fb) <= 2);
    CHECK((fb.conjugate().reverse() - fb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("subarray dims are validated") {
    const CsiConfig cfg = cfg_16x4();
    const auto snaps = synthesize_csi({make_path(1.0, 1e-9, 0.0, 0.0)}, cfg, 1);
    CHECK_THROWS_AS(fb_smooth(snaps, {3, 2, 8}), std::invalid_argument);
    CHECK_THROWS_AS(fb_smooth(snaps, {2, 2, 17}), std::invalid_argument);
    CHECK_THROWS_AS(fb_smooth(snaps, {2, 2, 16}), std::invalid_argument); // no axis smaller
    CHECK_THROWS_AS(fb_smooth({}, {2, 2, 8}), std::invalid_argument);
    CHECK_NOTHROW(fb_smooth(snaps, {2, 2, 15}));
}
