#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csiloc/baselines.hpp"
#include "csiloc/config.hpp"
#include "csiloc/fingerprint_db.hpp"
#include "csiloc/json_io.hpp"
#include "csiloc/metrics.hpp"
#include "csiloc/music.hpp"

namespace csiloc {

struct ApSpec {
    std::string id;
    Vec3 position;
};

enum class FeatureMode { Oracle, Estimated };
enum class Algorithm { Wrf, Rf, Wknn };

const char *algorithm_name(Algorithm a);

struct ExperimentConfig {
    Scene scene;
    Rect area; // positioning area: grid anchor and TP domain
    std::vector<ApSpec> aps;
    double rp_height = 1.5;
    std::string scenario_id = "custom";

    double grid_interval = 0.2;
    int max_reflection_order = 3;
    int max_diffraction_order = 1;

    int tp_count = 100;
    bool tp_on_grid = false;       // uniform-random placement otherwise
    double tp_grid_offset = -1.0;  // on-grid mode; negative selects interval/2

    FeatureMode feature_mode = FeatureMode::Oracle;
    std::vector<Algorithm> algorithms = {Algorithm::Wrf, Algorithm::Rf,
                                         Algorithm::Wknn};
    int k = 3;
    int n_trees = 100;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int timing_reps = 3;

    // Estimated feature mode only.
    CsiConfig csi;
    SubarrayDims subarray;
    MusicGrid music;
    bool music_grid_set = false; // default_grid(csi) otherwise
    std::uint64_t csi_seed = 424242;

    void validate() const;
};

/// Table-1 scenario replicas: 16 m x 15 m with two NLoS-inducing interior
/// partitions, and the open 8 m x 6 m room.
ExperimentConfig scenario_1();
ExperimentConfig scenario_2();
/// Preset by id ("1" / "2"), falling back to the config file contents.
ExperimentConfig config_from_ini(const IniDoc &ini);

/// Paths for every RP/AP link of the configured grid.
std::vector<LinkPaths> simulate_links(const ExperimentConfig &cfg);

/// Fingerprint feature of one link under the configured feature mode.
/// Returns nullopt on outage. `noise_stream` individualizes the CSI noise
/// of estimated-mode links.
std::optional<MpFeature> link_feature(const ExperimentConfig &cfg,
                                      const std::vector<PathComponent> &paths,
                                      const Vec3 &tx, const std::string &ap_id,
                                      std::uint64_t noise_stream);

/// Simulate, extract features, and assemble the database.
FingerprintBase build_database(const ExperimentConfig &cfg,
                               std::vector<std::size_t> *dropped = nullptr);

/// Draw the test set for one seed: placement, tracing, features. Outage
/// draws are redrawn (uniform-random) or skipped (on-grid placement).
std::vector<TestRecord> make_test_points(const ExperimentConfig &cfg,
                                         std::uint64_t seed);

struct AlgoSeedResult {
    Algorithm algo = Algorithm::Wrf;
    std::uint64_t seed = 0;
    std::vector<double> errors; // one per TP, meters
    ErrorStats stats;
    double train_s = 0.0;
    double position_total_s = 0.0;
    double position_per_tp_s = 0.0;
};

struct ResultSet {
    std::vector<AlgoSeedResult> entries;
    int tp_count = 0;

    std::vector<double> pooled_errors(Algorithm a) const;
};

/// The full offline + online pipeline for every configured algorithm and
/// seed. Error lists are deterministic per seed; timings are wall-clock
/// medians of `timing_reps` single-threaded repetitions.
ResultSet run_experiment(const ExperimentConfig &cfg);

struct SweepRow {
    double interval = 0.0;
    Algorithm algo = Algorithm::Wrf;
    long n_rps = 0;
    double train_s = 0.0;
    double position_total_s = 0.0;
};

/// Database-size sweep: timing table over grid intervals (first seed only).
std::vector<SweepRow> sweep(const ExperimentConfig &cfg,
                            const std::vector<double> &grid_intervals);

} // namespace csiloc
