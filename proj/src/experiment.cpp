#include "csiloc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "csiloc/errors.hpp"
#include "csiloc/rng.hpp"
#include "csiloc/smoothing.hpp"

namespace csiloc {

const char *algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::Wrf: return "WRF";
    case Algorithm::Rf: return "RF";
    case Algorithm::Wknn: return "WKNN";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    scene.validate();
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw std::invalid_argument("experiment: degenerate area");
    if (aps.empty())
        throw std::invalid_argument("experiment: at least one AP required");
    if (!(grid_interval > 0.0))
        throw std::invalid_argument("experiment: grid_interval must be positive");
    if (tp_count < 1)
        throw std::invalid_argument("experiment: tp_count must be >= 1");
    if (algorithms.empty())
        throw std::invalid_argument("experiment: at least one algorithm required");
    if (seeds.empty())
        throw std::invalid_argument("experiment: at least one seed required");
    if (k < 1 || n_trees < 1 || timing_reps < 1)
        throw std::invalid_argument("experiment: k, n_trees, timing_reps must be >= 1");
    for (const ApSpec &ap : aps)
        if (!scene.contains(ap.position))
            throw std::invalid_argument("experiment: AP " + ap.id +
                                        " lies outside the room");
}

namespace {

// Walls sit `margin` outside the positioning area so that boundary RPs of the
// inclusive grid are still strictly inside the room.
ExperimentConfig make_scenario(const Rect &area, double margin,
                               const std::vector<ApSpec> &aps,
                               std::vector<Partition> partitions,
                               const std::string &id) {
    ExperimentConfig cfg;
    cfg.area = area;
    cfg.scene.origin_x = area.x0 - margin;
    cfg.scene.origin_y = area.y0 - margin;
    cfg.scene.width = area.width + 2.0 * margin;
    cfg.scene.depth = area.height + 2.0 * margin;
    cfg.scene.height = 3.0;
    cfg.scene.interior_partitions = std::move(partitions);
    cfg.aps = aps;
    cfg.scenario_id = id;
    return cfg;
}

} // namespace

ExperimentConfig scenario_1() {
    // 16 m x 15 m, Table-1 AP coordinates; y span shifted so both APs are
    // interior. Two full-height partitions create NLoS regions.
    const Rect area{-8.0, -7.6, 16.0, 15.0};
    std::vector<Partition> parts;
    parts.push_back({0, -2.0, -7.6, -1.5, 0.0, 3.0}); // plane x = -2
    parts.push_back({1, 2.0, 1.0, 8.0, 0.0, 3.0});    // plane y = 2
    return make_scenario(area, 0.05,
                         {{"AP1", {-7.64, -6.72, 2.8}}, {"AP2", {7.72, -7.54, 2.8}}},
                         std::move(parts), "scenario1");
}

ExperimentConfig scenario_2() {
    const Rect area{0.0, 0.0, 8.0, 6.0};
    return make_scenario(area, 0.05,
                         {{"AP1", {0.18, 0.20, 2.8}}, {"AP2", {7.70, 5.78, 2.8}}},
                         {}, "scenario2");
}

ExperimentConfig config_from_ini(const IniDoc &ini) {
    ExperimentConfig cfg;
    const std::string preset = ini.get_string("scenario", "preset", "");
    if (preset == "1")
        cfg = scenario_1();
    else if (preset == "2")
        cfg = scenario_2();
    else if (!preset.empty())
        throw LoadError("unknown scenario preset: " + preset);

    if (ini.has("scenario", "area")) {
        const auto a = ini.get_doubles("scenario", "area");
        if (a.size() != 4)
            throw LoadError("[scenario] area wants: x0 y0 width height");
        const double margin = ini.get_double("scenario", "wall_margin", 0.05);
        cfg.area = {a[0], a[1], a[2], a[3]};
        cfg.scene.origin_x = a[0] - margin;
        cfg.scene.origin_y = a[1] - margin;
        cfg.scene.width = a[2] + 2.0 * margin;
        cfg.scene.depth = a[3] + 2.0 * margin;
    }
    cfg.scene.height = ini.get_double("scenario", "height", cfg.scene.height);
    cfg.scene.carrier_freq =
        ini.get_double("scene", "carrier_freq", cfg.scene.carrier_freq);
    if (ini.has("scene", "wall_permittivity")) {
        const auto wp = ini.get_doubles("scene", "wall_permittivity");
        if (wp.size() != 2)
            throw LoadError("[scene] wall_permittivity wants: re im");
        cfg.scene.wall_permittivity = {wp[0], wp[1]};
    }
    cfg.scene.scattering_coefficient = ini.get_double(
        "scene", "scattering_coefficient", cfg.scene.scattering_coefficient);
    cfg.scene.n_scatter_children = ini.get_int("scene", "n_scatter_children",
                                               cfg.scene.n_scatter_children);
    cfg.scene.min_detectable_power = ini.get_double(
        "scene", "min_detectable_power", cfg.scene.min_detectable_power);

    auto parse_num = [](const std::string &tok, const char *where) {
        try {
            return std::stod(tok);
        } catch (const std::exception &) {
            throw LoadError(std::string(where) + ": not a number: " + tok);
        }
    };
    const double ap_height = ini.get_double("scenario", "ap_height", 2.8);
    const auto ap_vals = ini.values("scenario", "ap");
    if (!ap_vals.empty()) {
        cfg.aps.clear();
        for (const std::string &v : ap_vals) {
            const auto toks = split_ws(v);
            if (toks.size() != 3 && toks.size() != 4)
                throw LoadError("[scenario] ap wants: id x y [z]");
            ApSpec ap;
            ap.id = toks[0];
            ap.position = {parse_num(toks[1], "[scenario] ap"),
                           parse_num(toks[2], "[scenario] ap"),
                           toks.size() == 4 ? parse_num(toks[3], "[scenario] ap")
                                            : ap_height};
            cfg.aps.push_back(ap);
        }
    }
    for (const std::string &v : ini.values("scenario", "partition")) {
        const auto toks = split_ws(v);
        if (toks.size() != 6)
            throw LoadError("[scenario] partition wants: axis value lo hi z0 z1");
        Partition p;
        if (toks[0] == "x")
            p.axis = 0;
        else if (toks[0] == "y")
            p.axis = 1;
        else
            throw LoadError("[scenario] partition axis must be x or y");
        p.value = parse_num(toks[1], "[scenario] partition");
        p.lo = parse_num(toks[2], "[scenario] partition");
        p.hi = parse_num(toks[3], "[scenario] partition");
        p.z0 = parse_num(toks[4], "[scenario] partition");
        p.z1 = parse_num(toks[5], "[scenario] partition");
        cfg.scene.interior_partitions.push_back(p);
    }
    if (ini.has("scenario", "id"))
        cfg.scenario_id = ini.get_string("scenario", "id", cfg.scenario_id);
    cfg.rp_height = ini.get_double("scenario", "rp_height", cfg.rp_height);

    cfg.grid_interval = ini.get_double("experiment", "grid_interval", cfg.grid_interval);
    cfg.max_reflection_order =
        ini.get_int("experiment", "reflection_order", cfg.max_reflection_order);
    cfg.max_diffraction_order =
        ini.get_int("experiment", "diffraction_order", cfg.max_diffraction_order);
    cfg.tp_count = ini.get_int("experiment", "tp_count", cfg.tp_count);
    const std::string placement =
        ini.get_string("experiment", "tp_placement", "uniform-random");
    if (placement == "uniform-random")
        cfg.tp_on_grid = false;
    else if (placement == "on-grid-offset")
        cfg.tp_on_grid = true;
    else
        throw LoadError("unknown tp_placement: " + placement);
    cfg.tp_grid_offset =
        ini.get_double("experiment", "tp_grid_offset", cfg.tp_grid_offset);
    const std::string mode = ini.get_string("experiment", "feature_mode", "oracle");
    if (mode == "oracle")
        cfg.feature_mode = FeatureMode::Oracle;
    else if (mode == "estimated")
        cfg.feature_mode = FeatureMode::Estimated;
    else
        throw LoadError("unknown feature_mode: " + mode);
    if (ini.has("experiment", "algorithms")) {
        cfg.algorithms.clear();
        for (const std::string &name :
             split_ws(*ini.value("experiment", "algorithms"))) {
            if (name == "wrf" || name == "WRF")
                cfg.algorithms.push_back(Algorithm::Wrf);
            else if (name == "rf" || name == "RF")
                cfg.algorithms.push_back(Algorithm::Rf);
            else if (name == "wknn" || name == "WKNN")
                cfg.algorithms.push_back(Algorithm::Wknn);
            else
                throw LoadError("unknown algorithm: " + name);
        }
    }
    cfg.k = ini.get_int("experiment", "k", cfg.k);
    cfg.n_trees = ini.get_int("experiment", "trees", cfg.n_trees);
    if (ini.has("experiment", "seeds")) {
        cfg.seeds.clear();
        for (double s : ini.get_doubles("experiment", "seeds"))
            cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    cfg.timing_reps = ini.get_int("experiment", "timing_reps", cfg.timing_reps);

    cfg.csi.carrier_freq = ini.get_double("csi", "carrier_freq", cfg.scene.carrier_freq);
    cfg.csi.bandwidth = ini.get_double("csi", "bandwidth", cfg.csi.bandwidth);
    cfg.csi.n_subcarriers = ini.get_int("csi", "n_subcarriers", cfg.csi.n_subcarriers);
    cfg.csi.array_rows = ini.get_int("csi", "array_rows", cfg.csi.array_rows);
    cfg.csi.array_cols = ini.get_int("csi", "array_cols", cfg.csi.array_cols);
    cfg.csi.element_spacing =
        ini.get_double("csi", "element_spacing", cfg.csi.element_spacing);
    cfg.csi.snr_db = ini.get_double("csi", "snr_db", cfg.csi.snr_db);
    cfg.csi.n_snapshots = ini.get_int("csi", "n_snapshots", cfg.csi.n_snapshots);
    cfg.csi_seed = static_cast<std::uint64_t>(
        ini.get_double("csi", "seed", static_cast<double>(cfg.csi_seed)));

    cfg.subarray.rows = ini.get_int("music", "subarray_rows", cfg.subarray.rows);
    cfg.subarray.cols = ini.get_int("music", "subarray_cols", cfg.subarray.cols);
    cfg.subarray.taps = ini.get_int("music", "subarray_taps", cfg.subarray.taps);
    if (ini.has("music", "az_step") || ini.has("music", "toa_step")) {
        MusicGrid g = default_grid(cfg.csi);
        g.az_min = ini.get_double("music", "az_min", g.az_min);
        g.az_max = ini.get_double("music", "az_max", g.az_max);
        g.az_step = ini.get_double("music", "az_step", g.az_step);
        g.el_min = ini.get_double("music", "el_min", g.el_min);
        g.el_max = ini.get_double("music", "el_max", g.el_max);
        g.el_step = ini.get_double("music", "el_step", g.el_step);
        g.toa_min = ini.get_double("music", "toa_min", g.toa_min);
        g.toa_max = ini.get_double("music", "toa_max", g.toa_max);
        g.toa_step = ini.get_double("music", "toa_step", g.toa_step);
        cfg.music = g;
        cfg.music_grid_set = true;
    }
    return cfg;
}

std::vector<LinkPaths> simulate_links(const ExperimentConfig &cfg) {
    cfg.validate();
    const auto rps = build_grid(cfg.area, cfg.grid_interval);
    std::vector<LinkPaths> out;
    out.reserve(rps.size() * cfg.aps.size());
    for (const auto &[x, y] : rps) {
        const Vec3 tx{x, y, cfg.rp_height};
        for (const ApSpec &ap : cfg.aps) {
            LinkPaths l;
            l.tx = tx;
            l.rx = ap.position;
            l.ap_id = ap.id;
            l.paths = trace_paths(cfg.scene, tx, ap.position,
                                  cfg.max_reflection_order,
                                  cfg.max_diffraction_order);
            out.push_back(std::move(l));
        }
    }
    return out;
}

std::optional<MpFeature> link_feature(const ExperimentConfig &cfg,
                                      const std::vector<PathComponent> &paths,
                                      const Vec3 &tx, const std::string &ap_id,
                                      std::uint64_t noise_stream) {
    if (paths.empty())
        return std::nullopt;
    try {
        if (cfg.feature_mode == FeatureMode::Oracle)
            return oracle_features(paths);
        const auto snaps = synthesize_csi(paths, cfg.csi,
                                          derive_seed(cfg.csi_seed, noise_stream),
                                          tx, ap_id);
        const auto cov = fb_smooth(snaps, cfg.subarray);
        const MusicGrid grid =
            cfg.music_grid_set ? cfg.music : default_grid(cfg.csi);
        const auto est = music_estimate(cov, cfg.csi, std::nullopt, grid);
        if (est.empty())
            return std::nullopt;
        return extract_mp(est);
    } catch (const OutageError &) {
        return std::nullopt;
    }
}

FingerprintBase build_database(const ExperimentConfig &cfg,
                               std::vector<std::size_t> *dropped) {
    cfg.validate();
    const auto rps = build_grid(cfg.area, cfg.grid_interval);
    std::vector<std::string> ap_ids;
    for (const ApSpec &ap : cfg.aps)
        ap_ids.push_back(ap.id);

    std::vector<std::vector<std::optional<MpFeature>>> features;
    features.reserve(rps.size());
    std::uint64_t stream = 0;
    for (const auto &[x, y] : rps) {
        const Vec3 tx{x, y, cfg.rp_height};
        std::vector<std::optional<MpFeature>> row;
        for (const ApSpec &ap : cfg.aps) {
            const auto paths =
                trace_paths(cfg.scene, tx, ap.position, cfg.max_reflection_order,
                            cfg.max_diffraction_order);
            row.push_back(link_feature(cfg, paths, tx, ap.id, stream++));
        }
        features.push_back(std::move(row));
    }
    return assemble(rps, ap_ids, features, cfg.grid_interval, cfg.area.x0,
                    cfg.area.y0, cfg.scenario_id, dropped);
}

namespace {

Eigen::VectorXd features_vector(const std::vector<MpFeature> &per_ap) {
    Eigen::VectorXd v(4 * static_cast<long>(per_ap.size()));
    for (std::size_t a = 0; a < per_ap.size(); ++a) {
        v(4 * a + 0) = per_ap[a].rss;
        v(4 * a + 1) = per_ap[a].aaoa;
        v(4 * a + 2) = per_ap[a].eaoa;
        v(4 * a + 3) = per_ap[a].toa;
    }
    return v;
}

std::optional<TestRecord> tp_record(const ExperimentConfig &cfg, double x,
                                    double y, std::uint64_t noise_stream) {
    const Vec3 tx{x, y, cfg.rp_height};
    std::vector<MpFeature> per_ap;
    for (const ApSpec &ap : cfg.aps) {
        const auto paths =
            trace_paths(cfg.scene, tx, ap.position, cfg.max_reflection_order,
                        cfg.max_diffraction_order);
        const auto f = link_feature(cfg, paths, tx, ap.id,
                                    noise_stream * cfg.aps.size() + per_ap.size());
        if (!f)
            return std::nullopt;
        per_ap.push_back(*f);
    }
    TestRecord rec;
    rec.true_x = x;
    rec.true_y = y;
    rec.features = features_vector(per_ap);
    return rec;
}

} // namespace

std::vector<TestRecord> make_test_points(const ExperimentConfig &cfg,
                                         std::uint64_t seed) {
    cfg.validate();
    std::vector<TestRecord> out;
    if (cfg.tp_on_grid) {
        const double off =
            cfg.tp_grid_offset < 0.0 ? cfg.grid_interval / 2.0 : cfg.tp_grid_offset;
        const auto grid = build_grid(cfg.area, cfg.grid_interval);
        std::uint64_t stream = 1u << 20;
        for (const auto &[gx, gy] : grid) {
            if (static_cast<int>(out.size()) >= cfg.tp_count)
                break;
            const double x = gx + off;
            const double y = gy + off;
            if (x > cfg.area.x0 + cfg.area.width || y > cfg.area.y0 + cfg.area.height)
                continue;
            const auto rec = tp_record(cfg, x, y, stream++);
            if (rec)
                out.push_back(*rec);
        }
        if (static_cast<int>(out.size()) < cfg.tp_count)
            throw std::runtime_error("make_test_points: grid placement yielded " +
                                     std::to_string(out.size()) + " of " +
                                     std::to_string(cfg.tp_count) + " TPs");
    } else {
        std::mt19937_64 rng(derive_seed(seed, 0xAD0BE));
        std::uint64_t stream = 1u << 21;
        long attempts = 0;
        const long cap = 100L * cfg.tp_count;
        while (static_cast<int>(out.size()) < cfg.tp_count) {
            if (++attempts > cap)
                throw std::runtime_error(
                    "make_test_points: too many outage draws; scene unusable");
            const double x =
                uniform_range(rng, cfg.area.x0, cfg.area.x0 + cfg.area.width);
            const double y =
                uniform_range(rng, cfg.area.y0, cfg.area.y0 + cfg.area.height);
            const auto rec = tp_record(cfg, x, y, stream++);
            if (rec)
                out.push_back(*rec);
        }
    }
    return out;
}

std::vector<double> ResultSet::pooled_errors(Algorithm a) const {
    std::vector<double> out;
    for (const AlgoSeedResult &r : entries)
        if (r.algo == a)
            out.insert(out.end(), r.errors.begin(), r.errors.end());
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Median wall-clock time of `reps` runs of fn (fn must be idempotent).
template <typename Fn> double median_time(int reps, Fn &&fn) {
    std::vector<double> times;
    times.reserve(reps);
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

} // namespace

ResultSet run_experiment(const ExperimentConfig &cfg) {
    cfg.validate();
    const FingerprintBase db = build_database(cfg);
    if (db.n_rps() < 2)
        throw std::runtime_error("run_experiment: database has fewer than 2 RPs");

    ForestParams params;
    params.n_trees = cfg.n_trees;
    params.k = cfg.k;

    ResultSet results;
    results.tp_count = cfg.tp_count;

    for (const std::uint64_t seed : cfg.seeds) {
        const auto tps = make_test_points(cfg, seed);

        for (const Algorithm algo : cfg.algorithms) {
            AlgoSeedResult res;
            res.algo = algo;
            res.seed = seed;

            std::pair<ForestModel, ForestModel> wrf_models;
            ForestModel joint_model;
            if (algo == Algorithm::Wrf) {
                res.train_s = median_time(cfg.timing_reps, [&] {
                    wrf_models = train(db, params, seed);
                });
            } else if (algo == Algorithm::Rf) {
                res.train_s = median_time(cfg.timing_reps, [&] {
                    joint_model = train_joint(db, params, seed);
                });
            }

            WknnConfig wknn_cfg;
            wknn_cfg.k = std::min<int>(cfg.k, static_cast<int>(db.n_rps()));

            std::vector<PositionEstimate> ests(tps.size());
            res.position_total_s = median_time(cfg.timing_reps, [&] {
                for (std::size_t i = 0; i < tps.size(); ++i) {
                    switch (algo) {
                    case Algorithm::Wrf:
                        ests[i] = estimate_position(wrf_models.first,
                                                    wrf_models.second,
                                                    tps[i].features, cfg.k);
                        break;
                    case Algorithm::Rf:
                        ests[i] = rf_joint_estimate(joint_model, tps[i].features);
                        break;
                    case Algorithm::Wknn:
                        ests[i] = wknn_estimate(db, tps[i].features, wknn_cfg);
                        break;
                    }
                }
            });
            res.position_per_tp_s = res.position_total_s / tps.size();

            res.errors.reserve(tps.size());
            for (std::size_t i = 0; i < tps.size(); ++i)
                res.errors.push_back(std::hypot(ests[i].x - tps[i].true_x,
                                                ests[i].y - tps[i].true_y));
            res.stats = error_stats(res.errors);
            results.entries.push_back(std::move(res));
        }
    }
    return results;
}

std::vector<SweepRow> sweep(const ExperimentConfig &cfg,
                            const std::vector<double> &grid_intervals) {
    if (grid_intervals.size() < 2)
        throw std::invalid_argument("sweep: need at least 2 grid intervals");
    std::vector<SweepRow> rows;
    for (const double interval : grid_intervals) {
        ExperimentConfig c = cfg;
        c.grid_interval = interval;
        c.seeds = {cfg.seeds.front()};
        const ResultSet r = run_experiment(c);
        const FingerprintBase db = build_database(c);
        for (const AlgoSeedResult &e : r.entries)
            rows.push_back({interval, e.algo, db.n_rps(), e.train_s,
                            e.position_total_s});
    }
    return rows;
}

} // namespace csiloc
