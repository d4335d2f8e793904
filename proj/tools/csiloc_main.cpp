// CLI for the CSI-fingerprint indoor positioning pipeline: simulate links,
// build the fingerprint database, train forests, locate test points, run
// full evaluations, and sweep grid intervals.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "csiloc/errors.hpp"
#include "csiloc/experiment.hpp"
#include "csiloc/forest.hpp"
#include "csiloc/outputs.hpp"
#include "csiloc/rng.hpp"
#include "csiloc/smoothing.hpp"

using namespace csiloc;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> feature_mode;
    std::vector<std::string> algos;
    std::optional<int> k;
    std::optional<int> trees;
    std::optional<double> grid;
    std::optional<std::string> scenario;
};

void add_common(CLI::App *cmd, CommonOpts &opts) {
    cmd->add_option("--config", opts.config_path, "Configuration file (ini)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Override the seed list with one seed");
    cmd->add_option("--feature-mode", opts.feature_mode, "oracle|estimated");
    cmd->add_option("--algo", opts.algos, "Algorithm (repeatable): wrf|rf|wknn");
    cmd->add_option("--k", opts.k, "Candidates kept by the weighted decoders");
    cmd->add_option("--trees", opts.trees, "Number of trees per forest");
    cmd->add_option("--grid", opts.grid, "RP grid interval in meters");
    cmd->add_option("--scenario", opts.scenario, "Scenario preset: 1|2");
}

ExperimentConfig resolve_config(const CommonOpts &opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty())
        cfg = config_from_ini(IniDoc::read_file(opts.config_path));
    else if (opts.scenario && *opts.scenario == "1")
        cfg = scenario_1();
    else
        cfg = scenario_2();
    if (opts.scenario && opts.config_path.empty() && *opts.scenario == "2")
        cfg = scenario_2();

    if (opts.seed)
        cfg.seeds = {*opts.seed};
    if (opts.feature_mode) {
        if (*opts.feature_mode == "oracle")
            cfg.feature_mode = FeatureMode::Oracle;
        else if (*opts.feature_mode == "estimated")
            cfg.feature_mode = FeatureMode::Estimated;
        else
            throw CLI::ValidationError("--feature-mode", "must be oracle|estimated");
    }
    if (!opts.algos.empty()) {
        cfg.algorithms.clear();
        for (const std::string &a : opts.algos) {
            if (a == "wrf")
                cfg.algorithms.push_back(Algorithm::Wrf);
            else if (a == "rf")
                cfg.algorithms.push_back(Algorithm::Rf);
            else if (a == "wknn")
                cfg.algorithms.push_back(Algorithm::Wknn);
            else
                throw CLI::ValidationError("--algo", "must be wrf|rf|wknn");
        }
    }
    if (opts.k)
        cfg.k = *opts.k;
    if (opts.trees)
        cfg.n_trees = *opts.trees;
    if (opts.grid)
        cfg.grid_interval = *opts.grid;
    return cfg;
}

std::string out_path(const CommonOpts &opts, const std::string &name) {
    std::filesystem::create_directories(opts.out_dir);
    return opts.out_dir + "/" + name;
}

void write_text(const std::string &path, const std::string &content) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    std::cout << "wrote " << path << "\n";
}

int cmd_simulate(const CommonOpts &opts) {
    const ExperimentConfig cfg = resolve_config(opts);
    const auto links = simulate_links(cfg);
    const std::string path = out_path(opts, "paths.json");
    save_paths(links, path);
    std::size_t n_paths = 0;
    for (const auto &l : links)
        n_paths += l.paths.size();
    std::cout << "wrote " << path << " (" << links.size() << " links, " << n_paths
              << " paths)\n";

    if (cfg.feature_mode == FeatureMode::Estimated) {
        // Per-link estimator output next to the ground-truth paths.
        std::vector<std::pair<std::string, std::vector<EstimatedPath>>> est;
        std::uint64_t stream = 0;
        for (const auto &l : links) {
            char id[96];
            std::snprintf(id, sizeof(id), "%.6g_%.6g/%s", l.tx.x, l.tx.y,
                          l.ap_id.c_str());
            std::vector<EstimatedPath> paths;
            if (!l.paths.empty()) {
                const auto snaps =
                    synthesize_csi(l.paths, cfg.csi,
                                   derive_seed(cfg.csi_seed, stream), l.tx, l.ap_id);
                const auto cov = fb_smooth(snaps, cfg.subarray);
                const MusicGrid grid =
                    cfg.music_grid_set ? cfg.music : default_grid(cfg.csi);
                paths = music_estimate(cov, cfg.csi, std::nullopt, grid);
            }
            ++stream;
            est.emplace_back(id, std::move(paths));
        }
        write_text(out_path(opts, "estimated.csv"), estimated_paths_csv(est));
    }
    return 0;
}

int cmd_build_db(const CommonOpts &opts, const std::string &paths_file,
                 bool csv) {
    const ExperimentConfig cfg = resolve_config(opts);
    FingerprintBase db;
    std::vector<std::size_t> dropped;
    if (!paths_file.empty()) {
        // Replay a simulate stage: features from the serialized path lists.
        const auto links = load_paths(paths_file);
        std::vector<std::string> ap_ids;
        for (const ApSpec &ap : cfg.aps)
            ap_ids.push_back(ap.id);
        std::map<std::pair<long, long>, std::vector<std::optional<MpFeature>>> rows;
        const auto rps = build_grid(cfg.area, cfg.grid_interval);
        std::vector<std::vector<std::optional<MpFeature>>> features(
            rps.size(), std::vector<std::optional<MpFeature>>(ap_ids.size()));
        std::uint64_t stream = 0;
        for (const auto &l : links) {
            long rp_idx = -1, ap_idx = -1;
            for (std::size_t i = 0; i < rps.size(); ++i)
                if (std::abs(rps[i].first - l.tx.x) < 1e-9 &&
                    std::abs(rps[i].second - l.tx.y) < 1e-9)
                    rp_idx = static_cast<long>(i);
            for (std::size_t a = 0; a < ap_ids.size(); ++a)
                if (ap_ids[a] == l.ap_id)
                    ap_idx = static_cast<long>(a);
            if (rp_idx < 0 || ap_idx < 0)
                throw LoadError("paths file does not match the configured grid");
            features[rp_idx][ap_idx] =
                link_feature(cfg, l.paths, l.tx, l.ap_id, stream++);
        }
        db = assemble(rps, ap_ids, features, cfg.grid_interval, cfg.area.x0,
                      cfg.area.y0, cfg.scenario_id, &dropped);
    } else {
        db = build_database(cfg, &dropped);
    }
    const std::string path = out_path(opts, "db.json");
    save(db, path);
    std::cout << "wrote " << path << " (" << db.n_rps() << " valid RPs, "
              << dropped.size() << " dropped)\n";
    if (csv)
        write_text(out_path(opts, "db.csv"), to_csv(db));
    return 0;
}

int cmd_train(const CommonOpts &opts, const std::string &db_file) {
    const ExperimentConfig cfg = resolve_config(opts);
    const FingerprintBase db = db_file.empty() ? build_database(cfg) : load(db_file);
    ForestParams params;
    params.n_trees = cfg.n_trees;
    params.k = cfg.k;
    const std::uint64_t seed = cfg.seeds.front();
    bool want_wrf = false, want_rf = false;
    for (const Algorithm a : cfg.algorithms) {
        want_wrf = want_wrf || a == Algorithm::Wrf;
        want_rf = want_rf || a == Algorithm::Rf;
    }
    if (want_wrf) {
        const auto [mx, my] = train(db, params, seed);
        save_model(mx, out_path(opts, "model_x.json"));
        save_model(my, out_path(opts, "model_y.json"));
        std::cout << "wrote " << opts.out_dir << "/model_x.json and model_y.json ("
                  << params.n_trees << " trees each)\n";
    }
    if (want_rf) {
        save_model(train_joint(db, params, seed), out_path(opts, "model_joint.json"));
        std::cout << "wrote " << opts.out_dir << "/model_joint.json\n";
    }
    return 0;
}

int cmd_locate(const CommonOpts &opts, const std::string &db_file,
               const std::string &tps_file, const std::string &model_x,
               const std::string &model_y, const std::string &model_joint) {
    const ExperimentConfig cfg = resolve_config(opts);
    const auto tps = load_testset(tps_file);
    if (tps.empty())
        throw std::runtime_error("empty test set");

    std::string csv = "algorithm,tp_index,x_m,y_m,error_m\n";
    char buf[160];
    auto emit = [&](const char *name, std::size_t i, const PositionEstimate &est) {
        const double err =
            std::hypot(est.x - tps[i].true_x, est.y - tps[i].true_y);
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.9g,%.9g,%.9g\n", name, i, est.x,
                      est.y, err);
        csv += buf;
    };

    for (const Algorithm algo : cfg.algorithms) {
        if (algo == Algorithm::Wrf) {
            if (model_x.empty() || model_y.empty())
                throw std::runtime_error("wrf needs --model-x and --model-y");
            const ForestModel mx = load_model(model_x);
            const ForestModel my = load_model(model_y);
            for (std::size_t i = 0; i < tps.size(); ++i)
                emit("WRF", i, estimate_position(mx, my, tps[i].features, cfg.k));
        } else if (algo == Algorithm::Rf) {
            if (model_joint.empty())
                throw std::runtime_error("rf needs --model-joint");
            const ForestModel mj = load_model(model_joint);
            for (std::size_t i = 0; i < tps.size(); ++i)
                emit("RF", i, rf_joint_estimate(mj, tps[i].features));
        } else {
            if (db_file.empty())
                throw std::runtime_error("wknn needs --db");
            const FingerprintBase db = load(db_file);
            WknnConfig wcfg;
            wcfg.k = cfg.k;
            for (std::size_t i = 0; i < tps.size(); ++i)
                emit("WKNN", i, wknn_estimate(db, tps[i].features, wcfg));
        }
    }
    write_text(out_path(opts, "estimates.csv"), csv);
    return 0;
}

int cmd_evaluate(const CommonOpts &opts, bool dump_tps) {
    const ExperimentConfig cfg = resolve_config(opts);
    const ResultSet results = run_experiment(cfg);
    for (const auto &f : emit_outputs(results, opts.out_dir))
        std::cout << "wrote " << f << "\n";
    if (dump_tps)
        save_testset(make_test_points(cfg, cfg.seeds.front()),
                     out_path(opts, "testset.json"));
    std::string summary;
    for (const AlgoSeedResult &r : results.entries) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "%-5s seed %llu: mean %.4f m, max %.4f m, train %.3f s, "
                      "position %.3f s\n",
                      algorithm_name(r.algo),
                      static_cast<unsigned long long>(r.seed), r.stats.mean,
                      r.stats.max, r.train_s, r.position_total_s);
        summary += line;
    }
    std::cout << summary;
    return 0;
}

int cmd_sweep(const CommonOpts &opts, std::vector<double> intervals) {
    const ExperimentConfig cfg = resolve_config(opts);
    if (intervals.empty())
        intervals = {1.0, 0.2};
    const auto rows = sweep(cfg, intervals);
    write_text(out_path(opts, "timing.csv"), timing_csv(rows));
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"CSI-fingerprint indoor positioning pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string paths_file, db_file, tps_file;
    std::string model_x, model_y, model_joint;
    bool csv = false, dump_tps = false;
    std::vector<double> intervals;

    CLI::App *sim = app.add_subcommand("simulate", "Trace paths for every RP/AP link");
    add_common(sim, opts);

    CLI::App *bdb = app.add_subcommand("build-db", "Build the fingerprint database");
    add_common(bdb, opts);
    bdb->add_option("--paths", paths_file, "Reuse a simulated paths.json");
    bdb->add_flag("--csv", csv, "Also export db.csv");

    CLI::App *trn = app.add_subcommand("train", "Train forest models");
    add_common(trn, opts);
    trn->add_option("--db", db_file, "Fingerprint database file");

    CLI::App *loc = app.add_subcommand("locate", "Estimate positions for a test set");
    add_common(loc, opts);
    loc->add_option("--db", db_file, "Fingerprint database file (wknn)");
    loc->add_option("--tps", tps_file, "Test set JSON")->required();
    loc->add_option("--model-x", model_x, "WRF x-axis model");
    loc->add_option("--model-y", model_y, "WRF y-axis model");
    loc->add_option("--model-joint", model_joint, "Joint RF model");

    CLI::App *ev = app.add_subcommand("evaluate", "Run the full pipeline and emit results");
    add_common(ev, opts);
    ev->add_flag("--dump-tps", dump_tps, "Also write testset.json (first seed)");

    CLI::App *sw = app.add_subcommand("sweep", "Timing table over grid intervals");
    add_common(sw, opts);
    sw->add_option("--grid-intervals", intervals, "Grid intervals in meters");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(opts);
        if (bdb->parsed())
            return cmd_build_db(opts, paths_file, csv);
        if (trn->parsed())
            return cmd_train(opts, db_file);
        if (loc->parsed())
            return cmd_locate(opts, db_file, tps_file, model_x, model_y, model_joint);
        if (ev->parsed())
            return cmd_evaluate(opts, dump_tps);
        if (sw->parsed())
            return cmd_sweep(opts, intervals);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
