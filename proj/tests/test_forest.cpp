#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "csiloc/errors.hpp"
#include "csiloc/forest.hpp"
#include "csiloc/rng.hpp"

using namespace csiloc;

namespace {

// Synthetic database over a grid with smooth, injective features.
FingerprintBase synth_db(int nx, int ny, double interval = 0.5,
                         double noise = 0.0, std::uint64_t seed = 0) {
    FingerprintBase db;
    db.sn = {"AP1", "AP2"};
    db.grid_interval = interval;
    db.scenario_id = "synthetic";
    const long n = static_cast<long>(nx) * ny;
    db.coordinate.resize(n, 2);
    db.fingerprint.resize(n, 8);
    std::mt19937_64 rng(derive_seed(seed, 77));
    long r = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i, ++r) {
            const double x = i * interval, y = j * interval;
            db.coordinate(r, 0) = x;
            db.coordinate(r, 1) = y;
            const double fs[8] = {-60.0 - 2.0 * x - 0.5 * y,
                                  30.0 * std::atan2(y + 0.3, x + 0.3),
                                  -20.0 + 3.0 * y,
                                  10.0 + 4.0 * std::hypot(x, y),
                                  -55.0 - 1.2 * y + 0.8 * x,
                                  25.0 * std::atan2(y - 2.7, x - 3.1),
                                  -25.0 + 2.0 * x,
                                  12.0 + 3.5 * std::hypot(x - 4.0, y - 3.0)};
            for (int c = 0; c < 8; ++c)
                db.fingerprint(r, c) =
                    fs[c] + (noise > 0.0 ? noise * (uniform01(rng) - 0.5) : 0.0);
        }
    }
    return db;
}

// Independent brute-force split oracle: evaluate the split definition for
// every (feature, midpoint) pair with exact rational comparisons.
struct OracleSplit {
    int feature;
    double threshold;
};

std::optional<OracleSplit> brute_force_split(const Eigen::MatrixXd &x,
                                             const std::vector<int> &y,
                                             int n_classes,
                                             const std::vector<int> &features) {
    const long n = x.rows();
    std::optional<OracleSplit> best;
    // quality = sumsqL/nL + sumsqR/nR as an exact rational (num, den)
    long long best_num = 0, best_den = 1;
    long long parent_num = 0;
    for (int c = 0; c < n_classes; ++c) {
        long cnt = std::count(y.begin(), y.end(), c);
        parent_num += static_cast<long long>(cnt) * cnt;
    }
    const long long parent_den = n;

    for (int f : features) {
        std::vector<double> vals;
        for (long i = 0; i < n; ++i)
            vals.push_back(x(i, f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
            double thr = vals[v] + 0.5 * (vals[v + 1] - vals[v]);
            if (thr >= vals[v + 1])
                thr = vals[v];
            std::vector<long> cl(n_classes, 0), cr(n_classes, 0);
            long nl = 0, nr = 0;
            for (long i = 0; i < n; ++i) {
                if (x(i, f) <= thr) {
                    ++cl[y[i]];
                    ++nl;
                } else {
                    ++cr[y[i]];
                    ++nr;
                }
            }
            long long sl = 0, sr = 0;
            for (int c = 0; c < n_classes; ++c) {
                sl += static_cast<long long>(cl[c]) * cl[c];
                sr += static_cast<long long>(cr[c]) * cr[c];
            }
            const long long num = sl * nr + sr * nl;
            const long long den = nl * nr;
            // must strictly beat the parent (impurity must drop)
            if (static_cast<__int128>(num) * parent_den <=
                static_cast<__int128>(parent_num) * den)
                continue;
            bool better = false;
            if (!best) {
                better = true;
            } else {
                const auto lhs = static_cast<__int128>(num) * best_den;
                const auto rhs = static_cast<__int128>(best_num) * den;
                if (lhs > rhs)
                    better = true;
                else if (lhs == rhs && (f < best->feature ||
                                        (f == best->feature && thr < best->threshold)))
                    better = true;
            }
            if (better) {
                best = OracleSplit{f, thr};
                best_num = num;
                best_den = den;
            }
        }
    }
    return best;
}

ForestModel manual_vote_model(const std::vector<double> &label_set,
                              const std::vector<int> &votes, Axis axis = Axis::X) {
    ForestModel m;
    m.axis = axis;
    m.label_set = label_set;
    m.n_features = 1;
    for (std::size_t c = 0; c < votes.size(); ++c)
        for (int v = 0; v < votes[c]; ++v) {
            DecisionTree t;
            DecisionTree::Node leaf;
            leaf.leaf = true;
            leaf.label = static_cast<int>(c);
            t.nodes.push_back(leaf);
            m.trees.push_back(t);
        }
    return m;
}

} // namespace

TEST_CASE("gini of a histogram") {
    CHECK(gini({4}) == 0.0);
    CHECK(gini({2, 2}) == 0.5);
    CHECK(gini({3, 1}) == 0.375);
    CHECK(gini({0, 5, 0}) == 0.0);
    CHECK_THROWS_AS(gini({}), std::invalid_argument);
    CHECK_THROWS_AS(gini({0, 0}), std::invalid_argument);
}

TEST_CASE("gini stays within [0, 1 - 1/C] and is 0 only when pure") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 1 + static_cast<int>(uniform_index(rng, 6));
        std::vector<long> counts(c);
        long total = 0;
        for (long &v : counts)
            total += v = static_cast<long>(uniform_index(rng, 10));
        if (total == 0)
            counts[0] = total = 1;
        const double g = gini(counts);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0 - 1.0 / c + 1e-12);
        const int nonzero = static_cast<int>(
            std::count_if(counts.begin(), counts.end(), [](long v) { return v > 0; }));
        CHECK((g == 0.0) == (nonzero == 1));
    }
}

TEST_CASE("best_split separates a clean two-class set") {
    Eigen::MatrixXd x(4, 1);
    x << 1.0, 2.0, 8.0, 9.0;
    Dataset data{&x, {0, 0, 1, 1}, 2};
    const auto s = best_split(data, {0, 1, 2, 3}, {0});
    REQUIRE(s.has_value());
    CHECK(s->feature == 0);
    CHECK(s->threshold > 2.0);
    CHECK(s->threshold < 8.0);
    CHECK(s->weighted_impurity == 0.0);
}

TEST_CASE("constant features yield no split") {
    Eigen::MatrixXd x(3, 2);
    x << 4.0, 1.0, 4.0, 1.0, 4.0, 1.0;
    Dataset data{&x, {0, 1, 0}, 2};
    CHECK(!best_split(data, {0, 1, 2}, {0, 1}).has_value());
}

TEST_CASE("best_split matches the exhaustive oracle on random instances") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 11)); // <= 12
        const int nf = 1 + static_cast<int>(uniform_index(rng, 3)); // <= 3
        const int nc = 2 + static_cast<int>(uniform_index(rng, 3));
        Eigen::MatrixXd x(n, nf);
        std::vector<int> y(n);
        // coarse values provoke duplicates and impurity ties
        for (int i = 0; i < n; ++i) {
            y[i] = static_cast<int>(uniform_index(rng, nc));
            for (int f = 0; f < nf; ++f)
                x(i, f) = static_cast<double>(uniform_index(rng, 6));
        }
        Dataset data{&x, y, nc};
        std::vector<int> all_samples(n), all_features(nf);
        std::iota(all_samples.begin(), all_samples.end(), 0);
        std::iota(all_features.begin(), all_features.end(), 0);

        const auto got = best_split(data, all_samples, all_features);
        const auto want = brute_force_split(x, y, nc, all_features);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->feature == want->feature);
            CHECK(got->threshold == want->threshold);
        }
    }
}

TEST_CASE("split never increases the weighted impurity") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 30));
        Eigen::MatrixXd x(n, 2);
        std::vector<int> y(n);
        std::vector<long> counts(3, 0);
        for (int i = 0; i < n; ++i) {
            y[i] = static_cast<int>(uniform_index(rng, 3));
            ++counts[y[i]];
            x(i, 0) = uniform01(rng);
            x(i, 1) = static_cast<double>(uniform_index(rng, 4));
        }
        Dataset data{&x, y, 3};
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        const auto s = best_split(data, all, {0, 1});
        if (s)
            CHECK(s->weighted_impurity <= gini(counts) + 1e-12);
    }
}

TEST_CASE("tree_generate follows the recursion contract") {
    ForestParams params;
    std::mt19937_64 rng(3);

    SUBCASE("pure set collapses to a single leaf") {
        Eigen::MatrixXd x(3, 1);
        x << 1.0, 2.0, 3.0;
        Dataset data{&x, {1, 1, 1}, 2};
        const DecisionTree t = tree_generate(data, {0, 1, 2}, {0}, rng, params);
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].leaf);
        CHECK(t.nodes[0].label == 1);
    }

    SUBCASE("linearly separable set needs one split") {
        Eigen::MatrixXd x(6, 1);
        x << 0.0, 0.1, 0.2, 5.0, 5.1, 5.2;
        Dataset data{&x, {0, 0, 0, 1, 1, 1}, 2};
        const DecisionTree t =
            tree_generate(data, {0, 1, 2, 3, 4, 5}, {0}, rng, params);
        CHECK(t.depth() == 2);
        for (int i = 0; i < 6; ++i)
            CHECK(t.predict(x.row(i).transpose()) == data.y[i]);
    }

    SUBCASE("constant-feature leaves reproduce the majority rule") {
        std::mt19937_64 gen(31);
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 3 + static_cast<int>(uniform_index(gen, 10));
            Eigen::MatrixXd x(n, 1);
            std::vector<int> y(n);
            for (int i = 0; i < n; ++i) {
                x(i, 0) = 7.0; // constant: forces an immediate majority leaf
                y[i] = static_cast<int>(uniform_index(gen, 3));
            }
            Dataset data{&x, y, 3};
            std::vector<int> all(n);
            std::iota(all.begin(), all.end(), 0);
            const DecisionTree t = tree_generate(data, all, {0}, rng, params);
            REQUIRE(t.nodes.size() == 1);
            std::vector<long> counts(3, 0);
            for (int v : y)
                ++counts[v];
            long best_count = *std::max_element(counts.begin(), counts.end());
            // smallest label value among the tied majority classes
            int want = 0;
            for (int c = 0; c < 3; ++c)
                if (counts[c] == best_count) {
                    want = c;
                    break;
                }
            CHECK(t.nodes[0].label == want);
        }
    }

    SUBCASE("empty sub-training set is rejected") {
        Eigen::MatrixXd x(1, 1);
        Dataset data{&x, {0}, 1};
        CHECK_THROWS_AS(tree_generate(data, {}, {0}, rng, params),
                        std::invalid_argument);
    }
}

TEST_CASE("training is deterministic and fits separable data") {
    const FingerprintBase db = synth_db(5, 4);
    ForestParams params;
    params.n_trees = 25;

    SUBCASE("same (db, seed) gives identical models") {
        const auto [ax, ay] = train(db, params, 99);
        const auto [bx, by] = train(db, params, 99);
        REQUIRE(ax.trees.size() == bx.trees.size());
        for (long i = 0; i < db.n_rps(); ++i) {
            const Eigen::VectorXd f = db.fingerprint.row(i).transpose();
            CHECK(estimate_position(ax, ay, f, 3).x ==
                  estimate_position(bx, by, f, 3).x);
            CHECK(estimate_position(ax, ay, f, 3).y ==
                  estimate_position(bx, by, f, 3).y);
        }
        const auto [cx, cy] = train(db, params, 100);
        bool any_diff = false;
        for (long i = 0; i < db.n_rps() && !any_diff; ++i) {
            const Eigen::VectorXd f = db.fingerprint.row(i).transpose();
            any_diff = estimate_position(ax, ay, f, 3).x !=
                       estimate_position(cx, cy, f, 3).x;
        }
        CHECK(any_diff);
    }

    SUBCASE("single unbagged tree with all features fits the training set") {
        ForestParams p;
        p.n_trees = 1;
        p.bootstrap = false;
        p.feature_subset_size = 8;
        const auto [mx, my] = train(db, p, 1);
        for (long i = 0; i < db.n_rps(); ++i) {
            const Eigen::VectorXd f = db.fingerprint.row(i).transpose();
            CHECK(estimate_position(mx, my, f, 1).x == db.coordinate(i, 0));
            CHECK(estimate_position(mx, my, f, 1).y == db.coordinate(i, 1));
        }
    }

    SUBCASE("single-RP database is degenerate") {
        FingerprintBase one;
        one.sn = db.sn;
        one.grid_interval = db.grid_interval;
        one.coordinate = db.coordinate.topRows(1);
        one.fingerprint = db.fingerprint.topRows(1);
        CHECK_THROWS_AS(train(one, params, 1), std::invalid_argument);
    }
}

TEST_CASE("out-of-bag accuracy beats the uniform baseline") {
    const FingerprintBase db = synth_db(8, 6, 0.5, 1.0, 5);
    ForestParams params;
    params.n_trees = 60;
    const std::uint64_t seed = 11;
    const auto [mx, my] = train(db, params, seed);
    const long n = db.n_rps();

    for (const Axis axis : {Axis::X, Axis::Y}) {
        const ForestModel &model = axis == Axis::X ? mx : my;
        const int col = axis == Axis::X ? 0 : 1;
        long correct = 0, counted = 0;
        for (long i = 0; i < n; ++i) {
            std::vector<long> votes(model.label_set.size(), 0);
            for (int t = 0; t < params.n_trees; ++t) {
                const auto bag = bootstrap_indices(seed, axis, t, static_cast<int>(n));
                if (std::find(bag.begin(), bag.end(), static_cast<int>(i)) != bag.end())
                    continue;
                ++votes[model.trees[t].predict(db.fingerprint.row(i).transpose())];
            }
            const long total = std::accumulate(votes.begin(), votes.end(), 0L);
            if (total == 0)
                continue;
            const int pred = static_cast<int>(
                std::max_element(votes.begin(), votes.end()) - votes.begin());
            ++counted;
            if (model.label_set[pred] == db.coordinate(i, col))
                ++correct;
        }
        REQUIRE(counted > 0);
        const double uniform = 1.0 / static_cast<double>(model.label_set.size());
        CHECK(static_cast<double>(correct) / counted > uniform);
    }
}

TEST_CASE("predict_scores turns votes into fractions") {
    SUBCASE("unanimous vote") {
        const ForestModel m = manual_vote_model({2.0, 3.0}, {10, 0});
        const auto s = predict_scores(m, Eigen::VectorXd::Zero(1), 1);
        REQUIRE(s.size() == 1);
        CHECK(s[0].value == 2.0);
        CHECK(s[0].score == 1.0);
    }
    SUBCASE("60/30/10 votes") {
        const ForestModel m = manual_vote_model({1.0, 2.0, 3.0}, {6, 3, 1});
        const auto s = predict_scores(m, Eigen::VectorXd::Zero(1), 2);
        REQUIRE(s.size() == 2);
        CHECK(s[0].value == 1.0);
        CHECK(s[0].score == doctest::Approx(0.6));
        CHECK(s[1].value == 2.0);
        CHECK(s[1].score == doctest::Approx(0.3));
    }
    SUBCASE("k = all labels sums to exactly 1") {
        const ForestModel m = manual_vote_model({1.0, 2.0, 3.0}, {5, 3, 2});
        const auto s = predict_scores(m, Eigen::VectorXd::Zero(1), 3);
        double sum = 0.0;
        for (const auto &c : s)
            sum += c.score;
        CHECK(sum == 1.0);
    }
    SUBCASE("vote ties break to the smaller class value") {
        const ForestModel m = manual_vote_model({1.0, 2.0, 3.0}, {4, 2, 4});
        const auto s = predict_scores(m, Eigen::VectorXd::Zero(1), 2);
        CHECK(s[0].value == 1.0);
        CHECK(s[1].value == 3.0);
    }
    SUBCASE("schema and range errors") {
        const ForestModel m = manual_vote_model({1.0, 2.0}, {1, 1});
        CHECK_THROWS_AS(predict_scores(m, Eigen::VectorXd::Zero(5), 1), SchemaError);
        CHECK_THROWS_AS(predict_scores(m, Eigen::VectorXd::Zero(1), 3),
                        std::invalid_argument);
        CHECK_THROWS_AS(predict_scores(m, Eigen::VectorXd::Zero(1), 0),
                        std::invalid_argument);
    }
}

TEST_CASE("estimate_position implements the score weighting") {
    const ForestModel mx = manual_vote_model({1.0, 1.2, 1.4}, {6, 3, 1}, Axis::X);
    const ForestModel my = manual_vote_model({2.0, 2.5}, {5, 5}, Axis::Y);
    const Eigen::VectorXd f = Eigen::VectorXd::Zero(1);

    SUBCASE("direct arithmetic") {
        const PositionEstimate est = estimate_position(mx, my, f, 3);
        CHECK(est.x == doctest::Approx(1.10).epsilon(1e-12));
        CHECK(est.y == doctest::Approx(2.25).epsilon(1e-12)); // equal scores: mean
    }
    SUBCASE("k = 1 returns the top class") {
        CHECK(estimate_position(mx, my, f, 1).x == 1.0);
    }
    SUBCASE("estimates are convex combinations of candidates") {
        const PositionEstimate est = estimate_position(mx, my, f, 3);
        double lo = 1e300, hi = -1e300;
        for (const auto &c : est.candidates_x) {
            lo = std::min(lo, c.value);
            hi = std::max(hi, c.value);
        }
        CHECK(est.x >= lo);
        CHECK(est.x <= hi);
    }
}

TEST_CASE("score weighting is degree-0 homogeneous") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ScoredCandidate> cands;
        const int k = 1 + static_cast<int>(uniform_index(rng, 5));
        for (int i = 0; i < k; ++i)
            cands.push_back({uniform_range(rng, -5.0, 5.0), uniform01(rng) + 0.01});
        const double base = score_weighted_value(cands);

        // powers of two scale exactly
        std::vector<ScoredCandidate> scaled = cands;
        for (auto &c : scaled)
            c.score *= 0.25;
        CHECK(score_weighted_value(scaled) == base);

        // arbitrary positive scale up to round-off
        scaled = cands;
        const double c0 = uniform_range(rng, 0.1, 10.0);
        for (auto &c : scaled)
            c.score *= c0;
        CHECK(score_weighted_value(scaled) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("estimate_joint decodes RP coordinates") {
    const FingerprintBase db = synth_db(3, 3);
    ForestParams params;
    params.n_trees = 30;
    const ForestModel joint = train_joint(db, params, 7);

    SUBCASE("k = 1 returns the top-voted RP coordinate") {
        const Eigen::VectorXd f = db.fingerprint.row(4).transpose();
        const PositionEstimate est = estimate_joint(joint, f, 1);
        // trained on separable data, the majority should recover RP 4
        CHECK(est.x == db.coordinate(4, 0));
        CHECK(est.y == db.coordinate(4, 1));
    }

    SUBCASE("midpoint of two equal-scored RPs") {
        ForestModel m;
        m.axis = Axis::Joint;
        m.label_set = {0.0, 1.0};
        m.n_features = 1;
        m.joint_coords.resize(2, 2);
        m.joint_coords << 0.0, 0.0, 2.0, 2.0;
        for (int c = 0; c < 2; ++c)
            for (int v = 0; v < 5; ++v) {
                DecisionTree t;
                DecisionTree::Node leaf;
                leaf.leaf = true;
                leaf.label = c;
                t.nodes.push_back(leaf);
                m.trees.push_back(t);
            }
        const PositionEstimate est = estimate_joint(m, Eigen::VectorXd::Zero(1), 2);
        CHECK(est.x == 1.0);
        CHECK(est.y == 1.0);
    }

    SUBCASE("non-joint model is rejected") {
        const auto [mx, my] = train(db, params, 7);
        CHECK_THROWS_AS(estimate_joint(mx, db.fingerprint.row(0).transpose(), 1),
                        std::invalid_argument);
    }
}

TEST_CASE("model save/load round-trip preserves predictions") {
    const FingerprintBase db = synth_db(4, 4);
    ForestParams params;
    params.n_trees = 12;
    const auto [mx, my] = train(db, params, 3);
    const std::string path =
        (std::filesystem::temp_directory_path() / "csiloc_model.json").string();
    save_model(mx, path);
    const ForestModel back = load_model(path);
    CHECK(back.axis == mx.axis);
    CHECK(back.label_set == mx.label_set);
    for (long i = 0; i < db.n_rps(); ++i) {
        const Eigen::VectorXd f = db.fingerprint.row(i).transpose();
        const auto a = predict_scores(mx, f, 3);
        const auto b = predict_scores(back, f, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK(a[j].value == b[j].value);
            CHECK(a[j].score == b[j].score);
        }
    }
    std::filesystem::remove(path);

    const ForestModel joint = train_joint(db, params, 3);
    save_model(joint, path);
    const ForestModel joint_back = load_model(path);
    CHECK(joint_back.joint_coords == joint.joint_coords);
    std::filesystem::remove(path);
}
