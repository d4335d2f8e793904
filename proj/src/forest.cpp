#include "csiloc/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "csiloc/errors.hpp"
#include "csiloc/rng.hpp"

namespace csiloc {

using nlohmann::json;

namespace {
constexpr const char *kModelSchema = "csiloc.forest_model";
constexpr int kModelVersion = 1;
} // namespace

double gini(const std::vector<long> &class_counts) {
    long total = 0;
    for (long c : class_counts)
        total += c;
    if (total <= 0)
        throw std::invalid_argument("gini: empty histogram");
    double sum = 0.0;
    for (long c : class_counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum += p * p;
    }
    return 1.0 - sum;
}

namespace {

// Exact split quality. Minimizing the Gini-weighted child impurity equals
// maximizing sum(cL^2)/nL + sum(cR^2)/nR, a rational number in the integer
// class counts; comparing those rationals by cross-multiplication keeps split
// selection free of float round-off, so ties break identically everywhere.
struct SplitQuality {
    long long num = 0; // sumsqL * nR + sumsqR * nL
    long long den = 1; // nL * nR

    bool better_than(const SplitQuality &o) const {
        return static_cast<__int128>(num) * o.den >
               static_cast<__int128>(o.num) * den;
    }
    bool equals(const SplitQuality &o) const {
        return static_cast<__int128>(num) * o.den ==
               static_cast<__int128>(o.num) * den;
    }
};

double weighted_child_gini(long long sumsq_l, long n_l, long long sumsq_r,
                           long n_r) {
    const double total = static_cast<double>(n_l + n_r);
    const double gl = 1.0 - static_cast<double>(sumsq_l) / (static_cast<double>(n_l) * n_l);
    const double gr = 1.0 - static_cast<double>(sumsq_r) / (static_cast<double>(n_r) * n_r);
    return (n_l * gl + n_r * gr) / total;
}

int majority_label(const Dataset &data, const std::vector<int> &idx) {
    std::vector<long> counts(data.n_classes, 0);
    for (int i : idx)
        ++counts[data.y[i]];
    int best = 0;
    for (int c = 1; c < data.n_classes; ++c)
        if (counts[c] > counts[best])
            best = c; // ties keep the smaller class index (= smaller value)
    return best;
}

bool all_same_label(const Dataset &data, const std::vector<int> &idx) {
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (data.y[idx[i]] != data.y[idx[0]])
            return false;
    return true;
}

bool constant_on_features(const Dataset &data, const std::vector<int> &idx,
                          const std::vector<int> &features) {
    for (int f : features)
        for (std::size_t i = 1; i < idx.size(); ++i)
            if ((*data.x)(idx[i], f) != (*data.x)(idx[0], f))
                return false;
    return true;
}

} // namespace

std::optional<Split> best_split(const Dataset &data,
                                const std::vector<int> &sample_indices,
                                const std::vector<int> &candidate_features) {
    if (sample_indices.size() < 2 || candidate_features.empty())
        return std::nullopt;
    const long n = static_cast<long>(sample_indices.size());

    // Parent sum of squared counts; a split must beat sumsq_parent / n.
    std::vector<long> parent_counts(data.n_classes, 0);
    for (int i : sample_indices)
        ++parent_counts[data.y[i]];
    long long parent_sumsq = 0;
    for (long c : parent_counts)
        parent_sumsq += static_cast<long long>(c) * c;
    const SplitQuality parent{parent_sumsq * n, n * n};

    std::optional<Split> best;
    SplitQuality best_q;
    std::vector<int> order(sample_indices);
    std::vector<long> left_counts(data.n_classes);

    for (int f : candidate_features) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double va = (*data.x)(a, f), vb = (*data.x)(b, f);
            return va < vb;
        });
        std::fill(left_counts.begin(), left_counts.end(), 0L);
        long long sumsq_l = 0;
        long long sumsq_r = parent_sumsq;
        long n_l = 0;
        for (long i = 0; i + 1 < n; ++i) {
            const int cls = data.y[order[i]];
            // Moving one sample of class cls from right to left.
            sumsq_l += 2 * left_counts[cls] + 1;
            const long right_c = parent_counts[cls] - left_counts[cls];
            sumsq_r -= 2 * right_c - 1;
            ++left_counts[cls];
            ++n_l;
            const double v = (*data.x)(order[i], f);
            const double v_next = (*data.x)(order[i + 1], f);
            if (v == v_next)
                continue; // not a boundary between distinct values
            const SplitQuality q{sumsq_l * (n - n_l) + sumsq_r * n_l,
                                 n_l * (n - n_l)};
            if (!q.better_than(parent))
                continue; // no impurity reduction
            // Midpoint threshold; when rounding collapses it onto v_next the
            // partition x <= t would differ from the counted one, so fall
            // back to the left value (same partition for any t in [v, v_next)).
            double threshold = v + 0.5 * (v_next - v);
            if (threshold >= v_next)
                threshold = v;
            if (!best || q.better_than(best_q) ||
                (q.equals(best_q) &&
                 (f < best->feature ||
                  (f == best->feature && threshold < best->threshold)))) {
                best = Split{f, threshold,
                             weighted_child_gini(sumsq_l, n_l, sumsq_r, n - n_l)};
                best_q = q;
            }
        }
    }
    return best;
}

int DecisionTree::predict(const Eigen::Ref<const Eigen::VectorXd> &features) const {
    int i = 0;
    while (!nodes[i].leaf)
        i = features(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left
                                                             : nodes[i].right;
    return nodes[i].label;
}

int DecisionTree::depth() const {
    // Iterative depth over the node array.
    std::vector<std::pair<int, int>> stack{{0, 1}};
    int d = 0;
    while (!stack.empty()) {
        auto [i, depth] = stack.back();
        stack.pop_back();
        d = std::max(d, depth);
        if (!nodes[i].leaf) {
            stack.push_back({nodes[i].left, depth + 1});
            stack.push_back({nodes[i].right, depth + 1});
        }
    }
    return d;
}

namespace {

void grow(DecisionTree &tree, const Dataset &data, std::vector<int> idx,
          const std::vector<int> &features, std::mt19937_64 &rng,
          const ForestParams &params, int node_index, int depth) {
    DecisionTree::Node &node = tree.nodes[node_index];

    if (all_same_label(data, idx)) {
        node.leaf = true;
        node.label = data.y[idx[0]];
        return;
    }

    std::vector<int> node_features = features;
    if (params.per_node_features && params.feature_subset_size > 0) {
        node_features = feature_subset_for_tree(
            rng(), Axis::X, 0, static_cast<int>(data.x->cols()),
            params.feature_subset_size);
    }

    const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    if (constant_on_features(data, idx, node_features) || depth_capped) {
        node.leaf = true;
        node.label = majority_label(data, idx);
        return;
    }

    const auto split = best_split(data, idx, node_features);
    if (!split) {
        node.leaf = true;
        node.label = majority_label(data, idx);
        return;
    }

    std::vector<int> left, right;
    for (int i : idx) {
        if ((*data.x)(i, split->feature) <= split->threshold)
            left.push_back(i);
        else
            right.push_back(i);
    }
    if (left.empty() || right.empty()) {
        node.leaf = true;
        node.label = majority_label(data, idx);
        return;
    }
    idx.clear();
    idx.shrink_to_fit();

    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int ri = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_index].left = li;
    tree.nodes[node_index].right = ri;
    grow(tree, data, std::move(left), node_features, rng, params, li, depth + 1);
    grow(tree, data, std::move(right), node_features, rng, params, ri, depth + 1);
}

} // namespace

DecisionTree tree_generate(const Dataset &data,
                           const std::vector<int> &sample_indices,
                           const std::vector<int> &feature_subset,
                           std::mt19937_64 &rng, const ForestParams &params) {
    if (sample_indices.empty())
        throw std::invalid_argument("tree_generate: empty sub-training set");
    DecisionTree tree;
    tree.nodes.emplace_back();
    grow(tree, data, sample_indices, feature_subset, rng, params, 0, 0);
    return tree;
}

std::vector<int> bootstrap_indices(std::uint64_t master_seed, Axis axis,
                                   int tree_index, int n_samples) {
    std::mt19937_64 rng(derive_seed(
        master_seed, 0x1000 + 2 * static_cast<std::uint64_t>(tree_index) +
                         1000003ULL * static_cast<std::uint64_t>(axis)));
    std::vector<int> idx(n_samples);
    for (int i = 0; i < n_samples; ++i)
        idx[i] = static_cast<int>(uniform_index(rng, n_samples));
    return idx;
}

std::vector<int> feature_subset_for_tree(std::uint64_t master_seed, Axis axis,
                                         int tree_index, int n_features,
                                         int subset_size) {
    std::mt19937_64 rng(derive_seed(
        master_seed, 0x2000 + 2 * static_cast<std::uint64_t>(tree_index) +
                         1000003ULL * static_cast<std::uint64_t>(axis)));
    std::vector<int> all(n_features);
    std::iota(all.begin(), all.end(), 0);
    subset_size = std::min(subset_size, n_features);
    for (int i = 0; i < subset_size; ++i) {
        const std::size_t j = i + uniform_index(rng, n_features - i);
        std::swap(all[i], all[j]);
    }
    all.resize(subset_size);
    std::sort(all.begin(), all.end());
    return all;
}

namespace {

ForestModel train_axis(const FingerprintBase &db, const ForestParams &params,
                       std::uint64_t seed, Axis axis) {
    const long n = db.n_rps();
    const long n_feat = db.fingerprint.cols();
    if (n < 2)
        throw std::invalid_argument("train: degenerate model (single-RP database)");
    if (params.n_trees < 1)
        throw std::invalid_argument("train: n_trees must be >= 1");

    ForestModel model;
    model.axis = axis;
    model.train_seed = seed;
    model.n_features = n_feat;

    // Label universe: distinct coordinate values (or RP indices for Joint).
    std::vector<double> labels;
    if (axis == Axis::Joint) {
        labels.resize(n);
        std::iota(labels.begin(), labels.end(), 0.0);
        model.joint_coords = db.coordinate;
    } else {
        const int col = axis == Axis::X ? 0 : 1;
        labels.assign(db.coordinate.col(col).data(),
                      db.coordinate.col(col).data() + n);
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    }
    model.label_set = labels;

    Dataset data;
    data.x = &db.fingerprint;
    data.n_classes = static_cast<int>(labels.size());
    data.y.resize(n);
    for (long i = 0; i < n; ++i) {
        if (axis == Axis::Joint) {
            data.y[i] = static_cast<int>(i);
        } else {
            const int col = axis == Axis::X ? 0 : 1;
            const auto it = std::lower_bound(labels.begin(), labels.end(),
                                             db.coordinate(i, col));
            data.y[i] = static_cast<int>(it - labels.begin());
        }
    }

    int fss = params.feature_subset_size;
    if (fss <= 0) {
        // Subsets are drawn once per tree, so sqrt-sized draws starve whole
        // trees of informative features; three quarters of the set keeps
        // per-tree diversity without the starvation.
        fss = static_cast<int>(std::ceil(0.75 * static_cast<double>(n_feat)));
        if (params.per_node_features)
            fss = static_cast<int>(
                std::ceil(std::sqrt(static_cast<double>(n_feat))));
    }
    fss = std::min<int>(fss, static_cast<int>(n_feat));
    model.feature_subset_size = fss;

    model.trees.reserve(params.n_trees);
    std::vector<int> full(n);
    std::iota(full.begin(), full.end(), 0);
    for (int t = 0; t < params.n_trees; ++t) {
        const std::vector<int> bag =
            params.bootstrap ? bootstrap_indices(seed, axis, t, static_cast<int>(n))
                             : full;
        const std::vector<int> feats = feature_subset_for_tree(
            seed, axis, t, static_cast<int>(n_feat), fss);
        std::mt19937_64 rng(derive_seed(
            seed, 0x3000 + 2 * static_cast<std::uint64_t>(t) +
                      1000003ULL * static_cast<std::uint64_t>(axis)));
        model.trees.push_back(tree_generate(data, bag, feats, rng, params));
    }
    return model;
}

} // namespace

std::pair<ForestModel, ForestModel> train(const FingerprintBase &db,
                                          const ForestParams &params,
                                          std::uint64_t seed) {
    return {train_axis(db, params, seed, Axis::X),
            train_axis(db, params, seed, Axis::Y)};
}

ForestModel train_joint(const FingerprintBase &db, const ForestParams &params,
                        std::uint64_t seed) {
    return train_axis(db, params, seed, Axis::Joint);
}

std::vector<ScoredCandidate> predict_scores(const ForestModel &model,
                                            const Eigen::Ref<const Eigen::VectorXd> &features,
                                            int k) {
    if (features.size() != model.n_features)
        throw SchemaError("predict_scores: feature length mismatch");
    if (k < 1 || k > static_cast<int>(model.label_set.size()))
        throw std::invalid_argument("predict_scores: k out of range");

    std::vector<long> votes(model.label_set.size(), 0);
    for (const DecisionTree &t : model.trees)
        ++votes[t.predict(features)];

    std::vector<int> idx(votes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return votes[a] > votes[b]; // ties keep ascending class value order
    });

    std::vector<ScoredCandidate> out;
    out.reserve(k);
    const double n_trees = static_cast<double>(model.trees.size());
    for (int i = 0; i < k; ++i)
        out.push_back({model.label_set[idx[i]], votes[idx[i]] / n_trees});
    return out;
}

double score_weighted_value(const std::vector<ScoredCandidate> &candidates) {
    double num = 0.0, den = 0.0;
    for (const ScoredCandidate &c : candidates) {
        num += c.value * c.score;
        den += c.score;
    }
    if (den <= 0.0)
        throw std::logic_error("score weighting: all scores zero");
    return num / den;
}

PositionEstimate estimate_position(const ForestModel &m_x, const ForestModel &m_y,
                                   const Eigen::Ref<const Eigen::VectorXd> &features,
                                   int k) {
    PositionEstimate est;
    est.candidates_x =
        predict_scores(m_x, features, std::min<int>(k, static_cast<int>(m_x.label_set.size())));
    est.candidates_y =
        predict_scores(m_y, features, std::min<int>(k, static_cast<int>(m_y.label_set.size())));
    est.x = score_weighted_value(est.candidates_x);
    est.y = score_weighted_value(est.candidates_y);
    return est;
}

PositionEstimate estimate_joint(const ForestModel &joint,
                                const Eigen::Ref<const Eigen::VectorXd> &features,
                                int k) {
    if (joint.axis != Axis::Joint)
        throw std::invalid_argument("estimate_joint: model is not a joint forest");
    const auto cands = predict_scores(
        joint, features, std::min<int>(k, static_cast<int>(joint.label_set.size())));
    double sx = 0.0, sy = 0.0, sw = 0.0;
    PositionEstimate est;
    for (const ScoredCandidate &c : cands) {
        const long rp = static_cast<long>(c.value);
        const double x = joint.joint_coords(rp, 0);
        const double y = joint.joint_coords(rp, 1);
        sx += x * c.score;
        sy += y * c.score;
        sw += c.score;
        est.candidates_x.push_back({x, c.score});
        est.candidates_y.push_back({y, c.score});
    }
    if (sw <= 0.0)
        throw std::logic_error("estimate_joint: all scores zero");
    est.x = sx / sw;
    est.y = sy / sw;
    return est;
}

void save_model(const ForestModel &model, const std::string &path) {
    json doc;
    doc["schema"] = kModelSchema;
    doc["version"] = kModelVersion;
    doc["axis"] = static_cast<int>(model.axis);
    doc["label_set"] = model.label_set;
    doc["train_seed"] = model.train_seed;
    doc["feature_subset_size"] = model.feature_subset_size;
    doc["n_features"] = model.n_features;
    if (model.axis == Axis::Joint) {
        json coords = json::array();
        for (long i = 0; i < model.joint_coords.rows(); ++i)
            coords.push_back({model.joint_coords(i, 0), model.joint_coords(i, 1)});
        doc["joint_coords"] = std::move(coords);
    }
    json trees = json::array();
    for (const DecisionTree &t : model.trees) {
        json nodes = json::array();
        for (const DecisionTree::Node &n : t.nodes) {
            if (n.leaf)
                nodes.push_back({{"label", n.label}});
            else
                nodes.push_back({{"f", n.feature},
                                 {"t", n.threshold},
                                 {"l", n.left},
                                 {"r", n.right}});
        }
        trees.push_back(std::move(nodes));
    }
    doc["trees"] = std::move(trees);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump() << "\n";
}

ForestModel load_model(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open model file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed model file: ") + e.what());
    }
    try {
        if (doc.at("schema").get<std::string>() != kModelSchema)
            throw LoadError("not a forest model file");
        const int version = doc.at("version").get<int>();
        if (version > kModelVersion)
            throw LoadError("model file version " + std::to_string(version) +
                            " is newer than supported version " +
                            std::to_string(kModelVersion));
        ForestModel model;
        model.axis = static_cast<Axis>(doc.at("axis").get<int>());
        model.label_set = doc.at("label_set").get<std::vector<double>>();
        model.train_seed = doc.at("train_seed").get<std::uint64_t>();
        model.feature_subset_size = doc.at("feature_subset_size").get<int>();
        model.n_features = doc.at("n_features").get<long>();
        if (model.axis == Axis::Joint) {
            const json &coords = doc.at("joint_coords");
            model.joint_coords.resize(static_cast<long>(coords.size()), 2);
            for (long i = 0; i < model.joint_coords.rows(); ++i) {
                model.joint_coords(i, 0) = coords.at(i).at(0).get<double>();
                model.joint_coords(i, 1) = coords.at(i).at(1).get<double>();
            }
        }
        for (const json &tj : doc.at("trees")) {
            DecisionTree t;
            for (const json &nj : tj) {
                DecisionTree::Node n;
                if (nj.contains("label")) {
                    n.leaf = true;
                    n.label = nj.at("label").get<int>();
                } else {
                    n.feature = nj.at("f").get<int>();
                    n.threshold = nj.at("t").get<double>();
                    n.left = nj.at("l").get<int>();
                    n.right = nj.at("r").get<int>();
                }
                t.nodes.push_back(n);
            }
            model.trees.push_back(std::move(t));
        }
        return model;
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed model file: ") + e.what());
    }
}

} // namespace csiloc
