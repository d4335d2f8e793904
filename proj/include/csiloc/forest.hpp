#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csiloc/fingerprint_db.hpp"

namespace csiloc {

/// Gini impurity 1 - sum (c_i / total)^2 of a class-count histogram.
/// Throws std::invalid_argument when the histogram is empty.
double gini(const std::vector<long> &class_counts);

struct Split {
    int feature = 0;
    double threshold = 0.0;
    double weighted_impurity = 0.0;
};

/// Labeled training view: one row of `x` per sample, `y` holds class indices.
struct Dataset {
    const Eigen::MatrixXd *x = nullptr;
    std::vector<int> y; // class indices into the label set
    int n_classes = 0;
};

/// Best Gini split over the candidate features: thresholds are midpoints of
/// consecutive distinct sorted values; comparisons are exact (integer
/// arithmetic on class counts), ties resolve to the lowest feature index and
/// then the lowest threshold. Returns nullopt when no split reduces impurity.
std::optional<Split> best_split(const Dataset &data,
                                const std::vector<int> &sample_indices,
                                const std::vector<int> &candidate_features);

/// Binary decision tree over continuous features with class-index leaves.
/// Left child takes feature <= threshold.
struct DecisionTree {
    struct Node {
        bool leaf = false;
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = -1; // class index, valid for leaves
    };
    std::vector<Node> nodes; // nodes[0] is the root

    int predict(const Eigen::Ref<const Eigen::VectorXd> &features) const;
    int depth() const;
};

struct ForestParams {
    int n_trees = 100;
    // 0 selects ceil(3/4 n_features) for per-tree draws and
    // ceil(sqrt(n_features)) for per-node draws.
    int feature_subset_size = 0;
    int max_depth = 0; // 0 means unlimited
    bool per_node_features = false;
    bool bootstrap = true; // false trains every tree on the full sample set
    int k = 3;             // candidates kept by the weighted decoder
};

enum class Axis { X = 0, Y = 1, Joint = 2 };

/// A trained vote ensemble over a discrete label set. For Axis::X/Y the
/// labels are distinct grid coordinates; for Axis::Joint they are RP indices
/// with a side table of coordinates.
struct ForestModel {
    std::vector<DecisionTree> trees;
    Axis axis = Axis::X;
    std::vector<double> label_set; // sorted ascending; class index -> value
    std::uint64_t train_seed = 0;
    int feature_subset_size = 0;
    long n_features = 0;
    Eigen::MatrixX2d joint_coords; // label -> (x, y), Axis::Joint only
};

/// Grow one tree: recursion stops at pure nodes, empty/constant-feature
/// nodes (majority label, ties to the smallest label value), or max_depth.
DecisionTree tree_generate(const Dataset &data,
                           const std::vector<int> &sample_indices,
                           const std::vector<int> &feature_subset,
                           std::mt19937_64 &rng, const ForestParams &params);

/// The canonical bootstrap draw used by training; exposed so out-of-bag
/// evaluation can reconstruct per-tree sampling without storing it.
std::vector<int> bootstrap_indices(std::uint64_t master_seed, Axis axis,
                                   int tree_index, int n_samples);
std::vector<int> feature_subset_for_tree(std::uint64_t master_seed, Axis axis,
                                         int tree_index, int n_features,
                                         int subset_size);

/// Train the per-axis classifier pair (M_x, M_y) on the database.
std::pair<ForestModel, ForestModel> train(const FingerprintBase &db,
                                          const ForestParams &params,
                                          std::uint64_t seed);

/// Train a single joint forest over RP identities.
ForestModel train_joint(const FingerprintBase &db, const ForestParams &params,
                        std::uint64_t seed);

/// One candidate coordinate with its vote fraction.
struct ScoredCandidate {
    double value = 0.0;
    double score = 0.0;
};

/// Top-k vote fractions, sorted by descending score; ties resolve to the
/// smaller class value. Throws SchemaError on feature length mismatch.
std::vector<ScoredCandidate> predict_scores(const ForestModel &model,
                                            const Eigen::Ref<const Eigen::VectorXd> &features,
                                            int k);

struct PositionEstimate {
    double x = 0.0;
    double y = 0.0;
    std::vector<ScoredCandidate> candidates_x;
    std::vector<ScoredCandidate> candidates_y;
};

/// The score-weighted average sum(v_k S_k) / sum(S_k); degree-0 homogeneous
/// in the scores.
double score_weighted_value(const std::vector<ScoredCandidate> &candidates);

/// Score-weighted decoding with coordinate separation:
/// x = sum(x_k S_k) / sum(S_k), likewise for y.
PositionEstimate estimate_position(const ForestModel &m_x, const ForestModel &m_y,
                                   const Eigen::Ref<const Eigen::VectorXd> &features,
                                   int k);

/// Score-weighted decoding of a joint RP forest (pre-separation form).
PositionEstimate estimate_joint(const ForestModel &joint,
                                const Eigen::Ref<const Eigen::VectorXd> &features,
                                int k);

/// Versioned JSON round-trip for trained models.
void save_model(const ForestModel &model, const std::string &path);
ForestModel load_model(const std::string &path);

} // namespace csiloc
