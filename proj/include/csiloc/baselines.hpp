#pragma once

#include "csiloc/forest.hpp"

namespace csiloc {

struct WknnConfig {
    int k = 3;
    double epsilon = 1e-6; // distance floor for the inverse weights
    bool standardize = true;

    void validate() const;
};

/// Inverse-distance weighted k-nearest-neighbor estimate over the database.
/// Distances are Euclidean in (optionally z-scored) feature space; weights
/// are 1 / (d + epsilon).
PositionEstimate wknn_estimate(const FingerprintBase &db,
                               const Eigen::Ref<const Eigen::VectorXd> &features,
                               const WknnConfig &cfg);

/// Plain-RF baseline: coordinate of the single argmax-vote RP. Identical to
/// estimate_joint with k = 1 by construction.
PositionEstimate rf_joint_estimate(const ForestModel &joint,
                                   const Eigen::Ref<const Eigen::VectorXd> &features);

} // namespace csiloc
