#include "csiloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "csiloc/errors.hpp"

namespace csiloc {

void WknnConfig::validate() const {
    if (k < 1)
        throw std::invalid_argument("wknn: k must be >= 1");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("wknn: epsilon must be positive");
}

PositionEstimate wknn_estimate(const FingerprintBase &db,
                               const Eigen::Ref<const Eigen::VectorXd> &features,
                               const WknnConfig &cfg) {
    cfg.validate();
    const long n = db.n_rps();
    if (n == 0)
        throw std::invalid_argument("wknn: empty database");
    if (features.size() != db.fingerprint.cols())
        throw SchemaError("wknn: feature length mismatch");
    if (cfg.k > n)
        throw std::invalid_argument("wknn: k exceeds the RP count");

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(db.fingerprint.cols());
    Eigen::VectorXd sigma = Eigen::VectorXd::Ones(db.fingerprint.cols());
    if (cfg.standardize) {
        mu = db.fingerprint.colwise().mean();
        for (long j = 0; j < db.fingerprint.cols(); ++j) {
            const double var =
                (db.fingerprint.col(j).array() - mu(j)).square().sum() / n;
            sigma(j) = var > 0.0 ? std::sqrt(var) : 1.0;
        }
    }

    const Eigen::VectorXd q = (features - mu).cwiseQuotient(sigma);
    Eigen::VectorXd dist(n);
    for (long i = 0; i < n; ++i) {
        const Eigen::VectorXd z =
            (db.fingerprint.row(i).transpose() - mu).cwiseQuotient(sigma);
        dist(i) = (z - q).norm();
    }

    std::vector<long> idx(n);
    std::iota(idx.begin(), idx.end(), 0L);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](long a, long b) { return dist(a) < dist(b); });

    PositionEstimate est;
    double sx = 0.0, sy = 0.0, sw = 0.0;
    for (int i = 0; i < cfg.k; ++i) {
        const long r = idx[i];
        const double w = 1.0 / (dist(r) + cfg.epsilon);
        sx += w * db.coordinate(r, 0);
        sy += w * db.coordinate(r, 1);
        sw += w;
    }
    est.x = sx / sw;
    est.y = sy / sw;
    for (int i = 0; i < cfg.k; ++i) {
        const long r = idx[i];
        const double w = 1.0 / (dist(r) + cfg.epsilon) / sw;
        est.candidates_x.push_back({db.coordinate(r, 0), w});
        est.candidates_y.push_back({db.coordinate(r, 1), w});
    }
    return est;
}

PositionEstimate rf_joint_estimate(const ForestModel &joint,
                                   const Eigen::Ref<const Eigen::VectorXd> &features) {
    return estimate_joint(joint, features, 1);
}

} // namespace csiloc
