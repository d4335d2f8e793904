#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csiloc/features.hpp"

namespace csiloc {

/// Axis-aligned rectangle [x0, x0 + width] x [y0, y0 + height].
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;
};

/// All grid intersections of `area` at `interval` spacing, inclusive of the
/// boundary, anchored at the minimum corner, in row-major order (y outer,
/// x inner).
std::vector<std::pair<double, double>> build_grid(const Rect &area,
                                                  double interval);

/// The channel fingerprint database: AP list `sn`, RP coordinates, and the
/// N x 4n feature matrix with per-AP column blocks
/// [RSS dBm, AAoA deg, EAoA deg, ToA ns].
struct FingerprintBase {
    std::vector<std::string> sn;
    Eigen::MatrixX2d coordinate;  // N x 2, meters
    Eigen::MatrixXd fingerprint;  // N x 4n
    double grid_interval = 0.0;   // meters
    double grid_origin_x = 0.0;
    double grid_origin_y = 0.0;
    std::string scenario_id;

    long n_rps() const { return coordinate.rows(); }
    int n_aps() const { return static_cast<int>(sn.size()); }

    /// Throws SchemaError when shape or grid invariants are violated.
    void validate() const;
};

/// One online query: ground-truth position plus a 1 x 4n feature row.
struct TestRecord {
    double true_x = 0.0;
    double true_y = 0.0;
    Eigen::VectorXd features;
};

/// Assemble the database from per-(RP, AP) features. A missing feature
/// (outage) drops the whole RP; dropped row indices are reported through
/// `dropped` when given. Feature rows must all cover the same AP count.
FingerprintBase assemble(const std::vector<std::pair<double, double>> &rps,
                         const std::vector<std::string> &aps,
                         const std::vector<std::vector<std::optional<MpFeature>>> &features,
                         double grid_interval, double grid_origin_x,
                         double grid_origin_y, const std::string &scenario_id,
                         std::vector<std::size_t> *dropped = nullptr);

/// Inverse of assemble over valid RPs (identity up to the dropped rows).
void split(const FingerprintBase &db, std::vector<std::pair<double, double>> &rps,
           std::vector<std::string> &aps,
           std::vector<std::vector<std::optional<MpFeature>>> &features);

/// Versioned JSON round-trip.
void save(const FingerprintBase &db, const std::string &path);
FingerprintBase load(const std::string &path);

/// CSV export: x, y, then the 4n feature columns.
std::string to_csv(const FingerprintBase &db);

} // namespace csiloc
