#pragma once

#include <string>
#include <vector>

#include "csiloc/music.hpp"
#include "csiloc/paths.hpp"

namespace csiloc {

/// The maximum-power-path fingerprint feature of one RP/AP link.
struct MpFeature {
    double rss = 0.0;  // dBm
    double aaoa = 0.0; // degrees
    double eaoa = 0.0; // degrees
    double toa = 0.0;  // nanoseconds
};

/// Select the maximum-power estimated path; ties resolve to the smaller ToA.
/// Throws OutageError on an empty list.
MpFeature extract_mp(const std::vector<EstimatedPath> &paths);

/// Same selection applied directly to simulator ground truth, bypassing the
/// estimator.
MpFeature oracle_features(const std::vector<PathComponent> &paths);

/// CSV export of estimated paths: link_id, aaoa, eaoa, toa_ns, power_dbm.
std::string estimated_paths_csv(
    const std::vector<std::pair<std::string, std::vector<EstimatedPath>>> &links);

} // namespace csiloc
