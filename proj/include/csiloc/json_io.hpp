#pragma once

#include <string>
#include <vector>

#include "csiloc/csi.hpp"
#include "csiloc/fingerprint_db.hpp"
#include "csiloc/paths.hpp"

namespace csiloc {

/// One simulated link: endpoints plus its traced paths.
struct LinkPaths {
    Vec3 tx;
    Vec3 rx;
    std::string ap_id;
    std::vector<PathComponent> paths;
};

/// Versioned JSON documents; complex numbers serialize as [re, im].
void save_paths(const std::vector<LinkPaths> &links, const std::string &path);
std::vector<LinkPaths> load_paths(const std::string &path);

void save_snapshots(const std::vector<CsiSnapshot> &snaps, const std::string &path);
std::vector<CsiSnapshot> load_snapshots(const std::string &path);

void save_testset(const std::vector<TestRecord> &records, const std::string &path);
std::vector<TestRecord> load_testset(const std::string &path);

} // namespace csiloc
