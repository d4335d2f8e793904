#include "csiloc/features.hpp"

#include <cstdio>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {

template <typename T, typename PowerFn, typename DelayFn>
const T &max_power_entry(const std::vector<T> &paths, PowerFn power,
                         DelayFn delay) {
    const T *best = &paths.front();
    for (const T &p : paths) {
        if (power(p) > power(*best) ||
            (power(p) == power(*best) && delay(p) < delay(*best)))
            best = &p;
    }
    return *best;
}

} // namespace

MpFeature extract_mp(const std::vector<EstimatedPath> &paths) {
    if (paths.empty())
        throw OutageError("extract_mp: no estimated paths (link outage)");
    const EstimatedPath &best = max_power_entry(
        paths, [](const EstimatedPath &p) { return p.power_dbm; },
        [](const EstimatedPath &p) { return p.toa; });
    return {best.power_dbm, best.aaoa, best.eaoa, best.toa * 1e9};
}

MpFeature oracle_features(const std::vector<PathComponent> &paths) {
    if (paths.empty())
        throw OutageError("oracle_features: no paths (link outage)");
    const PathComponent &best = max_power_entry(
        paths, [](const PathComponent &p) { return p.power_dbm; },
        [](const PathComponent &p) { return p.delay; });
    return {best.power_dbm, best.aaoa, best.eaoa, best.delay * 1e9};
}

std::string estimated_paths_csv(
    const std::vector<std::pair<std::string, std::vector<EstimatedPath>>> &links) {
    std::string out = "link_id,aaoa_deg,eaoa_deg,toa_ns,power_dbm\n";
    char buf[160];
    for (const auto &[id, paths] : links) {
        for (const EstimatedPath &p : paths) {
            std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g\n", id.c_str(),
                          p.aaoa, p.eaoa, p.toa * 1e9, p.power_dbm);
            out += buf;
        }
    }
    return out;
}

} // namespace csiloc
