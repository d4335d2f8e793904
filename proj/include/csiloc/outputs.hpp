#pragma once

#include <string>
#include <vector>

#include "csiloc/experiment.hpp"

namespace csiloc {

/// In-memory renderings of the result files (also used by tests).
std::string errors_csv(const ResultSet &results);
std::string cdf_csv(const ResultSet &results);
std::string stats_csv(const ResultSet &results);
std::string timing_csv(const std::vector<SweepRow> &rows);
std::string cdf_svg(const ResultSet &results);

/// Write errors.csv, cdf.csv, stats.csv, and cdf.svg under `out_dir`
/// (plus timing.csv when sweep rows are given). Returns the file paths.
std::vector<std::string> emit_outputs(const ResultSet &results,
                                      const std::string &out_dir,
                                      const std::vector<SweepRow> *sweep_rows = nullptr);

} // namespace csiloc
