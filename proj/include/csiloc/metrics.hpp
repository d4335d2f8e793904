#pragma once

#include <vector>

namespace csiloc {

/// Empirical CDF: sorted ascending, probability i/n at the i-th sorted error.
std::vector<std::pair<double, double>> error_cdf(const std::vector<double> &errors);

struct ErrorStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

ErrorStats error_stats(const std::vector<double> &errors);

} // namespace csiloc
