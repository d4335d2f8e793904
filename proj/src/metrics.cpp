#include "csiloc/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace csiloc {

std::vector<std::pair<double, double>> error_cdf(const std::vector<double> &errors) {
    if (errors.empty())
        throw std::invalid_argument("error_cdf: empty error list");
    std::vector<double> sorted(errors);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(sorted.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    return cdf;
}

ErrorStats error_stats(const std::vector<double> &errors) {
    if (errors.empty())
        throw std::invalid_argument("error_stats: empty error list");
    ErrorStats s;
    s.min = errors.front();
    s.max = errors.front();
    double sum = 0.0;
    for (double e : errors) {
        s.min = std::min(s.min, e);
        s.max = std::max(s.max, e);
        sum += e;
    }
    s.mean = sum / static_cast<double>(errors.size());
    return s;
}

} // namespace csiloc
