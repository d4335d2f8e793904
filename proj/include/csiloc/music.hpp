#pragma once

#include <optional>
#include <vector>

#include "csiloc/smoothing.hpp"

namespace csiloc {

/// One estimated propagation path.
struct EstimatedPath {
    double aaoa = 0.0;     // degrees [-180, 180)
    double eaoa = 0.0;     // degrees [-90, 90]
    double toa = 0.0;      // seconds, >= 0
    double power_dbm = 0.0;
};

/// Search grid for the (aaoa, eaoa, toa) pseudo-spectrum. Angle units are
/// degrees, delay is seconds. Defaults: 1 degree angular steps over the full
/// sphere and T_s/4 delay steps over one unambiguous delay span; callers set
/// the delay fields per configuration via `default_grid`.
struct MusicGrid {
    double az_min = -180.0, az_max = 179.0, az_step = 1.0;
    double el_min = -90.0, el_max = 90.0, el_step = 1.0;
    double toa_min = 0.0, toa_max = 0.0, toa_step = 0.0;

    void validate() const;
};

/// Grid with the library defaults for a given configuration: 1 degree angles,
/// T_s/4 delay step over [0, 1/delta_f).
MusicGrid default_grid(const CsiConfig &cfg);

/// MUSIC over the smoothed space-frequency covariance.
///
/// The noise subspace is everything beyond `n_sources` eigenvectors (or, when
/// n_sources is absent, beyond the largest k with lambda_k / lambda_1 >=
/// 0.01). Local maxima of the pseudo-spectrum are refined with one per-axis
/// quadratic interpolation step; powers come from a least-squares fit of the
/// subarray steering matrix against the covariance.
std::vector<EstimatedPath> music_estimate(const SmoothedCovariance &cov,
                                          const CsiConfig &cfg,
                                          std::optional<int> n_sources,
                                          const MusicGrid &grid);

} // namespace csiloc
