#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "csiloc/csi.hpp"

namespace csiloc {

/// Space-frequency subarray dimensions: spatial rows, spatial cols,
/// frequency taps. The stacked subvector index is
/// tap * (rows * cols) + row * cols + col.
struct SubarrayDims {
    int rows = 3;
    int cols = 3;
    int taps = 32;
    int size() const { return rows * cols * taps; }
};

/// Forward-backward averaged covariance over stacked space-frequency
/// subvectors. Hermitian, PSD within tolerance, and persymmetric:
/// J conj(R) J = R with J the exchange matrix.
struct SmoothedCovariance {
    Eigen::MatrixXcd r;
    SubarrayDims subarray_dims;
    long n_averages = 0; // forward subarrays summed over all snapshots
};

/// Sample covariance of all forward space-frequency subarrays (no FB step).
/// Dims may equal the data dims (single subarray, no smoothing).
Eigen::MatrixXcd sample_covariance(const std::vector<CsiSnapshot> &snapshots,
                                   const SubarrayDims &dims);

/// Forward-backward average: (r + J conj(r) J) / 2.
Eigen::MatrixXcd fb_average(const Eigen::MatrixXcd &r);

/// Forward-backward spatially smoothed covariance. Requires at least one
/// snapshot and subarray dims no larger than the data in every axis and
/// strictly smaller in at least one.
SmoothedCovariance fb_smooth(const std::vector<CsiSnapshot> &snapshots,
                             const SubarrayDims &dims);

} // namespace csiloc
