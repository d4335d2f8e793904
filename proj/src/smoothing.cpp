#include "csiloc/smoothing.hpp"

#include <stdexcept>

namespace csiloc {

Eigen::MatrixXcd sample_covariance(const std::vector<CsiSnapshot> &snapshots,
                                   const SubarrayDims &dims) {
    if (snapshots.empty())
        throw std::invalid_argument("sample_covariance: need >= 1 snapshot");
    const int rows = snapshots.front().array_rows;
    const int cols = snapshots.front().array_cols;
    const int subc = static_cast<int>(snapshots.front().h.rows());
    if (dims.rows < 1 || dims.cols < 1 || dims.taps < 1 || dims.rows > rows ||
        dims.cols > cols || dims.taps > subc)
        throw std::invalid_argument("sample_covariance: subarray exceeds data dims");

    const int d = dims.size();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
    Eigen::VectorXcd v(d);
    long count = 0;
    for (const CsiSnapshot &snap : snapshots) {
        if (snap.array_rows != rows || snap.array_cols != cols ||
            snap.h.rows() != subc)
            throw std::invalid_argument("sample_covariance: inconsistent snapshots");
        for (int k0 = 0; k0 + dims.taps <= subc; ++k0) {
            for (int r0 = 0; r0 + dims.rows <= rows; ++r0) {
                for (int c0 = 0; c0 + dims.cols <= cols; ++c0) {
                    int idx = 0;
                    for (int kk = 0; kk < dims.taps; ++kk)
                        for (int rr = 0; rr < dims.rows; ++rr)
                            for (int cc = 0; cc < dims.cols; ++cc)
                                v(idx++) = snap.h(k0 + kk,
                                                  (r0 + rr) * cols + (c0 + cc));
                    acc.selfadjointView<Eigen::Lower>().rankUpdate(v);
                    ++count;
                }
            }
        }
    }
    Eigen::MatrixXcd r = acc.selfadjointView<Eigen::Lower>();
    r /= static_cast<double>(count);
    return r;
}

Eigen::MatrixXcd fb_average(const Eigen::MatrixXcd &r) {
    // J conj(R) J flips both index orders.
    Eigen::MatrixXcd back = r.conjugate().reverse();
    return 0.5 * (r + back);
}

SmoothedCovariance fb_smooth(const std::vector<CsiSnapshot> &snapshots,
                             const SubarrayDims &dims) {
    if (snapshots.empty())
        throw std::invalid_argument("fb_smooth: need >= 1 snapshot");
    const int rows = snapshots.front().array_rows;
    const int cols = snapshots.front().array_cols;
    const int subc = static_cast<int>(snapshots.front().h.rows());
    const bool smaller_somewhere =
        dims.rows < rows || dims.cols < cols || dims.taps < subc;
    if (!smaller_somewhere)
        throw std::invalid_argument(
            "fb_smooth: subarray must be strictly smaller than the data in at "
            "least one axis");

    SmoothedCovariance out;
    out.subarray_dims = dims;
    out.r = fb_average(sample_covariance(snapshots, dims));
    const long per_snapshot = long(subc - dims.taps + 1) *
                              long(rows - dims.rows + 1) *
                              long(cols - dims.cols + 1);
    out.n_averages = per_snapshot * static_cast<long>(snapshots.size());
    return out;
}

} // namespace csiloc
