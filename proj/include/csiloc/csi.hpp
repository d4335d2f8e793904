#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csiloc/geometry.hpp"
#include "csiloc/paths.hpp"

namespace csiloc {

/// OFDM sounding and receive-array configuration.
struct CsiConfig {
    double carrier_freq = 60e9;  // Hz
    double bandwidth = 3e9;      // Hz
    int n_subcarriers = 256;
    int array_rows = 4;          // uniform rectangular array at the AP
    int array_cols = 4;
    double element_spacing = 0.5; // in wavelengths
    double snr_db = 30.0;         // +inf selects the noiseless mode
    int n_snapshots = 4;
    double sample_interval() const { return 1.0 / bandwidth; } // T_s

    int n_elements() const { return array_rows * array_cols; }
    /// Absolute frequency of subcarrier k: f_c - B/2 + k * (B / K).
    double subcarrier_freq(int k) const {
        return carrier_freq - bandwidth / 2.0 +
               static_cast<double>(k) * bandwidth / n_subcarriers;
    }
    void validate() const;
};

/// Phase of array element (row, col) for a plane wave arriving from
/// (aaoa, eaoa) degrees, narrowband at the carrier. Elements sit in the
/// horizontal plane at spacing * lambda * (col, row, 0).
double steering_phase(const CsiConfig &cfg, int row, int col, double aaoa_deg,
                      double eaoa_deg);

/// One noisy observation of the channel matrix. The pilot is all-ones, so
/// h = H + noise with H[k, m] the analytic CFR sample of Eq-style synthesis.
struct CsiSnapshot {
    Eigen::MatrixXcd h;     // n_subcarriers x n_elements, element m = row*cols+col
    double noise_var = 0.0; // linear noise power per complex entry
    Vec3 tx_position;
    std::string ap_id;
    int array_rows = 0;
    int array_cols = 0;
};

/// Noiseless CFR sum H[k, m] for a path list.
Eigen::MatrixXcd analytic_cfr(const std::vector<PathComponent> &paths,
                              const CsiConfig &cfg);

/// Synthesize `cfg.n_snapshots` noisy snapshots of the same channel.
/// Noise power is set from snr_db relative to mean |H|^2; a fixed seed
/// reproduces bit-identical snapshots.
std::vector<CsiSnapshot> synthesize_csi(const std::vector<PathComponent> &paths,
                                        const CsiConfig &cfg,
                                        std::uint64_t seed,
                                        const Vec3 &tx_position = {},
                                        const std::string &ap_id = "");

} // namespace csiloc
