#include "csiloc/csi.hpp"

#include <cmath>
#include <stdexcept>

#include "csiloc/rng.hpp"

namespace csiloc {

void CsiConfig::validate() const {
    if (!(carrier_freq > 0.0) || !(bandwidth > 0.0))
        throw std::invalid_argument("carrier_freq and bandwidth must be positive");
    if (n_subcarriers < 2)
        throw std::invalid_argument("n_subcarriers must be >= 2");
    if (array_rows < 1 || array_cols < 1)
        throw std::invalid_argument("array dimensions must be >= 1");
    if (!(element_spacing > 0.0) || element_spacing > 0.5)
        throw std::invalid_argument(
            "element_spacing must be in (0, 0.5] wavelengths");
    if (std::isnan(snr_db) || snr_db == -INFINITY)
        throw std::invalid_argument("snr_db must be finite or +inf (noiseless)");
    if (n_snapshots < 1)
        throw std::invalid_argument("n_snapshots must be >= 1");
}

double steering_phase(const CsiConfig &cfg, int row, int col, double aaoa_deg,
                      double eaoa_deg) {
    const double az = aaoa_deg * M_PI / 180.0;
    const double el = eaoa_deg * M_PI / 180.0;
    // Unit vector from the array toward the apparent source.
    const double ux = std::cos(el) * std::cos(az);
    const double uy = std::cos(el) * std::sin(az);
    const double lambda = kSpeedOfLight / cfg.carrier_freq;
    const double dx = cfg.element_spacing * lambda * col;
    const double dy = cfg.element_spacing * lambda * row;
    return 2.0 * M_PI * cfg.carrier_freq / kSpeedOfLight * (dx * ux + dy * uy);
}

Eigen::MatrixXcd analytic_cfr(const std::vector<PathComponent> &paths,
                              const CsiConfig &cfg) {
    Eigen::MatrixXcd h =
        Eigen::MatrixXcd::Zero(cfg.n_subcarriers, cfg.n_elements());
    for (const PathComponent &p : paths) {
        for (int r = 0; r < cfg.array_rows; ++r) {
            for (int c = 0; c < cfg.array_cols; ++c) {
                const int m = r * cfg.array_cols + c;
                const std::complex<double> space =
                    std::polar(1.0, steering_phase(cfg, r, c, p.aaoa, p.eaoa));
                for (int k = 0; k < cfg.n_subcarriers; ++k) {
                    const double phase =
                        -2.0 * M_PI * cfg.subcarrier_freq(k) * p.delay;
                    h(k, m) += p.gain * std::polar(1.0, phase) * space;
                }
            }
        }
    }
    return h;
}

std::vector<CsiSnapshot> synthesize_csi(const std::vector<PathComponent> &paths,
                                        const CsiConfig &cfg,
                                        std::uint64_t seed,
                                        const Vec3 &tx_position,
                                        const std::string &ap_id) {
    cfg.validate();
    if (paths.empty())
        throw std::invalid_argument("synthesize_csi: empty path list");

    const Eigen::MatrixXcd h0 = analytic_cfr(paths, cfg);
    double noise_var = 0.0;
    if (std::isfinite(cfg.snr_db)) {
        const double mean_power = h0.squaredNorm() / double(h0.size());
        noise_var = mean_power / std::pow(10.0, cfg.snr_db / 10.0);
    }

    std::vector<CsiSnapshot> out;
    out.reserve(cfg.n_snapshots);
    const double sigma = std::sqrt(noise_var);
    for (int s = 0; s < cfg.n_snapshots; ++s) {
        std::mt19937_64 rng(derive_seed(seed, s));
        CsiSnapshot snap;
        snap.h = h0;
        if (sigma > 0.0)
            for (Eigen::Index k = 0; k < snap.h.rows(); ++k)
                for (Eigen::Index m = 0; m < snap.h.cols(); ++m)
                    snap.h(k, m) += sigma * complex_gaussian(rng);
        snap.noise_var = noise_var;
        snap.tx_position = tx_position;
        snap.ap_id = ap_id;
        snap.array_rows = cfg.array_rows;
        snap.array_cols = cfg.array_cols;
        out.push_back(std::move(snap));
    }
    return out;
}

} // namespace csiloc
