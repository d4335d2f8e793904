#include "csiloc/music.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csiloc/errors.hpp"

namespace csiloc {

void MusicGrid::validate() const {
    if (!(az_step > 0.0) || !(el_step > 0.0) || !(toa_step > 0.0))
        throw std::invalid_argument("MusicGrid steps must be positive");
    if (az_max < az_min || el_max < el_min || toa_max < toa_min)
        throw std::invalid_argument("MusicGrid ranges must be nonempty");
}

MusicGrid default_grid(const CsiConfig &cfg) {
    MusicGrid g;
    const double ts = cfg.sample_interval();
    g.toa_step = ts / 4.0;
    g.toa_min = 0.0;
    // One unambiguous span 1/delta_f = K * T_s, open at the top.
    g.toa_max = cfg.n_subcarriers * ts - g.toa_step;
    return g;
}

namespace {

int grid_count(double lo, double hi, double step) {
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

struct GridAxes {
    std::vector<double> az, el, toa;
};

GridAxes make_axes(const MusicGrid &g) {
    GridAxes ax;
    for (int i = 0; i < grid_count(g.az_min, g.az_max, g.az_step); ++i)
        ax.az.push_back(g.az_min + i * g.az_step);
    for (int i = 0; i < grid_count(g.el_min, g.el_max, g.el_step); ++i)
        ax.el.push_back(g.el_min + i * g.el_step);
    for (int i = 0; i < grid_count(g.toa_min, g.toa_max, g.toa_step); ++i)
        ax.toa.push_back(g.toa_min + i * g.toa_step);
    return ax;
}

// Spatial part of the subarray steering vector, unit-modulus entries.
Eigen::VectorXcd spatial_steering(const CsiConfig &cfg, const SubarrayDims &dims,
                                  double az, double el) {
    Eigen::VectorXcd v(dims.rows * dims.cols);
    for (int r = 0; r < dims.rows; ++r)
        for (int c = 0; c < dims.cols; ++c)
            v(r * dims.cols + c) =
                std::polar(1.0, steering_phase(cfg, r, c, az, el));
    return v;
}

// Full stacked subarray steering vector at (az, el, toa).
Eigen::VectorXcd stacked_steering(const CsiConfig &cfg, const SubarrayDims &dims,
                                  double az, double el, double toa) {
    const double df = cfg.bandwidth / cfg.n_subcarriers;
    const Eigen::VectorXcd sp = spatial_steering(cfg, dims, az, el);
    Eigen::VectorXcd v(dims.size());
    const int ds = dims.rows * dims.cols;
    for (int k = 0; k < dims.taps; ++k) {
        const std::complex<double> f = std::polar(1.0, -2.0 * M_PI * df * k * toa);
        v.segment(k * ds, ds) = f * sp;
    }
    return v;
}

struct Candidate {
    int ia, ie, it;
    double den;
};

} // namespace

std::vector<EstimatedPath> music_estimate(const SmoothedCovariance &cov,
                                          const CsiConfig &cfg,
                                          std::optional<int> n_sources,
                                          const MusicGrid &grid) {
    grid.validate();
    const SubarrayDims dims = cov.subarray_dims;
    const int d = dims.size();
    if (cov.r.rows() != d || cov.r.cols() != d)
        throw std::invalid_argument("music_estimate: covariance/dims mismatch");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov.r);
    if (eig.info() != Eigen::Success)
        throw NumericError("music_estimate: eigendecomposition failed");
    const Eigen::VectorXd evals = eig.eigenvalues(); // ascending
    const double trace = evals.sum();
    if (evals(0) < -1e-8 * std::abs(trace))
        throw NumericError("music_estimate: covariance is not PSD within tolerance");

    int n_src;
    if (n_sources.has_value()) {
        n_src = *n_sources;
        if (n_src < 0)
            throw std::invalid_argument("music_estimate: n_sources < 0");
        if (n_src >= d)
            throw std::invalid_argument(
                "music_estimate: n_sources >= subspace dimension");
    } else {
        const double lam_max = evals(d - 1);
        n_src = 0;
        for (int i = 0; i < d; ++i)
            if (evals(i) >= 0.01 * lam_max)
                ++n_src;
        n_src = std::min(n_src, d - 1);
    }
    if (n_src == 0)
        return {};

    // Signal subspace (top n_src eigenvectors). The pseudo-spectrum
    // denominator uses ||a||^2 - ||Es^H a||^2, identical to the
    // noise-subspace form because the steering entries are unit modulus.
    const Eigen::MatrixXcd es = eig.eigenvectors().rightCols(n_src);

    auto denominator = [&](double az, double el, double toa) {
        const Eigen::VectorXcd a = stacked_steering(cfg, dims, az, el, toa);
        return static_cast<double>(d) - (es.adjoint() * a).squaredNorm();
    };

    const GridAxes ax = make_axes(grid);
    const int n_az = static_cast<int>(ax.az.size());
    const int n_el = static_cast<int>(ax.el.size());
    const int n_toa = static_cast<int>(ax.toa.size());
    const int ds = dims.rows * dims.cols;

    // conj(Es) regrouped so that a single GEMM against the spatial steering
    // matrix yields, per angle, the per-source frequency profiles.
    Eigen::MatrixXcd m(n_src * dims.taps, ds);
    for (int s = 0; s < n_src; ++s)
        for (int k = 0; k < dims.taps; ++k)
            for (int j = 0; j < ds; ++j)
                m(s * dims.taps + k, j) = std::conj(es(k * ds + j, s));

    const double df = cfg.bandwidth / cfg.n_subcarriers;
    Eigen::MatrixXcd af(dims.taps, n_toa); // frequency steering per delay
    for (int t = 0; t < n_toa; ++t)
        for (int k = 0; k < dims.taps; ++k)
            af(k, t) = std::polar(1.0, -2.0 * M_PI * df * k * ax.toa[t]);

    Eigen::MatrixXcd asp(ds, n_el);
    // Stream denominator slabs over azimuth; keep three slabs for 3D
    // local-minimum detection without storing the full grid.
    auto compute_slab = [&](int ia) {
        for (int je = 0; je < n_el; ++je)
            asp.col(je) = spatial_steering(cfg, dims, ax.az[ia], ax.el[je]);
        const Eigen::MatrixXcd w = m * asp; // (n_src * taps) x n_el
        Eigen::MatrixXd den(n_el, n_toa);
        Eigen::MatrixXcd g(dims.taps, n_src);
        for (int je = 0; je < n_el; ++je) {
            for (int s = 0; s < n_src; ++s)
                g.col(s) = w.col(je).segment(s * dims.taps, dims.taps);
            const Eigen::MatrixXcd z = af.transpose() * g; // n_toa x n_src
            den.row(je) =
                (static_cast<double>(d) - z.rowwise().squaredNorm().array())
                    .matrix()
                    .transpose();
        }
        return den;
    };

    std::vector<Candidate> cands;
    Eigen::MatrixXd prev, cur, next;
    for (int ia = 0; ia < n_az; ++ia) {
        if (ia == 0) {
            cur = compute_slab(0);
            if (n_az > 1)
                next = compute_slab(1);
        } else {
            prev = std::move(cur);
            cur = std::move(next);
            if (ia + 1 < n_az)
                next = compute_slab(ia + 1);
        }
        for (int je = 0; je < n_el; ++je) {
            for (int t = 0; t < n_toa; ++t) {
                const double v = cur(je, t);
                if (ia > 0 && prev(je, t) <= v)
                    continue;
                if (ia + 1 < n_az && next(je, t) <= v)
                    continue;
                if (je > 0 && cur(je - 1, t) <= v)
                    continue;
                if (je + 1 < n_el && cur(je + 1, t) <= v)
                    continue;
                if (t > 0 && cur(je, t - 1) <= v)
                    continue;
                if (t + 1 < n_toa && cur(je, t + 1) <= v)
                    continue;
                cands.push_back({ia, je, t, v});
            }
        }
    }

    std::sort(cands.begin(), cands.end(),
              [](const Candidate &a, const Candidate &b) { return a.den < b.den; });

    // Drop candidates whose steering vector is manifold-equivalent to an
    // already accepted one (e.g. the +/- elevation mirror of a horizontal
    // planar array), keeping the strongest representative.
    std::vector<Candidate> kept;
    std::vector<Eigen::VectorXcd> kept_steering;
    for (const Candidate &c : cands) {
        if (static_cast<int>(kept.size()) >= n_src)
            break;
        const Eigen::VectorXcd a =
            stacked_steering(cfg, dims, ax.az[c.ia], ax.el[c.ie], ax.toa[c.it]);
        bool duplicate = false;
        for (const Eigen::VectorXcd &b : kept_steering)
            if (std::abs(b.dot(a)) > 0.999 * d) {
                duplicate = true;
                break;
            }
        if (duplicate)
            continue;
        kept.push_back(c);
        kept_steering.push_back(a);
    }
    cands = std::move(kept);

    // One quadratic interpolation step per axis on the denominator.
    auto refine_axis = [&](double x0, double step, double dm, double d0,
                           double dp) {
        const double denom = dm - 2.0 * d0 + dp;
        if (denom <= 0.0)
            return x0;
        double delta = 0.5 * (dm - dp) / denom;
        delta = std::clamp(delta, -1.0, 1.0);
        return x0 + delta * step;
    };

    std::vector<EstimatedPath> out;
    Eigen::MatrixXcd a_fit(d, static_cast<int>(cands.size()));
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        const Candidate &c = cands[ci];
        double az = ax.az[c.ia], el = ax.el[c.ie], toa = ax.toa[c.it];
        if (c.ia > 0 && c.ia + 1 < n_az)
            az = refine_axis(az, grid.az_step,
                             denominator(az - grid.az_step, el, toa), c.den,
                             denominator(az + grid.az_step, el, toa));
        if (c.ie > 0 && c.ie + 1 < n_el)
            el = refine_axis(el, grid.el_step,
                             denominator(az, el - grid.el_step, toa),
                             denominator(az, el, toa),
                             denominator(az, el + grid.el_step, toa));
        if (c.it > 0 && c.it + 1 < n_toa)
            toa = refine_axis(toa, grid.toa_step,
                              denominator(az, el, toa - grid.toa_step),
                              denominator(az, el, toa),
                              denominator(az, el, toa + grid.toa_step));

        EstimatedPath p;
        if (az >= 180.0)
            az -= 360.0;
        if (az < -180.0)
            az += 360.0;
        p.aaoa = az;
        p.eaoa = std::clamp(el, -90.0, 90.0);
        p.toa = std::max(toa, 0.0);
        out.push_back(p);
        a_fit.col(static_cast<int>(ci)) =
            stacked_steering(cfg, dims, p.aaoa, p.eaoa, p.toa);
    }

    // Least-squares power fit against the covariance, noise floor removed.
    if (!out.empty()) {
        const int s_cnt = static_cast<int>(out.size());
        double sigma2 = 0.0;
        if (d > n_src)
            sigma2 = evals.head(d - n_src).sum() / (d - n_src);
        const Eigen::MatrixXcd gram = a_fit.adjoint() * a_fit;
        const Eigen::MatrixXcd pinv =
            gram.ldlt().solve(a_fit.adjoint()); // (A^H A)^-1 A^H
        const Eigen::MatrixXcd r0 =
            cov.r - sigma2 * Eigen::MatrixXcd::Identity(d, d);
        const Eigen::MatrixXcd p_mat = pinv * r0 * pinv.adjoint();
        for (int i = 0; i < s_cnt; ++i) {
            const double pw = std::max(p_mat(i, i).real(), 1e-30);
            out[static_cast<std::size_t>(i)].power_dbm = 10.0 * std::log10(pw);
        }
    }

    std::sort(out.begin(), out.end(),
              [](const EstimatedPath &a, const EstimatedPath &b) {
                  return a.power_dbm > b.power_dbm;
              });
    return out;
}

} // namespace csiloc
