#include "csiloc/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csiloc/errors.hpp"
#include "csiloc/rng.hpp"

namespace csiloc {

const char *to_string(PathKind k) {
    switch (k) {
    case PathKind::LoS: return "los";
    case PathKind::Reflection: return "reflection";
    case PathKind::Scattering: return "scattering";
    case PathKind::Diffraction: return "diffraction";
    }
    return "?";
}

std::complex<double> fresnel_reflection(double cos_theta,
                                        std::complex<double> eps_r) {
    const double sin2 = 1.0 - cos_theta * cos_theta;
    const std::complex<double> root = std::sqrt(eps_r - sin2);
    return (cos_theta - root) / (cos_theta + root);
}

double knife_edge_amplitude(double nu) {
    // ITU-R P.526 single knife-edge approximation, valid for nu > -0.78.
    if (nu <= -0.78)
        return 1.0;
    const double t = nu - 0.1;
    const double loss_db = 6.9 + 20.0 * std::log10(std::sqrt(t * t + 1.0) + t);
    return std::pow(10.0, -loss_db / 20.0);
}

namespace {

struct ArrivalAngles {
    double aaoa;
    double eaoa;
};

// Arrival angles from the unit vector pointing from rx toward the apparent
// source.
ArrivalAngles angles_from_direction(const Vec3 &u) {
    double az = std::atan2(u.y, u.x) * 180.0 / M_PI;
    if (az >= 180.0)
        az -= 360.0;
    double el = std::asin(std::clamp(u.z, -1.0, 1.0)) * 180.0 / M_PI;
    return {az, el};
}

double power_dbm_of(const std::complex<double> &gain) {
    return 20.0 * std::log10(std::abs(gain));
}

// Triangle-wave fold of an unfolded coordinate back into [0, length].
double fold_coordinate(double v, double length) {
    double r = std::fmod(v, 2.0 * length);
    if (r < 0.0)
        r += 2.0 * length;
    return r <= length ? r : 2.0 * length - r;
}

struct AxisImage {
    double coord;  // unfolded image coordinate
    int count;     // wall hits along this axis
};

// Mirror images of coordinate v across the planes {0, L} with up to
// `max_order` reflections: v' = (1 - 2u) v + 2 n L, hit count 2|n| for u = 0
// and |2n - 1| for u = 1.
std::vector<AxisImage> axis_images(double v, double length, int max_order) {
    std::vector<AxisImage> out;
    const int n_span = max_order / 2 + 1;
    for (int u = 0; u <= 1; ++u) {
        for (int n = -n_span; n <= n_span; ++n) {
            const int count = u == 0 ? 2 * std::abs(n) : std::abs(2 * n - 1);
            if (count > max_order)
                continue;
            out.push_back({(u == 0 ? v : -v) + 2.0 * n * length, count});
        }
    }
    return out;
}

struct Crossing {
    double t;
    int axis;
};

} // namespace

std::vector<PathComponent> trace_paths(const Scene &scene, const Vec3 &tx,
                                       const Vec3 &rx, int max_reflection_order,
                                       int max_diffraction_order) {
    scene.validate();
    if (max_reflection_order < 0)
        throw std::invalid_argument("max_reflection_order must be >= 0");
    if (max_diffraction_order != 0 && max_diffraction_order != 1)
        throw std::invalid_argument("max_diffraction_order must be 0 or 1");
    if (distance(tx, rx) == 0.0)
        throw std::invalid_argument("tx and rx coincide");
    if (!scene.contains(tx) || !scene.contains(rx))
        throw std::invalid_argument("tx and rx must lie strictly inside the room");

    const double lambda = kSpeedOfLight / scene.carrier_freq;
    const double s_coeff = scene.scattering_coefficient;
    const Vec3 origin{scene.origin_x, scene.origin_y, 0.0};
    const Vec3 txl = tx - origin;
    const Vec3 rxl = rx - origin;
    const double dims[3] = {scene.width, scene.depth, scene.height};

    std::vector<PathComponent> paths;

    auto keep = [&](PathComponent &&p) {
        if (p.power_dbm >= scene.min_detectable_power)
            paths.push_back(std::move(p));
    };

    // LoS
    const bool los_clear = !segment_blocked(tx, rx, scene);
    if (los_clear) {
        const double d = distance(tx, rx);
        const Vec3 u = (tx - rx) * (1.0 / d);
        PathComponent p;
        p.kind = PathKind::LoS;
        p.order = 0;
        p.gain = lambda / (4.0 * M_PI * d);
        p.delay = d / kSpeedOfLight;
        const ArrivalAngles a = angles_from_direction(u);
        p.aaoa = a.aaoa;
        p.eaoa = a.eaoa;
        p.power_dbm = power_dbm_of(p.gain);
        keep(std::move(p));
    }

    // Specular reflections via the image lattice, folded back for blockage
    // checks against interior partitions.
    const auto imgs_x = axis_images(txl.x, dims[0], max_reflection_order);
    const auto imgs_y = axis_images(txl.y, dims[1], max_reflection_order);
    const auto imgs_z = axis_images(txl.z, dims[2], max_reflection_order);
    for (const AxisImage &ix : imgs_x) {
        for (const AxisImage &iy : imgs_y) {
            const int cxy = ix.count + iy.count;
            if (cxy > max_reflection_order)
                continue;
            for (const AxisImage &iz : imgs_z) {
                const int order = cxy + iz.count;
                if (order == 0 || order > max_reflection_order)
                    continue;

                const Vec3 img{ix.coord, iy.coord, iz.coord};
                const Vec3 diff = img - rxl;
                const double d = diff.norm();
                const Vec3 u = diff * (1.0 / d);

                // Per-axis incidence is constant along the unfolded line.
                std::complex<double> coeff = 1.0;
                const double cosines[3] = {std::abs(u.x), std::abs(u.y),
                                           std::abs(u.z)};
                const int counts[3] = {ix.count, iy.count, iz.count};
                for (int ax = 0; ax < 3; ++ax)
                    for (int c = 0; c < counts[ax]; ++c)
                        coeff *= fresnel_reflection(cosines[ax],
                                                    scene.wall_permittivity);

                std::complex<double> gain =
                    coeff * (lambda / (4.0 * M_PI * d));
                if (order == 1 && s_coeff > 0.0)
                    gain *= std::sqrt(1.0 - s_coeff);
                const double p_dbm = power_dbm_of(gain);
                // Children of a first-order bounce can only be weaker than
                // the raw specular power, so pruning here is safe.
                if (p_dbm < scene.min_detectable_power &&
                    !(order == 1 && s_coeff > 0.0))
                    continue;

                // Wall-plane crossings of the unfolded segment rx -> image.
                std::vector<Crossing> crossings;
                const double from[3] = {rxl.x, rxl.y, rxl.z};
                const double to[3] = {img.x, img.y, img.z};
                for (int ax = 0; ax < 3; ++ax) {
                    if (counts[ax] == 0)
                        continue;
                    const double lo = std::min(from[ax], to[ax]);
                    const double hi = std::max(from[ax], to[ax]);
                    const int m0 = static_cast<int>(std::ceil(lo / dims[ax]));
                    for (int m = m0; m * dims[ax] < hi; ++m) {
                        const double plane = m * dims[ax];
                        if (plane <= lo)
                            continue;
                        crossings.push_back(
                            {(plane - from[ax]) / (to[ax] - from[ax]), ax});
                    }
                }
                std::sort(crossings.begin(), crossings.end(),
                          [](const Crossing &a, const Crossing &b) {
                              return a.t < b.t;
                          });

                // Fold crossing points into the room and test every physical
                // sub-segment (vertices are on walls; partitions are interior).
                std::vector<Vec3> verts;
                verts.reserve(crossings.size() + 2);
                verts.push_back(rx);
                for (const Crossing &cr : crossings) {
                    const Vec3 p = rxl + (img - rxl) * cr.t;
                    verts.push_back(Vec3{fold_coordinate(p.x, dims[0]),
                                         fold_coordinate(p.y, dims[1]),
                                         fold_coordinate(p.z, dims[2])} +
                                    origin);
                }
                verts.push_back(tx);
                bool blocked = false;
                for (std::size_t i = 0; i + 1 < verts.size() && !blocked; ++i)
                    blocked = segment_blocked(verts[i], verts[i + 1], scene);
                if (blocked)
                    continue;

                PathComponent p;
                p.kind = PathKind::Reflection;
                p.order = order;
                p.gain = gain;
                p.delay = d / kSpeedOfLight;
                const ArrivalAngles a = angles_from_direction(u);
                p.aaoa = a.aaoa;
                p.eaoa = a.eaoa;
                p.power_dbm = p_dbm;
                p.interaction_points.assign(verts.begin() + 1, verts.end() - 1);
                std::reverse(p.interaction_points.begin(),
                             p.interaction_points.end()); // tx -> rx order

                // Diffuse children share the bounce point and delay; each
                // carries an equal share of the diverted power with jittered
                // arrival direction and phase.
                if (order == 1 && s_coeff > 0.0) {
                    const int n_child = scene.n_scatter_children;
                    const double raw_power =
                        std::norm(gain) / (1.0 - s_coeff);
                    const double child_amp =
                        std::sqrt(s_coeff * raw_power / n_child);
                    std::uint64_t h = 0x5ca77e21u;
                    h = derive_seed(h, static_cast<std::uint64_t>(
                                           std::llround(d * 1e6)));
                    for (int ci = 0; ci < n_child; ++ci) {
                        std::mt19937_64 jrng(derive_seed(h, ci));
                        PathComponent ch;
                        ch.kind = PathKind::Scattering;
                        ch.order = 1;
                        ch.delay = p.delay;
                        ch.gain = std::polar(child_amp,
                                             uniform_range(jrng, 0.0, 2 * M_PI));
                        ch.power_dbm = power_dbm_of(ch.gain);
                        double az = p.aaoa + uniform_range(jrng, -15.0, 15.0);
                        if (az >= 180.0)
                            az -= 360.0;
                        if (az < -180.0)
                            az += 360.0;
                        ch.aaoa = az;
                        ch.eaoa = std::clamp(
                            p.eaoa + uniform_range(jrng, -7.5, 7.5), -90.0, 90.0);
                        ch.interaction_points = p.interaction_points;
                        keep(std::move(ch));
                    }
                }
                if (p_dbm >= scene.min_detectable_power)
                    paths.push_back(std::move(p));
            }
        }
    }

    // Single knife-edge diffraction around the vertical edges of partitions
    // that obstruct the direct segment.
    if (max_diffraction_order == 1) {
        const double d_direct = distance(tx, rx);
        for (std::size_t pi = 0; pi < scene.interior_partitions.size(); ++pi) {
            const Partition &part = scene.interior_partitions[pi];
            if (!segment_hits_partition(tx, rx, part))
                continue;
            const double ext_lo =
                part.axis == 0 ? scene.origin_y : scene.origin_x;
            const double ext_hi = part.axis == 0 ? scene.origin_y + scene.depth
                                                 : scene.origin_x + scene.width;
            for (int side = 0; side < 2; ++side) {
                const double e = side == 0 ? part.lo : part.hi;
                // An edge flush against a room wall is not a free edge.
                if (std::abs(e - ext_lo) < 1e-12 || std::abs(e - ext_hi) < 1e-12)
                    continue;
                const double ex = part.axis == 0 ? part.value : e;
                const double ey = part.axis == 0 ? e : part.value;
                // Fermat point on the edge: straight line in the unrolled
                // (horizontal arc, z) plane, clamped to the edge extent.
                const double a = std::hypot(tx.x - ex, tx.y - ey);
                const double b = std::hypot(rx.x - ex, rx.y - ey);
                if (a + b == 0.0)
                    continue;
                double zq = tx.z + (rx.z - tx.z) * a / (a + b);
                zq = std::clamp(zq, part.z0, part.z1);
                const Vec3 q{ex, ey, zq};
                const double d1 = distance(tx, q);
                const double d2 = distance(q, rx);
                if (d1 == 0.0 || d2 == 0.0)
                    continue;
                if (segment_blocked(tx, q, scene) || segment_blocked(q, rx, scene))
                    continue;

                const double excess = d1 + d2 - d_direct;
                const double nu = std::sqrt(4.0 * std::max(excess, 0.0) / lambda);
                const double amp = knife_edge_amplitude(nu);

                PathComponent p;
                p.kind = PathKind::Diffraction;
                p.order = 1;
                p.gain = std::polar(amp * lambda / (4.0 * M_PI * (d1 + d2)),
                                    -M_PI / 4.0);
                p.delay = (d1 + d2) / kSpeedOfLight;
                const Vec3 u = (q - rx) * (1.0 / d2);
                const ArrivalAngles ang = angles_from_direction(u);
                p.aaoa = ang.aaoa;
                p.eaoa = ang.eaoa;
                p.power_dbm = power_dbm_of(p.gain);
                p.interaction_points = {q};
                keep(std::move(p));
            }
        }
    }

    std::stable_sort(paths.begin(), paths.end(),
                     [](const PathComponent &a, const PathComponent &b) {
                         return a.power_dbm > b.power_dbm;
                     });
    return paths;
}

std::array<int, 4> Cir::kind_counts() const {
    std::array<int, 4> counts{0, 0, 0, 0};
    for (const CirTap &t : taps)
        ++counts[static_cast<int>(t.kind)];
    return counts;
}

Cir assemble_cir(const std::vector<PathComponent> &paths) {
    if (paths.empty())
        throw OutageError("empty path list: link is in outage");
    Cir cir;
    cir.taps.reserve(paths.size());
    for (const PathComponent &p : paths)
        cir.taps.push_back({p.delay, p.gain, p.kind});
    std::stable_sort(cir.taps.begin(), cir.taps.end(),
                     [](const CirTap &a, const CirTap &b) {
                         return a.delay < b.delay;
                     });
    return cir;
}

} // namespace csiloc
