#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace csiloc {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

inline double distance(const Vec3 &a, const Vec3 &b) { return (a - b).norm(); }

/// A vertical axis-aligned interior wall segment. `axis` selects the plane
/// normal: 0 for a plane x = value, 1 for y = value. The slab spans
/// [lo, hi] along the other horizontal axis and [z0, z1] vertically.
/// Partitions block rays and diffract around their two vertical edges.
struct Partition {
    int axis = 0;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double z0 = 0.0;
    double z1 = 0.0;
};

/// Rectangular (shoebox) indoor scene. The room interior is
/// [origin_x, origin_x + width] x [origin_y, origin_y + depth] x [0, height].
struct Scene {
    double width = 8.0;
    double depth = 6.0;
    double height = 3.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<Partition> interior_partitions;
    double carrier_freq = 60e9; // Hz; sets the wavelength for path amplitudes
    std::complex<double> wall_permittivity = {5.0, -0.3};
    double scattering_coefficient = 0.0; // fraction of reflected power diverted
    int n_scatter_children = 4;          // diffuse children per 1st-order bounce
    double min_detectable_power = -120.0; // dBm

    bool contains(const Vec3 &p, double eps = 0.0) const {
        return p.x > origin_x + eps && p.x < origin_x + width - eps &&
               p.y > origin_y + eps && p.y < origin_y + depth - eps &&
               p.z > eps && p.z < height - eps;
    }

    /// Throws std::invalid_argument when dimensions or member ranges are bad.
    void validate() const;
};

/// True when the open segment (a, b) crosses the partition slab.
bool segment_hits_partition(const Vec3 &a, const Vec3 &b, const Partition &p);

/// True when the open segment (a, b) crosses any partition of the scene.
bool segment_blocked(const Vec3 &a, const Vec3 &b, const Scene &scene);

} // namespace csiloc
