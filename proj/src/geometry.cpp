#include "csiloc/geometry.hpp"

#include <stdexcept>
#include <string>

namespace csiloc {

void Scene::validate() const {
    if (!(width > 0.0) || !(depth > 0.0) || !(height > 0.0))
        throw std::invalid_argument("Scene dimensions must be positive");
    if (!(carrier_freq > 0.0))
        throw std::invalid_argument("carrier_freq must be positive");
    if (!(scattering_coefficient >= 0.0 && scattering_coefficient <= 1.0))
        throw std::invalid_argument("scattering_coefficient must lie in [0, 1]");
    if (n_scatter_children < 1)
        throw std::invalid_argument("n_scatter_children must be >= 1");
    if (!std::isfinite(min_detectable_power))
        throw std::invalid_argument("min_detectable_power must be finite");
    for (const Partition &p : interior_partitions) {
        if (p.axis != 0 && p.axis != 1)
            throw std::invalid_argument("Partition axis must be 0 (x) or 1 (y)");
        if (!(p.lo < p.hi) || !(p.z0 < p.z1))
            throw std::invalid_argument("Partition extents must be nonempty");
        const double vx_lo = p.axis == 0 ? origin_x : origin_y;
        const double vx_hi = p.axis == 0 ? origin_x + width : origin_y + depth;
        const double ex_lo = p.axis == 0 ? origin_y : origin_x;
        const double ex_hi = p.axis == 0 ? origin_y + depth : origin_x + width;
        if (p.value < vx_lo || p.value > vx_hi || p.lo < ex_lo || p.hi > ex_hi ||
            p.z0 < 0.0 || p.z1 > height)
            throw std::invalid_argument("Partition must lie inside the room");
    }
}

bool segment_hits_partition(const Vec3 &a, const Vec3 &b, const Partition &p) {
    const double pa = p.axis == 0 ? a.x : a.y;
    const double pb = p.axis == 0 ? b.x : b.y;
    const double da = pa - p.value;
    const double db = pb - p.value;
    if (da == 0.0 && db == 0.0)
        return false; // segment lies in the plane; grazing contact, not a crossing
    if ((da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0))
        return false;
    const double t = da / (da - db);
    if (t <= 0.0 || t >= 1.0)
        return false;
    const Vec3 hit = a + (b - a) * t;
    const double other = p.axis == 0 ? hit.y : hit.x;
    return other >= p.lo && other <= p.hi && hit.z >= p.z0 && hit.z <= p.z1;
}

bool segment_blocked(const Vec3 &a, const Vec3 &b, const Scene &scene) {
    for (const Partition &p : scene.interior_partitions)
        if (segment_hits_partition(a, b, p))
            return true;
    return false;
}

} // namespace csiloc
