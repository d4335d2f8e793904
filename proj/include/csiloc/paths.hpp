#pragma once

#include <array>
#include <complex>
#include <vector>

#include "csiloc/geometry.hpp"

namespace csiloc {

enum class PathKind { LoS = 0, Reflection = 1, Scattering = 2, Diffraction = 3 };

const char *to_string(PathKind k);

/// One propagation ray between a transmitter and a receiver.
///
/// `gain` is the linear complex amplitude (free-space spreading times the
/// product of interaction coefficients); the propagation phase itself lives in
/// the CSI synthesis term e^{-j 2 pi f tau}. `power_dbm` is referenced to a
/// 0 dBm transmitter: power_dbm = 20 log10 |gain|.
struct PathComponent {
    PathKind kind = PathKind::LoS;
    int order = 0;               // interaction count; 0 for LoS
    std::complex<double> gain;   // linear amplitude
    double delay = 0.0;          // seconds
    double aaoa = 0.0;           // azimuth of arrival at rx, degrees [-180, 180)
    double eaoa = 0.0;           // elevation of arrival at rx, degrees [-90, 90]
    double power_dbm = 0.0;
    // Physical interaction vertices in tx -> rx order (empty for LoS).
    std::vector<Vec3> interaction_points;
};

/// Trace all detectable paths between `tx` and `rx` with the image method.
///
/// Returned paths: the LoS ray when no partition blocks the direct segment,
/// specular reflections off the six room surfaces up to
/// `max_reflection_order`, single knife-edge diffraction around the vertical
/// edges of partitions that block the direct segment (when
/// `max_diffraction_order` is 1), and optional diffuse children of
/// first-order reflections when the scene's scattering coefficient is
/// nonzero. Paths below the scene's minimum detectable power are dropped and
/// the list is sorted by descending power.
std::vector<PathComponent> trace_paths(const Scene &scene, const Vec3 &tx,
                                       const Vec3 &rx, int max_reflection_order,
                                       int max_diffraction_order);

/// One impulse of the channel impulse response.
struct CirTap {
    double delay = 0.0;
    std::complex<double> amplitude;
    PathKind kind = PathKind::LoS;
};

struct Cir {
    std::vector<CirTap> taps; // sorted by ascending delay, equal delays kept

    /// Tap counts in kind order (LoS, Reflection, Scattering, Diffraction).
    std::array<int, 4> kind_counts() const;
};

/// Assemble the impulse list from a path list; throws OutageError when empty.
Cir assemble_cir(const std::vector<PathComponent> &paths);

// Interaction coefficient helpers (exposed for tests).

/// Fresnel reflection coefficient, perpendicular polarization, for a wave
/// hitting a surface of relative permittivity `eps_r` with incidence angle
/// theta from the normal (cos_theta = |cos theta|).
std::complex<double> fresnel_reflection(double cos_theta,
                                        std::complex<double> eps_r);

/// Knife-edge diffraction amplitude factor (<= 1) for Fresnel parameter `nu`.
double knife_edge_amplitude(double nu);

} // namespace csiloc
