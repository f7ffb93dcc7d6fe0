// SPDX-License-Identifier: Apache-2.0
//
// vabm - vision-assisted mmWave beam management co-simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef VABM_RAYTRACE_HPP
#define VABM_RAYTRACE_HPP

#include "vabm/geometry.hpp"
#include "vabm/scenario.hpp"

#include <complex>
#include <span>
#include <vector>

namespace vabm
{

/// One specular propagation path between a transmitter and a receiver.
struct PathComponent
{
    std::complex<double> gain;
    double delay_s = 0.0;
    double aod_az_deg = 0.0, aod_el_deg = 0.0; // leaving the transmitter
    double aoa_az_deg = 0.0, aoa_el_deg = 0.0; // arriving at the receiver, pointing back along the path
    int bounces = 0;
    double length_m = 0.0;
    std::vector<Vec3> points; // tx, reflection points..., rx
};

/// A planar reflecting surface: coplanar triangles of one scene object.
struct Facet
{
    std::size_t object = 0;
    Vec3 point;  // any point on the plane
    Vec3 normal; // unit, outward
    MaterialId material = MaterialId::concrete;
    std::vector<Triangle> triangles;

    bool contains(const Vec3 &p) const;
};

/// Scene objects plus the facets derived from them.
class TraceScene
{
  public:
    explicit TraceScene(std::vector<SceneObject> objects);

    const std::vector<SceneObject> &objects() const { return objects_; }
    const std::vector<Facet> &facets() const { return facets_; }

  private:
    std::vector<SceneObject> objects_;
    std::vector<Facet> facets_;
};

/// Reflection of p across the plane through `plane_point` with unit normal `normal`.
template <typename Derived>
Vec3T<typename Derived::Scalar> mirror_point(const Eigen::MatrixBase<Derived> &p, const Vec3 &plane_point,
                                             const Vec3 &normal)
{
    return p - 2.0 * (p - plane_point).dot(normal) * normal;
}

inline double wavelength_m(double carrier_ghz) { return kSpeedOfLight / (carrier_ghz * 1e9); }

/// Free-space path over a chain of points with one material per interior vertex:
/// |gain| = lambda / (4 pi L) * prod(reflection amplitudes), phase = -2 pi L / lambda.
/// Throws std::invalid_argument on fewer than two points, a material count mismatch,
/// or a zero-length segment.
PathComponent compute_path_component(std::span<const Vec3> chain, std::span<const MaterialId> materials,
                                     double carrier_ghz, const MaterialTable &table = {});

struct TraceOptions
{
    int max_reflections = 2;
    double carrier_ghz = 28.0;
    MaterialTable materials;
    // Objects that neither occlude nor reflect (the endpoints' own bodies).
    std::vector<std::size_t> exclude;
};

/// LOS plus every valid specular path of order 1..max_reflections found with the
/// image method over the scene's facets. Every segment is checked for occlusion.
/// Result is sorted by length, then bounce count. Empty result = outage.
std::vector<PathComponent> trace_paths(const TraceScene &scene, const Vec3 &tx, const Vec3 &rx,
                                       const TraceOptions &opt);

} // namespace vabm

#endif // VABM_RAYTRACE_HPP
