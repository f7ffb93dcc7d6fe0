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

#ifndef VABM_GEOMETRY_HPP
#define VABM_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// World frame: right-handed, z up, azimuth counterclockwise from +x in the xy-plane.
// Lengths in meters, angles in degrees at every public interface.

namespace vabm
{

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
using Vec3 = Vec3T<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

/// Offset applied to ray origins and segment ends so a ray never re-hits its launch face.
inline constexpr double kRayEpsilon = 1e-6;

inline constexpr double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle to (-180, 180].
double wrap_deg(double deg);

/// Azimuth (deg, in (-180, 180]) and elevation (deg) of a direction vector.
template <typename Derived>
double azimuth_deg(const Eigen::MatrixBase<Derived> &d)
{
    return rad2deg(std::atan2(d.y(), d.x()));
}

template <typename Derived>
double elevation_deg(const Eigen::MatrixBase<Derived> &d)
{
    return rad2deg(std::atan2(d.z(), std::hypot(d.x(), d.y())));
}

// Electromagnetic material classes. The set is closed.
enum class MaterialId : std::uint8_t
{
    metal,
    concrete,
    brick,
};

std::string_view to_string(MaterialId m);
std::optional<MaterialId> material_from_string(std::string_view name);

struct Triangle
{
    Vec3 v0, v1, v2;
    MaterialId material = MaterialId::concrete;

    Vec3 normal() const { return (v1 - v0).cross(v2 - v0).normalized(); }
    double area() const { return 0.5 * (v1 - v0).cross(v2 - v0).norm(); }

    bool operator==(const Triangle &) const = default;
};

/// Closed or open triangle soup. Construction rejects empty meshes and
/// degenerate triangles (area <= 1e-12 m^2).
class Mesh
{
  public:
    explicit Mesh(std::vector<Triangle> triangles);

    const std::vector<Triangle> &triangles() const { return triangles_; }
    std::size_t size() const { return triangles_.size(); }
    double surface_area() const;
    Vec3 centroid() const; // mean of triangle vertices

    /// Unique vertex positions in first-seen order.
    std::vector<Vec3> vertices() const;

    Mesh translated(const Vec3 &offset) const;

    bool operator==(const Mesh &) const = default;

  private:
    std::vector<Triangle> triangles_;
};

/// Closed box of the given full extents, rotated by yaw about +z, 12 triangles with
/// outward-facing winding. Triangles come in coplanar pairs, one pair per face.
Mesh box_mesh(const Vec3 &center, const Vec3 &size, double yaw_deg, MaterialId material);

struct Keyframe
{
    int frame = 0;
    Vec3 position = Vec3::Zero();

    bool operator==(const Keyframe &) const = default;
};

/// Piecewise-linear keyframe track with strictly increasing frame indices.
class Trajectory
{
  public:
    explicit Trajectory(std::vector<Keyframe> keyframes);
    const std::vector<Keyframe> &keyframes() const { return keyframes_; }

  private:
    std::vector<Keyframe> keyframes_;
};

/// Linear interpolation between the bracketing keyframes, clamped outside the span.
Vec3 interpolate_position(const Trajectory &t, int frame);

// ---- STL ---------------------------------------------------------------

/// Reads ASCII or binary STL. Normals stored in the file are ignored and
/// recomputed from vertex winding. Throws std::runtime_error on truncation,
/// unrecognised data, or a zero-triangle file.
Mesh parse_stl(std::string_view bytes, MaterialId material = MaterialId::concrete);

/// Binary little-endian STL: 80-byte header, uint32 count, 50-byte records.
std::string write_stl(const Mesh &m, std::string_view header_text = "vabm");

Mesh read_stl_file(const std::string &path, MaterialId material);
void write_stl_file(const std::string &path, const Mesh &m);

// ---- Scene geometry and ray casting -----------------------------------

enum class ObjectKind : std::uint8_t
{
    reflector,
    ue,
};

struct SceneObject
{
    std::string name;
    ObjectKind kind = ObjectKind::reflector;
    Mesh mesh;
};

struct Ray
{
    Vec3 origin;
    Vec3 dir; // unit length
};

struct Hit
{
    double t = 0.0;
    std::size_t object = 0;
    std::size_t triangle = 0;
    Vec3 point;
};

/// Möller-Trumbore intersection of a ray with a single triangle (two-sided).
/// Returns the ray parameter or nothing.
std::optional<double> intersect_triangle(const Ray &ray, const Triangle &tri);

/// Nearest hit with t in (kRayEpsilon, t_max) across all objects not listed in `skip`.
std::optional<Hit> ray_intersect(const Ray &ray, std::span<const SceneObject> objects, double t_max,
                                 std::span<const std::size_t> skip = {});

/// True if the open segment a-b is free of geometry (endpoints shrunk by kRayEpsilon).
bool segment_clear(const Vec3 &a, const Vec3 &b, std::span<const SceneObject> objects,
                   std::span<const std::size_t> skip = {});

} // namespace vabm

#endif // VABM_GEOMETRY_HPP
