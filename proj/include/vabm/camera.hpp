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

#ifndef VABM_CAMERA_HPP
#define VABM_CAMERA_HPP

#include "vabm/geometry.hpp"
#include "vabm/scenario.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vabm
{

/// Pinhole camera. Image u grows to the right, v grows downwards.
struct CameraModel
{
    int width = 0, height = 0;
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    Vec3 position = Vec3::Zero();
    double yaw_deg = 0.0;   // world azimuth of the optical axis
    double pitch_deg = 0.0; // positive looks up
    Vec3 forward = Vec3::UnitX();
    Vec3 right = -Vec3::UnitY();
    Vec3 down = -Vec3::UnitZ();
};

CameraModel make_camera(int width, int height, double hfov_deg, const Vec3 &position, double yaw_deg,
                        double pitch_deg = 0.0);

/// Camera mounted on a BS: offset from the BS position, yaw relative to the boresight.
CameraModel make_camera(const BsConfig &bs);

struct Pixel
{
    double u = 0.0, v = 0.0;
    double depth = 0.0; // along the optical axis
};

/// Perspective projection; nothing for points on or behind the camera plane.
/// Points outside the image still get coordinates.
std::optional<Pixel> project_point(const CameraModel &cam, const Vec3 &p);

struct BoundingBox
{
    double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;
    std::string ue_name;
    double visibility = 0.0; // fraction of mesh vertices in the image and unoccluded

    double center_u() const { return 0.5 * (u_min + u_max); }
    double center_v() const { return 0.5 * (v_min + v_max); }

    bool operator==(const BoundingBox &) const = default;
};

bool in_image(const CameraModel &cam, double u, double v);

/// Box around the visible vertices of `scene[ue_object]`. A vertex is visible when it
/// projects inside the image and the sight line from the camera is clear of every
/// other object. Nothing when no vertex is visible.
std::optional<BoundingBox> project_bbox(const CameraModel &cam, std::span<const SceneObject> scene,
                                        std::size_t ue_object);

/// World azimuth (deg) seen at image column u: yaw - atan((u - cx) / fx).
double pixel_to_world_azimuth(const CameraModel &cam, double u);

/// Image column u as an array angle of a BS whose array normal points at `boresight_deg`.
double pixel_to_azimuth(const CameraModel &cam, double boresight_deg, double u);

// ---- Debug raster ------------------------------------------------------

struct Rgb
{
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb &) const = default;
};

struct Image
{
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgb; // row-major, 3 bytes per pixel

    Rgb at(int x, int y) const;
};

inline constexpr Rgb kBackground{210, 225, 235};

/// Overlay and UE body colors, indexed by UE order in the scene (cycled).
inline constexpr std::array<Rgb, 6> kUePalette = {{
    {230, 25, 75},
    {60, 180, 75},
    {0, 130, 200},
    {245, 130, 48},
    {145, 30, 180},
    {70, 240, 240},
}};

Rgb material_color(MaterialId m);

struct Overlay
{
    BoundingBox box;
    int color = 0; // index into kUePalette
};

/// Flat-shaded painter's-algorithm render of the scene with 2 px bbox outlines.
/// Output depends only on the inputs.
Image render_debug_frame(std::span<const SceneObject> scene, const CameraModel &cam,
                         std::span<const Overlay> overlays = {});

/// Binary PPM (P6).
std::string encode_ppm(const Image &img);
void write_ppm_file(const std::string &path, const Image &img);

} // namespace vabm

#endif // VABM_CAMERA_HPP
