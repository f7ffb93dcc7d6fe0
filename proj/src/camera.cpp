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

#include "vabm/camera.hpp"

#include "vabm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vabm
{

CameraModel make_camera(int width, int height, double hfov_deg, const Vec3 &position, double yaw_deg, double pitch_deg)
{
    if (width < 1 || height < 1)
        throw std::invalid_argument("make_camera: resolution must be at least 1x1.");
    if (!(hfov_deg > 0.0 && hfov_deg < 180.0))
        throw std::invalid_argument("make_camera: hfov must be in (0, 180) degrees.");

    CameraModel c;
    c.width = width;
    c.height = height;
    c.fx = 0.5 * width / std::tan(deg2rad(0.5 * hfov_deg));
    c.fy = c.fx;
    c.cx = 0.5 * width;
    c.cy = 0.5 * height;
    c.position = position;
    c.yaw_deg = yaw_deg;
    c.pitch_deg = pitch_deg;

    const double cy = std::cos(deg2rad(yaw_deg)), sy = std::sin(deg2rad(yaw_deg));
    const double cp = std::cos(deg2rad(pitch_deg)), sp = std::sin(deg2rad(pitch_deg));
    c.forward = Vec3(cy * cp, sy * cp, sp);
    c.right = Vec3(sy, -cy, 0.0);
    c.down = c.forward.cross(c.right); // = -(right x forward), i.e. -up
    return c;
}

CameraModel make_camera(const BsConfig &bs)
{
    const auto &cc = bs.camera;
    return make_camera(cc.width_px, cc.height_px, cc.hfov_deg, bs.position + cc.offset,
                       wrap_deg(bs.boresight_deg + cc.yaw_deg), cc.pitch_deg);
}

std::optional<Pixel> project_point(const CameraModel &cam, const Vec3 &p)
{
    const Vec3 d = p - cam.position;
    const double z = cam.forward.dot(d);
    if (!(z > 0.0))
        return std::nullopt;
    return Pixel{cam.cx + cam.fx * cam.right.dot(d) / z, cam.cy + cam.fy * cam.down.dot(d) / z, z};
}

bool in_image(const CameraModel &cam, double u, double v)
{
    return u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height;
}

std::optional<BoundingBox> project_bbox(const CameraModel &cam, std::span<const SceneObject> scene,
                                        std::size_t ue_object)
{
    const auto &obj = scene[ue_object];
    const auto verts = obj.mesh.vertices();
    const std::size_t skip[] = {ue_object};

    BoundingBox box;
    box.ue_name = obj.name;
    box.u_min = box.v_min = std::numeric_limits<double>::infinity();
    box.u_max = box.v_max = -std::numeric_limits<double>::infinity();
    std::size_t visible = 0;
    for (const auto &v : verts)
    {
        const auto px = project_point(cam, v);
        if (!px || !in_image(cam, px->u, px->v))
            continue;
        if (!segment_clear(cam.position, v, scene, skip))
            continue;
        ++visible;
        box.u_min = std::min(box.u_min, px->u);
        box.u_max = std::max(box.u_max, px->u);
        box.v_min = std::min(box.v_min, px->v);
        box.v_max = std::max(box.v_max, px->v);
    }
    if (visible == 0)
        return std::nullopt;
    box.visibility = static_cast<double>(visible) / static_cast<double>(verts.size());
    return box;
}

double pixel_to_world_azimuth(const CameraModel &cam, double u)
{
    return wrap_deg(cam.yaw_deg - rad2deg(std::atan((u - cam.cx) / cam.fx)));
}

double pixel_to_azimuth(const CameraModel &cam, double boresight_deg, double u)
{
    return array_angle_deg(pixel_to_world_azimuth(cam, u), boresight_deg);
}

// ---- Debug raster ------------------------------------------------------

Rgb Image::at(int x, int y) const
{
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    return Rgb{rgb[i], rgb[i + 1], rgb[i + 2]};
}

Rgb material_color(MaterialId m)
{
    switch (m)
    {
    case MaterialId::metal:
        return {90, 100, 120};
    case MaterialId::concrete:
        return {128, 128, 128};
    case MaterialId::brick:
        return {165, 80, 60};
    }
    return {0, 0, 0};
}

namespace
{

constexpr double kNear = 0.05;

struct ScreenTri
{
    Eigen::Vector2d p[3];
    double depth;
    Rgb color;
};

Rgb shade(Rgb c, double f)
{
    auto ch = [f](std::uint8_t x) { return static_cast<std::uint8_t>(std::clamp(std::lround(x * f), 0L, 255L)); };
    return {ch(c.r), ch(c.g), ch(c.b)};
}

Rgb lighten(Rgb c)
{
    return {static_cast<std::uint8_t>((c.r + 255) / 2), static_cast<std::uint8_t>((c.g + 255) / 2),
            static_cast<std::uint8_t>((c.b + 255) / 2)};
}

// Clip a camera-space polygon (x right, y down, z forward) against z >= kNear.
std::vector<Vec3> clip_near(const std::vector<Vec3> &poly)
{
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
        const Vec3 &a = poly[i];
        const Vec3 &b = poly[(i + 1) % poly.size()];
        const bool ain = a.z() >= kNear, bin = b.z() >= kNear;
        if (ain)
            out.push_back(a);
        if (ain != bin)
        {
            const double t = (kNear - a.z()) / (b.z() - a.z());
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

void fill(Image &img, const ScreenTri &t)
{
    const auto &a = t.p[0], &b = t.p[1], &c = t.p[2];
    const double area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    if (std::abs(area) < 1e-12)
        return;
    const double sgn = area > 0 ? 1.0 : -1.0;

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}))));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}))));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}))));

    auto edge = [sgn](const Eigen::Vector2d &p, const Eigen::Vector2d &q, double x, double y)
    { return sgn * ((q.x() - p.x()) * (y - p.y()) - (q.y() - p.y()) * (x - p.x())); };

    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
        {
            const double px = x + 0.5, py = y + 0.5;
            if (edge(a, b, px, py) >= 0 && edge(b, c, px, py) >= 0 && edge(c, a, px, py) >= 0)
            {
                const std::size_t i = 3 * (static_cast<std::size_t>(y) * img.width + x);
                img.rgb[i] = t.color.r;
                img.rgb[i + 1] = t.color.g;
                img.rgb[i + 2] = t.color.b;
            }
        }
}

void outline(Image &img, const BoundingBox &box, Rgb color)
{
    const int x0 = std::clamp(static_cast<int>(std::floor(box.u_min)), 0, img.width - 1);
    const int x1 = std::clamp(static_cast<int>(std::floor(box.u_max)), 0, img.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(box.v_min)), 0, img.height - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor(box.v_max)), 0, img.height - 1);
    auto put = [&](int x, int y)
    {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height)
            return;
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * img.width + x);
        img.rgb[i] = color.r;
        img.rgb[i + 1] = color.g;
        img.rgb[i + 2] = color.b;
    };
    for (int k = 0; k < 2; ++k)
    {
        for (int x = x0; x <= x1; ++x)
        {
            put(x, y0 + k);
            put(x, y1 - k);
        }
        for (int y = y0; y <= y1; ++y)
        {
            put(x0 + k, y);
            put(x1 - k, y);
        }
    }
}

} // namespace

Image render_debug_frame(std::span<const SceneObject> scene, const CameraModel &cam, std::span<const Overlay> overlays)
{
    Image img;
    img.width = cam.width;
    img.height = cam.height;
    img.rgb.resize(static_cast<std::size_t>(cam.width) * cam.height * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3)
    {
        img.rgb[i] = kBackground.r;
        img.rgb[i + 1] = kBackground.g;
        img.rgb[i + 2] = kBackground.b;
    }

    auto to_cam = [&cam](const Vec3 &p)
    {
        const Vec3 d = p - cam.position;
        return Vec3(cam.right.dot(d), cam.down.dot(d), cam.forward.dot(d));
    };

    std::vector<ScreenTri> tris;
    int ue_index = 0;
    for (const auto &obj : scene)
    {
        const bool is_ue = obj.kind == ObjectKind::ue;
        const Rgb ue_color = lighten(kUePalette[ue_index % kUePalette.size()]);
        if (is_ue)
            ++ue_index;
        for (const auto &tri : obj.mesh.triangles())
        {
            const auto poly = clip_near({to_cam(tri.v0), to_cam(tri.v1), to_cam(tri.v2)});
            if (poly.size() < 3)
                continue;
            const Vec3 centroid = (tri.v0 + tri.v1 + tri.v2) / 3.0;
            const Vec3 view = (centroid - cam.position).normalized();
            const double facing = std::abs(tri.normal().dot(view));
            const Rgb color = shade(is_ue ? ue_color : material_color(tri.material), 0.55 + 0.45 * facing);

            double depth = 0.0;
            std::vector<Eigen::Vector2d> px;
            for (const auto &q : poly)
            {
                px.emplace_back(cam.cx + cam.fx * q.x() / q.z(), cam.cy + cam.fy * q.y() / q.z());
                depth += q.z();
            }
            depth /= static_cast<double>(poly.size());
            for (std::size_t k = 1; k + 1 < px.size(); ++k)
                tris.push_back(ScreenTri{{px[0], px[k], px[k + 1]}, depth, color});
        }
    }

    std::stable_sort(tris.begin(), tris.end(), [](const ScreenTri &a, const ScreenTri &b) { return a.depth > b.depth; });
    for (const auto &t : tris)
        fill(img, t);
    for (const auto &o : overlays)
        outline(img, o.box, kUePalette[static_cast<std::size_t>(o.color) % kUePalette.size()]);
    return img;
}

std::string encode_ppm(const Image &img)
{
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char *>(img.rgb.data()), img.rgb.size());
    return out;
}

void write_ppm_file(const std::string &path, const Image &img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("Cannot open '" + path + "' for writing.");
    const std::string bytes = encode_ppm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("Failed writing image '" + path + "'.");
}

} // namespace vabm
