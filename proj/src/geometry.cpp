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

#include "vabm/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vabm
{

double wrap_deg(double deg)
{
    double r = std::fmod(deg + 180.0, 360.0);
    if (r <= 0.0)
        r += 360.0;
    return r - 180.0;
}

std::string_view to_string(MaterialId m)
{
    switch (m)
    {
    case MaterialId::metal:
        return "metal";
    case MaterialId::concrete:
        return "concrete";
    case MaterialId::brick:
        return "brick";
    }
    return "unknown";
}

std::optional<MaterialId> material_from_string(std::string_view name)
{
    if (name == "metal")
        return MaterialId::metal;
    if (name == "concrete")
        return MaterialId::concrete;
    if (name == "brick")
        return MaterialId::brick;
    return std::nullopt;
}

// ---- Mesh --------------------------------------------------------------

Mesh::Mesh(std::vector<Triangle> triangles) : triangles_(std::move(triangles))
{
    if (triangles_.empty())
        throw std::invalid_argument("Mesh must contain at least one triangle.");
    for (std::size_t i = 0; i < triangles_.size(); ++i)
    {
        const auto &t = triangles_[i];
        if (!t.v0.allFinite() || !t.v1.allFinite() || !t.v2.allFinite())
            throw std::invalid_argument("Mesh triangle " + std::to_string(i) + " has non-finite vertices.");
        if (!(t.area() > 1e-12))
            throw std::invalid_argument("Mesh triangle " + std::to_string(i) + " is degenerate.");
    }
}

double Mesh::surface_area() const
{
    double a = 0.0;
    for (const auto &t : triangles_)
        a += t.area();
    return a;
}

Vec3 Mesh::centroid() const
{
    Vec3 c = Vec3::Zero();
    for (const auto &t : triangles_)
        c += t.v0 + t.v1 + t.v2;
    return c / (3.0 * static_cast<double>(triangles_.size()));
}

std::vector<Vec3> Mesh::vertices() const
{
    std::vector<Vec3> out;
    auto add = [&out](const Vec3 &v)
    {
        if (std::find(out.begin(), out.end(), v) == out.end())
            out.push_back(v);
    };
    for (const auto &t : triangles_)
    {
        add(t.v0);
        add(t.v1);
        add(t.v2);
    }
    return out;
}

Mesh Mesh::translated(const Vec3 &offset) const
{
    std::vector<Triangle> tris = triangles_;
    for (auto &t : tris)
    {
        t.v0 += offset;
        t.v1 += offset;
        t.v2 += offset;
    }
    return Mesh(std::move(tris));
}

Mesh box_mesh(const Vec3 &center, const Vec3 &size, double yaw_deg, MaterialId material)
{
    if (!(size.array() > 0.0).all())
        throw std::invalid_argument("box_mesh: size must be positive in every component.");

    const double c = std::cos(deg2rad(yaw_deg)), s = std::sin(deg2rad(yaw_deg));
    Eigen::Matrix3d rot;
    rot << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;

    // Corner i has bit0 -> +x, bit1 -> +y, bit2 -> +z.
    std::array<Vec3, 8> corner;
    for (int i = 0; i < 8; ++i)
    {
        const Vec3 local((i & 1 ? 0.5 : -0.5) * size.x(), (i & 2 ? 0.5 : -0.5) * size.y(),
                         (i & 4 ? 0.5 : -0.5) * size.z());
        corner[i] = center + rot * local;
    }

    static constexpr int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                                        {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};

    std::vector<Triangle> tris;
    tris.reserve(12);
    for (const auto &q : quads)
    {
        const Vec3 face_center = 0.25 * (corner[q[0]] + corner[q[1]] + corner[q[2]] + corner[q[3]]);
        Triangle a{corner[q[0]], corner[q[1]], corner[q[2]], material};
        Triangle b{corner[q[0]], corner[q[2]], corner[q[3]], material};
        if ((a.v1 - a.v0).cross(a.v2 - a.v0).dot(face_center - center) < 0.0)
        {
            std::swap(a.v1, a.v2);
            std::swap(b.v1, b.v2);
        }
        tris.push_back(a);
        tris.push_back(b);
    }
    return Mesh(std::move(tris));
}

// ---- Trajectory --------------------------------------------------------

Trajectory::Trajectory(std::vector<Keyframe> keyframes) : keyframes_(std::move(keyframes))
{
    if (keyframes_.empty())
        throw std::invalid_argument("Trajectory requires at least one keyframe.");
    for (std::size_t i = 1; i < keyframes_.size(); ++i)
        if (keyframes_[i].frame <= keyframes_[i - 1].frame)
            throw std::invalid_argument("Trajectory keyframes must have strictly increasing frame indices.");
}

Vec3 interpolate_position(const Trajectory &t, int frame)
{
    const auto &k = t.keyframes();
    if (frame <= k.front().frame)
        return k.front().position;
    if (frame >= k.back().frame)
        return k.back().position;

    const auto hi = std::upper_bound(k.begin(), k.end(), frame,
                                     [](int f, const Keyframe &kf) { return f < kf.frame; });
    const auto lo = hi - 1;
    if (lo->frame == frame)
        return lo->position;
    const double a = static_cast<double>(frame - lo->frame) / static_cast<double>(hi->frame - lo->frame);
    return (1.0 - a) * lo->position + a * hi->position;
}

// ---- STL ---------------------------------------------------------------

namespace
{

std::uint32_t load_u32le(const char *p)
{
    const auto *b = reinterpret_cast<const unsigned char *>(p);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void store_u32le(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

float load_f32le(const char *p) { return std::bit_cast<float>(load_u32le(p)); }
void store_f32le(std::string &out, float f) { store_u32le(out, std::bit_cast<std::uint32_t>(f)); }

bool looks_ascii(std::string_view bytes)
{
    auto pos = bytes.find_first_not_of(" \t\r\n");
    if (pos == std::string_view::npos || bytes.substr(pos, 5) != "solid")
        return false;
    return bytes.find("facet") != std::string_view::npos || bytes.find("endsolid") != std::string_view::npos;
}

Mesh parse_ascii_stl(std::string_view text, MaterialId material)
{
    std::vector<Vec3> verts;
    std::size_t i = 0;
    auto next_token = [&]() -> std::string_view
    {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        return text.substr(start, i - start);
    };
    for (auto tok = next_token(); !tok.empty(); tok = next_token())
    {
        if (tok != "vertex")
            continue;
        Vec3 v;
        for (int c = 0; c < 3; ++c)
        {
            const auto num = next_token();
            double val = 0.0;
            const auto res = std::from_chars(num.data(), num.data() + num.size(), val);
            if (num.empty() || res.ec != std::errc() || res.ptr != num.data() + num.size())
                throw std::runtime_error("ASCII STL: malformed vertex coordinate '" + std::string(num) + "'.");
            v[c] = val;
        }
        verts.push_back(v);
    }
    if (verts.size() % 3 != 0)
        throw std::runtime_error("ASCII STL is truncated: vertex count is not a multiple of 3.");
    if (verts.empty())
        throw std::runtime_error("STL file contains no triangles.");

    std::vector<Triangle> tris;
    for (std::size_t k = 0; k < verts.size(); k += 3)
        tris.push_back(Triangle{verts[k], verts[k + 1], verts[k + 2], material});
    return Mesh(std::move(tris));
}

} // namespace

Mesh parse_stl(std::string_view bytes, MaterialId material)
{
    const bool binary_sized =
        bytes.size() >= 84 && 84 + 50 * std::uint64_t(load_u32le(bytes.data() + 80)) == bytes.size();
    if (!binary_sized && looks_ascii(bytes))
        return parse_ascii_stl(bytes, material);

    if (bytes.size() < 84)
        throw std::runtime_error("Not an STL file: no 'solid' header and too short for a binary header.");

    const std::uint32_t count = load_u32le(bytes.data() + 80);
    if (count == 0)
        throw std::runtime_error("STL file contains no triangles.");
    const std::uint64_t needed = 84 + 50 * std::uint64_t(count);
    if (bytes.size() < needed)
        throw std::runtime_error("Binary STL is truncated: header claims " + std::to_string(count) +
                                 " triangles (" + std::to_string(needed) + " bytes), file has " +
                                 std::to_string(bytes.size()) + " bytes.");

    std::vector<Triangle> tris;
    tris.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k)
    {
        const char *rec = bytes.data() + 84 + 50 * std::size_t(k) + 12; // skip stored normal
        Triangle t;
        Vec3 *v[3] = {&t.v0, &t.v1, &t.v2};
        for (int j = 0; j < 3; ++j)
            for (int c = 0; c < 3; ++c)
                (*v[j])[c] = static_cast<double>(load_f32le(rec + 12 * j + 4 * c));
        t.material = material;
        tris.push_back(t);
    }
    return Mesh(std::move(tris));
}

std::string write_stl(const Mesh &m, std::string_view header_text)
{
    std::string out(80, '\0');
    std::memcpy(out.data(), header_text.data(), std::min<std::size_t>(header_text.size(), 80));
    // A binary header must not start with "solid" or readers misdetect it as ASCII.
    if (out.compare(0, 5, "solid") == 0)
        out[0] = 'S';
    store_u32le(out, static_cast<std::uint32_t>(m.size()));
    out.reserve(84 + 50 * m.size());
    for (const auto &t : m.triangles())
    {
        const Vec3 n = t.normal();
        for (int c = 0; c < 3; ++c)
            store_f32le(out, static_cast<float>(n[c]));
        for (const Vec3 *v : {&t.v0, &t.v1, &t.v2})
            for (int c = 0; c < 3; ++c)
                store_f32le(out, static_cast<float>((*v)[c]));
        out.push_back('\0');
        out.push_back('\0');
    }
    return out;
}

Mesh read_stl_file(const std::string &path, MaterialId material)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("Cannot open STL file '" + path + "'.");
    std::ostringstream ss;
    ss << in.rdbuf();
    try
    {
        return parse_stl(ss.str(), material);
    }
    catch (const std::exception &e)
    {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_stl_file(const std::string &path, const Mesh &m)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("Cannot open '" + path + "' for writing.");
    const std::string bytes = write_stl(m);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("Failed writing STL file '" + path + "'.");
}

// ---- Ray casting -------------------------------------------------------

std::optional<double> intersect_triangle(const Ray &ray, const Triangle &tri)
{
    const Vec3 e1 = tri.v1 - tri.v0;
    const Vec3 e2 = tri.v2 - tri.v0;
    const Vec3 p = ray.dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-15)
        return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = ray.origin - tri.v0;
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0)
        return std::nullopt;
    const Vec3 q = s.cross(e1);
    const double v = ray.dir.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0)
        return std::nullopt;
    return e2.dot(q) * inv;
}

std::optional<Hit> ray_intersect(const Ray &ray, std::span<const SceneObject> objects, double t_max,
                                 std::span<const std::size_t> skip)
{
    std::optional<Hit> best;
    double best_t = t_max;
    for (std::size_t o = 0; o < objects.size(); ++o)
    {
        if (std::find(skip.begin(), skip.end(), o) != skip.end())
            continue;
        const auto &tris = objects[o].mesh.triangles();
        for (std::size_t k = 0; k < tris.size(); ++k)
        {
            const auto t = intersect_triangle(ray, tris[k]);
            if (t && *t > kRayEpsilon && *t < best_t)
            {
                best_t = *t;
                best = Hit{*t, o, k, ray.origin + *t * ray.dir};
            }
        }
    }
    return best;
}

bool segment_clear(const Vec3 &a, const Vec3 &b, std::span<const SceneObject> objects,
                   std::span<const std::size_t> skip)
{
    const Vec3 d = b - a;
    const double len = d.norm();
    if (len <= 2.0 * kRayEpsilon)
        return true;
    return !ray_intersect(Ray{a, d / len}, objects, len - kRayEpsilon, skip).has_value();
}

} // namespace vabm
