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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <random>

using namespace vabm;
using Catch::Matchers::WithinAbs;

TEST_CASE("interpolate_position: linear between keyframes, clamped outside")
{
    const Trajectory t({{0, Vec3(0, 0, 0)}, {10, Vec3(10, 0, 0)}});
    CHECK(interpolate_position(t, 5) == Vec3(5, 0, 0));
    CHECK(interpolate_position(t, 0) == Vec3(0, 0, 0));
    CHECK(interpolate_position(Trajectory({{2, Vec3(1, 1, 0)}}), 9) == Vec3(1, 1, 0));
    CHECK(interpolate_position(Trajectory({{2, Vec3(1, 1, 0)}}), 0) == Vec3(1, 1, 0));
    CHECK(interpolate_position(t, 40) == Vec3(10, 0, 0));
}

TEST_CASE("Trajectory rejects empty and unsorted keyframes")
{
    CHECK_THROWS(Trajectory({}));
    CHECK_THROWS(Trajectory({{3, Vec3::Zero()}, {3, Vec3::Ones()}}));
    CHECK_THROWS(Trajectory({{5, Vec3::Zero()}, {1, Vec3::Ones()}}));
}

TEST_CASE("interpolate_position is continuous")
{
    const Trajectory t({{0, Vec3(0, 0, 0)}, {7, Vec3(14, 3, 0)}, {20, Vec3(-6, 3, 1)}, {21, Vec3(-6, 4, 1)}});
    // Largest per-frame step over adjacent keyframes.
    double bound = 0.0;
    const auto &k = t.keyframes();
    for (std::size_t i = 1; i < k.size(); ++i)
        bound = std::max(bound, (k[i].position - k[i - 1].position).norm() / (k[i].frame - k[i - 1].frame));
    for (int f = 0; f < 30; ++f)
        CHECK((interpolate_position(t, f + 1) - interpolate_position(t, f)).norm() <= bound + 1e-12);
}

TEST_CASE("box_mesh: unit cube")
{
    const Mesh m = box_mesh(Vec3::Zero(), Vec3::Ones(), 0.0, MaterialId::metal);
    REQUIRE(m.size() == 12);
    for (const auto &v : m.vertices())
        CHECK(v.cwiseAbs() == Vec3::Constant(0.5));
    CHECK(m.vertices().size() == 8);
}

TEST_CASE("box_mesh: normals point outwards")
{
    const Vec3 c(3, -2, 1);
    const Mesh m = box_mesh(c, Vec3(2, 3, 4), 37.0, MaterialId::brick);
    for (const auto &t : m.triangles())
        CHECK(t.normal().dot((t.v0 + t.v1 + t.v2) / 3.0 - c) > 0.0);
}

TEST_CASE("box_mesh: yaw 90 swaps x and y extents")
{
    const Mesh m = box_mesh(Vec3::Zero(), Vec3(2, 1, 1), 90.0, MaterialId::concrete);
    Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
    for (const auto &v : m.vertices())
    {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    CHECK_THAT(hi.x() - lo.x(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(hi.y() - lo.y(), WithinAbs(2.0, 1e-12));
    CHECK_THAT(hi.z() - lo.z(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("box_mesh: surface area matches 2(ab + bc + ca)")
{
    const double a = 2, b = 3, c = 4;
    const Mesh m = box_mesh(Vec3(1, 1, 1), Vec3(a, b, c), 23.0, MaterialId::concrete);
    double sum = 0.0;
    for (const auto &t : m.triangles())
        sum += t.area();
    CHECK_THAT(sum, WithinAbs(2 * (a * b + b * c + c * a), 1e-9));
    CHECK_THAT(m.surface_area(), WithinAbs(52.0, 1e-9));
}

TEST_CASE("box_mesh: vertex distances from the center do not depend on yaw")
{
    const Vec3 c(4, 5, 6);
    auto dists = [&c](double yaw)
    {
        std::vector<double> d;
        for (const auto &v : box_mesh(c, Vec3(2, 3, 4), yaw, MaterialId::metal).vertices())
            d.push_back((v - c).norm());
        std::sort(d.begin(), d.end());
        return d;
    };
    const auto ref = dists(0.0);
    for (double yaw : {13.0, 90.0, 181.0, -47.5})
    {
        const auto d = dists(yaw);
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK_THAT(d[i], WithinAbs(ref[i], 1e-12));
    }
}

TEST_CASE("Mesh rejects empty and degenerate input")
{
    CHECK_THROWS(Mesh({}));
    CHECK_THROWS(Mesh({Triangle{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}}));
}

TEST_CASE("STL: binary round trip of the unit cube")
{
    const Mesh m = box_mesh(Vec3::Zero(), Vec3::Ones(), 0.0, MaterialId::concrete);
    const Mesh back = parse_stl(write_stl(m), MaterialId::concrete);
    CHECK(back == m);
}

TEST_CASE("STL: binary round trip is bit-exact on vertex payloads")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> u(-1000.0f, 1000.0f);
    std::vector<Triangle> tris;
    while (tris.size() < 200)
    {
        Triangle t{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)),
                   MaterialId::metal};
        if (t.area() > 1e-6)
            tris.push_back(t);
    }
    const std::string bytes = write_stl(Mesh(tris));
    REQUIRE(bytes.size() == 84 + 50 * tris.size());
    const std::string again = write_stl(parse_stl(bytes, MaterialId::metal));
    // Compare the vertex payload of every record (skip the 12-byte normal).
    for (std::size_t i = 0; i < tris.size(); ++i)
        CHECK(std::memcmp(bytes.data() + 84 + 50 * i + 12, again.data() + 84 + 50 * i + 12, 36) == 0);
}

TEST_CASE("STL: ASCII single triangle")
{
    const std::string text = "solid t\n"
                             "  facet normal 0 0 1\n"
                             "    outer loop\n"
                             "      vertex 0 0 0\n"
                             "      vertex 1 0 0\n"
                             "      vertex 0 1 0\n"
                             "    endloop\n"
                             "  endfacet\n"
                             "endsolid t\n";
    const Mesh m = parse_stl(text, MaterialId::brick);
    REQUIRE(m.size() == 1);
    CHECK(m.triangles()[0].v0 == Vec3(0, 0, 0));
    CHECK(m.triangles()[0].v1 == Vec3(1, 0, 0));
    CHECK(m.triangles()[0].v2 == Vec3(0, 1, 0));
    CHECK(m.triangles()[0].material == MaterialId::brick);
}

TEST_CASE("STL: malformed input")
{
    const Mesh cube = box_mesh(Vec3::Zero(), Vec3::Ones(), 0.0, MaterialId::concrete);
    std::string bytes = write_stl(cube);
    bytes.resize(bytes.size() - 20);
    CHECK_THROWS_WITH(parse_stl(bytes), Catch::Matchers::ContainsSubstring("truncated"));

    CHECK_THROWS_WITH(parse_stl("hello"), Catch::Matchers::ContainsSubstring("Not an STL"));

    std::string empty(84, '\0');
    CHECK_THROWS_WITH(parse_stl(empty), Catch::Matchers::ContainsSubstring("no triangles"));
}

TEST_CASE("ray_intersect: examples")
{
    const std::vector<SceneObject> scene{
        {"cube", ObjectKind::reflector, box_mesh(Vec3(5, 0, 0), Vec3::Ones(), 0.0, MaterialId::concrete)}};
    const Ray ray{Vec3::Zero(), Vec3::UnitX()};
    const auto hit = ray_intersect(ray, scene, 100.0);
    REQUIRE(hit);
    CHECK_THAT(hit->t, WithinAbs(4.5, 1e-12));
    CHECK_THAT(hit->point.x(), WithinAbs(4.5, 1e-12));
    CHECK_FALSE(ray_intersect(ray, scene, 2.0));

    // Parallel to, and outside of, the top face.
    CHECK_FALSE(ray_intersect(Ray{Vec3(0, 0, 2), Vec3::UnitX()}, scene, 100.0));
    // Skipped objects are transparent.
    const std::size_t skip[] = {0};
    CHECK_FALSE(ray_intersect(ray, scene, 100.0, skip));
}

namespace
{
// Independent oracle: solve o + t d = v0 + b1 (v1 - v0) + b2 (v2 - v0) with a dense LU.
std::optional<double> lu_hit(const Ray &r, const Triangle &tri)
{
    Eigen::Matrix3d A;
    A.col(0) = -r.dir;
    A.col(1) = tri.v1 - tri.v0;
    A.col(2) = tri.v2 - tri.v0;
    if (std::abs(A.determinant()) < 1e-12)
        return std::nullopt;
    const Vec3 x = A.partialPivLu().solve(r.origin - tri.v0);
    if (x[1] < 0 || x[2] < 0 || x[1] + x[2] > 1)
        return std::nullopt;
    return x[0];
}
} // namespace

TEST_CASE("ray_intersect agrees with a brute-force scan on random rays")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<SceneObject> scene;
    for (int i = 0; i < 6; ++i)
        scene.push_back({"b" + std::to_string(i), ObjectKind::reflector,
                         box_mesh(Vec3(u(rng), u(rng), u(rng)), Vec3(1 + std::abs(u(rng)) / 3, 1 + std::abs(u(rng)) / 3,
                                                                      1 + std::abs(u(rng)) / 3),
                                  u(rng) * 18, MaterialId::concrete)});

    int hits = 0;
    for (int k = 0; k < 2000; ++k)
    {
        // Half of the rays aim near a random box so that hits are common.
        const Vec3 origin = Vec3(u(rng), u(rng), u(rng)) * 2.0;
        const Vec3 target = k % 2 ? scene[k % scene.size()].mesh.centroid() + 0.2 * Vec3(u(rng), u(rng), u(rng))
                                  : Vec3(u(rng), u(rng), u(rng));
        const Ray ray{origin, (target - origin).normalized()};
        const double t_max = 50.0;
        std::optional<std::pair<double, std::pair<std::size_t, std::size_t>>> best;
        for (std::size_t o = 0; o < scene.size(); ++o)
            for (std::size_t t = 0; t < scene[o].mesh.size(); ++t)
                if (const auto h = lu_hit(ray, scene[o].mesh.triangles()[t]); h && *h > kRayEpsilon && *h < t_max)
                    if (!best || *h < best->first)
                        best = {*h, {o, t}};

        const auto hit = ray_intersect(ray, scene, t_max);
        REQUIRE(hit.has_value() == best.has_value());
        if (!hit)
            continue;
        ++hits;
        CHECK_THAT(hit->t, WithinAbs(best->first, 1e-9));
        // On shared edges either neighbour is acceptable; compare the hit distance then.
        if (hit->object != best->second.first || hit->triangle != best->second.second)
            CHECK_THAT(lu_hit(ray, scene[hit->object].mesh.triangles()[hit->triangle]).value_or(-1.0),
                       WithinAbs(best->first, 1e-9));
    }
    CHECK(hits > 500);
}
