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

#include "vabm/raytrace.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace vabm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

SceneObject wall(const std::string &name, const Vec3 &center, const Vec3 &size, MaterialId m,
                 double yaw = 0.0)
{
    return {name, ObjectKind::reflector, box_mesh(center, size, yaw, m)};
}

// Metal wall whose front face is the plane y = 0.
TraceScene single_wall() { return TraceScene({wall("wall", Vec3(5, -0.5, 2), Vec3(40, 1, 20), MaterialId::metal)}); }

// Facet whose plane holds p and whose triangles contain it.
const Facet *facet_at(const TraceScene &scene, const Vec3 &p)
{
    for (const auto &f : scene.facets())
        if (std::abs((p - f.point).dot(f.normal)) < 1e-9 && f.contains(p))
            return &f;
    return nullptr;
}

void check_reflections(const TraceScene &scene, const PathComponent &path)
{
    REQUIRE(path.points.size() == static_cast<std::size_t>(path.bounces) + 2);
    for (int i = 1; i <= path.bounces; ++i)
    {
        const Vec3 &p = path.points[i];
        const Facet *f = facet_at(scene, p);
        REQUIRE(f != nullptr);
        const Vec3 in = (p - path.points[i - 1]).normalized();
        const Vec3 out = (path.points[i + 1] - p).normalized();
        const double inc = std::acos(std::clamp(-in.dot(f->normal), -1.0, 1.0));
        const double ref = std::acos(std::clamp(out.dot(f->normal), -1.0, 1.0));
        CHECK_THAT(inc, WithinAbs(ref, 1e-9));
        // Incoming ray, outgoing ray and normal are coplanar.
        CHECK_THAT(in.cross(out).dot(f->normal), WithinAbs(0.0, 1e-9));
    }
}

} // namespace

TEST_CASE("mirror_point")
{
    const Vec3 p(1, 2, 3);
    CHECK(mirror_point(p, Vec3::Zero(), Vec3::UnitZ()) == Vec3(1, 2, -3));
    CHECK(mirror_point(Vec3(4, 7, -1), Vec3(4, 0, 0), Vec3::UnitX()) == Vec3(4, 7, -1));
    const Vec3 twice = mirror_point(mirror_point(p, Vec3(4, 0, 0), Vec3::UnitX()), Vec3(4, 0, 0), Vec3::UnitX());
    CHECK((twice - p).norm() <= 1e-12);
}

TEST_CASE("compute_path_component: free-space LOS")
{
    const Vec3 chain[] = {Vec3::Zero(), Vec3(10, 0, 0)};
    const auto p = compute_path_component(chain, {}, 28.0);
    const double lambda = kSpeedOfLight / 28e9;
    CHECK_THAT(std::abs(p.gain), WithinRel(lambda / (4 * kPi * 10.0), 1e-12));
    CHECK_THAT(std::abs(p.gain), WithinRel(8.5203e-5, 1e-4));
    CHECK_THAT(20 * std::log10(std::abs(p.gain)), WithinAbs(-81.39, 0.005));
    CHECK_THAT(p.delay_s, WithinAbs(33.356e-9, 1e-12));
    CHECK(p.bounces == 0);
    CHECK(p.aod_az_deg == 0.0);
    CHECK_THAT(std::abs(p.aoa_az_deg), WithinAbs(180.0, 1e-12));

    const Vec3 far[] = {Vec3::Zero(), Vec3(20, 0, 0)};
    const auto q = compute_path_component(far, {}, 28.0);
    CHECK_THAT(20 * std::log10(std::abs(p.gain) / std::abs(q.gain)), WithinAbs(6.0206, 1e-4));
}

TEST_CASE("compute_path_component: one concrete bounce")
{
    const Vec3 chain[] = {Vec3(0, 5, 2), Vec3(5, 0, 2), Vec3(10, 5, 2)};
    const MaterialId mats[] = {MaterialId::concrete};
    const auto p = compute_path_component(chain, mats, 28.0);
    const double lambda = kSpeedOfLight / 28e9;
    CHECK_THAT(p.length_m, WithinAbs(14.142136, 1e-6));
    CHECK_THAT(std::abs(p.gain), WithinRel(0.60 * lambda / (4 * kPi * p.length_m), 1e-12));
    CHECK(p.bounces == 1);
    // Phase is -2 pi L / lambda modulo 2 pi.
    const double expect = -2 * kPi * std::fmod(p.length_m / lambda, 1.0);
    CHECK_THAT(std::remainder(std::arg(p.gain) - expect, 2 * kPi), WithinAbs(0.0, 1e-6));
}

TEST_CASE("compute_path_component: bad chains")
{
    const Vec3 one[] = {Vec3::Zero()};
    CHECK_THROWS(compute_path_component(one, {}, 28.0));
    const Vec3 zero[] = {Vec3::Zero(), Vec3::Zero()};
    CHECK_THROWS(compute_path_component(zero, {}, 28.0));
    const Vec3 two[] = {Vec3::Zero(), Vec3::UnitX()};
    const MaterialId extra[] = {MaterialId::metal};
    CHECK_THROWS(compute_path_component(two, extra, 28.0));
}

TEST_CASE("trace_paths: single wall")
{
    const TraceScene scene = single_wall();
    TraceOptions opt;
    opt.max_reflections = 1;
    const auto paths = trace_paths(scene, Vec3(0, 5, 2), Vec3(10, 5, 2), opt);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].bounces == 0);
    CHECK_THAT(paths[0].length_m, WithinAbs(10.0, 1e-12));
    CHECK(paths[1].bounces == 1);
    CHECK_THAT(paths[1].length_m, WithinAbs(14.142136, 1e-6));
    CHECK((paths[1].points[1] - Vec3(5, 0, 2)).norm() < 1e-9);
    check_reflections(scene, paths[1]);

    opt.max_reflections = 0;
    const auto los = trace_paths(scene, Vec3(0, 5, 2), Vec3(10, 5, 2), opt);
    REQUIRE(los.size() == 1);
    CHECK(los[0].bounces == 0);
}

TEST_CASE("trace_paths: opaque slab means outage")
{
    const TraceScene scene({wall("slab", Vec3(5, 0, 0), Vec3(1, 50, 50), MaterialId::concrete)});
    CHECK(trace_paths(scene, Vec3(0, 0, 0), Vec3(10, 0, 0), TraceOptions{}).empty());
}

TEST_CASE("trace_paths: excluded objects neither block nor reflect")
{
    const TraceScene scene({wall("slab", Vec3(5, 0, 0), Vec3(1, 2, 2), MaterialId::concrete)});
    TraceOptions opt;
    opt.exclude = {0};
    const auto paths = trace_paths(scene, Vec3(0, 0, 0), Vec3(10, 0, 0), opt);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].bounces == 0);
}

TEST_CASE("trace_paths: corner reflector gives the double-image path")
{
    // Walls on x = 0 and y = 0, both facing the first quadrant.
    const TraceScene scene({wall("wx", Vec3(-0.5, 10, 0), Vec3(1, 20, 10), MaterialId::metal),
                            wall("wy", Vec3(10, -0.5, 0), Vec3(20, 1, 10), MaterialId::metal)});
    const Vec3 tx(3, 4, 0), rx(6, 2, 0);
    const auto paths = trace_paths(scene, tx, rx, TraceOptions{});
    const Vec3 image = Vec3(-tx.x(), -tx.y(), tx.z());
    const auto it = std::find_if(paths.begin(), paths.end(), [](const auto &p) { return p.bounces == 2; });
    REQUIRE(it != paths.end());
    CHECK_THAT(it->length_m, WithinAbs((rx - image).norm(), 1e-9));
    for (const auto &p : paths)
        check_reflections(scene, p);
}

TEST_CASE("trace_paths: invariants on a cluttered scene")
{
    const TraceScene scene({wall("a", Vec3(-20, 10, 5), Vec3(10, 8, 10), MaterialId::concrete),
                            wall("b", Vec3(20, 12, 4), Vec3(8, 10, 8), MaterialId::brick, 20.0),
                            wall("c", Vec3(0, 35, 2), Vec3(12, 2.5, 4), MaterialId::metal),
                            wall("d", Vec3(3, 18, 0.75), Vec3(4.5, 1.8, 1.5), MaterialId::metal)});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-15, 15), uy(15, 32), uz(0.5, 3);
    int paths_seen = 0;
    for (int k = 0; k < 40; ++k)
    {
        const Vec3 tx(0, 0, 6), rx(ux(rng), uy(rng), uz(rng));
        const auto fwd = trace_paths(scene, tx, rx, TraceOptions{});
        const auto back = trace_paths(scene, rx, tx, TraceOptions{});
        REQUIRE(fwd.size() == back.size());
        for (std::size_t i = 0; i < fwd.size(); ++i)
        {
            ++paths_seen;
            const auto &p = fwd[i];
            CHECK(p.bounces <= 2);
            CHECK(std::abs(p.gain) > 0.0);
            CHECK_THAT(p.delay_s * kSpeedOfLight, WithinAbs(p.length_m, 1e-9));
            if (i > 0)
                CHECK((fwd[i - 1].length_m < p.length_m ||
                       (fwd[i - 1].length_m == p.length_m && fwd[i - 1].bounces <= p.bounces)));
            check_reflections(scene, p);

            // Reciprocity: same length, bounces and magnitude, with the angles swapped.
            const auto &q = back[i];
            CHECK_THAT(q.length_m, WithinAbs(p.length_m, 1e-9));
            CHECK(q.bounces == p.bounces);
            CHECK_THAT(std::abs(q.gain), WithinRel(std::abs(p.gain), 1e-9));
            CHECK_THAT(std::remainder(q.aod_az_deg - p.aoa_az_deg, 360.0), WithinAbs(0.0, 1e-9));
            CHECK_THAT(q.aod_el_deg, WithinAbs(p.aoa_el_deg, 1e-9));
        }
    }
    CHECK(paths_seen > 40);
}

TEST_CASE("trace_paths: gain falls with distance")
{
    const TraceScene scene = single_wall();
    TraceOptions opt;
    opt.max_reflections = 1;
    double last_los = 1.0, last_ref = 1.0;
    for (double x = 4.0; x <= 30.0; x += 2.0)
    {
        const auto paths = trace_paths(scene, Vec3(0, 5, 2), Vec3(x, 5, 2), opt);
        REQUIRE(paths.size() == 2);
        CHECK(std::abs(paths[0].gain) < last_los);
        CHECK(std::abs(paths[1].gain) < last_ref);
        last_los = std::abs(paths[0].gain);
        last_ref = std::abs(paths[1].gain);
    }
}

TEST_CASE("trace_paths: coincident endpoints are rejected")
{
    CHECK_THROWS(trace_paths(single_wall(), Vec3(1, 1, 1), Vec3(1, 1, 1), TraceOptions{}));
}
