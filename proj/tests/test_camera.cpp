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
#include "vabm/raytrace.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace vabm;
using Catch::Matchers::WithinAbs;

namespace
{

// Camera at 6 m height looking along +y, as a BS with boresight 90.
CameraModel street_cam(double hfov = 90.0) { return make_camera(1280, 720, hfov, Vec3(0, 0, 6), 90.0); }

SceneObject car(const Vec3 &c) { return {"car", ObjectKind::ue, box_mesh(c, Vec3(4.5, 1.8, 1.5), 0.0, MaterialId::metal)}; }

} // namespace

TEST_CASE("make_camera intrinsics")
{
    const auto cam = street_cam();
    CHECK_THAT(cam.fx, WithinAbs(640.0, 1e-9));
    CHECK(cam.fy == cam.fx);
    CHECK(cam.cx == 640.0);
    CHECK(cam.cy == 360.0);
    CHECK_THROWS(make_camera(0, 10, 90, Vec3::Zero(), 0));
    CHECK_THROWS(make_camera(10, 10, 180, Vec3::Zero(), 0));
}

TEST_CASE("project_point")
{
    const auto cam = street_cam();
    const auto on_axis = project_point(cam, Vec3(0, 5, 6));
    REQUIRE(on_axis);
    CHECK_THAT(on_axis->u, WithinAbs(cam.cx, 1e-12));
    CHECK_THAT(on_axis->v, WithinAbs(cam.cy, 1e-12));
    CHECK_THAT(on_axis->depth, WithinAbs(5.0, 1e-12));

    // 45 degrees to the right of the axis (camera right is +x here).
    const auto side = project_point(cam, Vec3(7, 7, 6));
    REQUIRE(side);
    CHECK_THAT(side->u, WithinAbs(cam.cx + cam.fx, 1e-9));

    // Below the axis maps to larger v.
    CHECK(project_point(cam, Vec3(0, 5, 0))->v > cam.cy);
    CHECK_FALSE(project_point(cam, Vec3(0, -1, 6)));
    CHECK_FALSE(project_point(cam, Vec3(3, -0.01, 6)));
}

TEST_CASE("project_bbox")
{
    const auto cam = street_cam();

    SECTION("centered UE")
    {
        // Eye-level box so the vertical extent is symmetric as well.
        const std::vector<SceneObject> scene{
            {"ue", ObjectKind::ue, box_mesh(Vec3(0, 20, 6), Vec3(4.5, 1.8, 1.5), 0.0, MaterialId::metal)}};
        const auto box = project_bbox(cam, scene, 0);
        REQUIRE(box);
        CHECK(box->visibility == 1.0);
        CHECK(std::abs(box->center_u() - cam.cx) < 1.0);
        CHECK(std::abs(box->center_v() - cam.cy) < 1.0);
        CHECK(box->ue_name == "ue");
    }

    SECTION("outside the field of view")
    {
        const std::vector<SceneObject> scene{car(Vec3(-40, 5, 0.75))};
        CHECK_FALSE(project_bbox(cam, scene, 0));
    }

    SECTION("behind a slab, consistent with the ray tracer")
    {
        const std::vector<SceneObject> scene{
            {"slab", ObjectKind::reflector, box_mesh(Vec3(0, 10, 5), Vec3(30, 0.5, 10), 0.0, MaterialId::concrete)},
            car(Vec3(0, 20, 0.75))};
        CHECK_FALSE(project_bbox(cam, scene, 1));
        TraceOptions opt;
        opt.exclude = {1};
        CHECK(trace_paths(TraceScene(scene), cam.position, Vec3(0, 20, 0.75), opt).empty());
    }

    SECTION("partly hidden")
    {
        const std::vector<SceneObject> scene{
            {"post", ObjectKind::reflector, box_mesh(Vec3(-1.5, 10, 5), Vec3(1.5, 0.5, 10), 0.0, MaterialId::metal)},
            car(Vec3(0, 20, 0.75))};
        const auto box = project_bbox(cam, scene, 1);
        REQUIRE(box);
        CHECK(box->visibility > 0.0);
        CHECK(box->visibility < 1.0);
    }
}

TEST_CASE("bbox center agrees with the LOS departure angle")
{
    // The box center and the centroid drift apart with object size over range; the
    // 0.5 degree budget holds from 5 m for UEs up to 1.8 m across and from 20 m for cars.
    const auto cam = street_cam();
    struct Case
    {
        Vec3 size;
        double min_range;
    };
    const Case cases[] = {{Vec3(1.8, 1.8, 1.5), 5.0}, {Vec3(0.5, 0.5, 1.8), 5.0}, {Vec3(4.5, 1.8, 1.5), 20.0}};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-40, 40), uy(2, 60);
    for (const auto &c : cases)
    {
        int checked = 0;
        for (int k = 0; k < 3000; ++k)
        {
            const Vec3 p(ux(rng), uy(rng), 0.5 * c.size.z());
            if ((p - cam.position).head<2>().norm() < c.min_range)
                continue;
            const std::vector<SceneObject> scene{{"ue", ObjectKind::ue, box_mesh(p, c.size, 0.0, MaterialId::metal)}};
            const auto box = project_bbox(cam, scene, 0);
            if (!box || box->visibility < 1.0)
                continue;
            TraceOptions opt;
            opt.exclude = {0};
            const auto paths = trace_paths(TraceScene(scene), cam.position, p, opt);
            REQUIRE(paths.size() == 1);
            const double from_pixels = pixel_to_azimuth(cam, 90.0, box->center_u());
            const double from_path = array_angle_deg(paths[0].aod_az_deg, 90.0);
            CHECK(std::abs(from_pixels - from_path) <= 0.5);
            ++checked;
        }
        CHECK(checked > 100);
    }
}

TEST_CASE("pixel_to_azimuth")
{
    const auto cam = street_cam();
    CHECK_THAT(pixel_to_world_azimuth(cam, cam.cx), WithinAbs(90.0, 1e-12));
    CHECK_THAT(pixel_to_azimuth(cam, 90.0, cam.cx), WithinAbs(90.0, 1e-12));
    CHECK_THAT(pixel_to_azimuth(cam, 90.0, cam.cx + cam.fx), WithinAbs(135.0, 1e-9));
    CHECK_THAT(pixel_to_azimuth(cam, 90.0, cam.cx - cam.fx), WithinAbs(45.0, 1e-9));

    // A camera yawed away from the boresight still reports array angles.
    const auto turned = make_camera(640, 480, 60, Vec3::Zero(), 120.0);
    CHECK_THAT(pixel_to_azimuth(turned, 90.0, turned.cx), WithinAbs(60.0, 1e-12));
}

TEST_CASE("pixel_to_azimuth inverts project_point")
{
    const auto cam = street_cam();
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> az(-44.0, 44.0), r(2.0, 100.0);
    for (int k = 0; k < 500; ++k)
    {
        const double a = 90.0 + az(rng);
        const Vec3 p = cam.position + r(rng) * Vec3(std::cos(deg2rad(a)), std::sin(deg2rad(a)), 0.0);
        const auto px = project_point(cam, p);
        REQUIRE(px);
        CHECK_THAT(pixel_to_azimuth(cam, 90.0, px->u), WithinAbs(array_angle_deg(a, 90.0), 1e-9));
    }
}

TEST_CASE("narrower field of view sees a subset of UEs")
{
    std::vector<SceneObject> scene;
    for (int i = 0; i < 41; ++i)
        scene.push_back(car(Vec3(-100 + 5 * i, 25, 6.0))); // at camera height
    auto seen = [&scene](double hfov)
    {
        std::vector<std::size_t> out;
        const auto cam = street_cam(hfov);
        for (std::size_t i = 0; i < scene.size(); ++i)
            if (project_bbox(cam, scene, i))
                out.push_back(i);
        return out;
    };
    std::vector<std::size_t> prev = seen(120.0);
    for (double hfov : {90.0, 60.0, 30.0, 10.0})
    {
        const auto now = seen(hfov);
        CHECK(now.size() < prev.size());
        CHECK(std::includes(prev.begin(), prev.end(), now.begin(), now.end()));
        prev = now;
    }
}

TEST_CASE("render_debug_frame")
{
    const auto cam = make_camera(160, 90, 90, Vec3(0, 0, 6), 90.0);

    SECTION("empty scene is background")
    {
        const Image img = render_debug_frame({}, cam);
        REQUIRE(img.rgb.size() == 160u * 90u * 3u);
        for (int y = 0; y < 90; y += 7)
            for (int x = 0; x < 160; x += 9)
                CHECK(img.at(x, y) == kBackground);
    }

    SECTION("UE and overlay")
    {
        const std::vector<SceneObject> scene{car(Vec3(0, 20, 0.75))};
        const auto box = project_bbox(cam, scene, 0);
        REQUIRE(box);
        const Overlay ov[] = {{*box, 2}};
        const Image img = render_debug_frame(scene, cam, ov);
        const int x = static_cast<int>(box->center_u());
        CHECK(img.at(x, static_cast<int>(std::floor(box->v_min))) == kUePalette[2]);
        CHECK(img.at(static_cast<int>(std::floor(box->u_min)), static_cast<int>(box->center_v())) == kUePalette[2]);
        CHECK_FALSE(img.at(x, static_cast<int>(box->center_v())) == kBackground);
        CHECK(img.at(x, 2) == kBackground);

        CHECK(encode_ppm(img) == encode_ppm(render_debug_frame(scene, cam, ov)));
        CHECK(encode_ppm(img).rfind("P6\n160 90\n255\n", 0) == 0);
    }
}
