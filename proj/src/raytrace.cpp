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

#include <algorithm>
#include <stdexcept>

namespace vabm
{

namespace
{
constexpr double kPlaneTol = 1e-9;
constexpr double kInsideTol = 1e-9;

bool point_in_triangle(const Vec3 &p, const Triangle &t)
{
    const Vec3 e0 = t.v1 - t.v0, e1 = t.v2 - t.v0, d = p - t.v0;
    const double a = e0.dot(e0), b = e0.dot(e1), c = e1.dot(e1);
    const double pd0 = d.dot(e0), pd1 = d.dot(e1);
    const double den = a * c - b * b;
    const double v = (c * pd0 - b * pd1) / den;
    const double w = (a * pd1 - b * pd0) / den;
    return v >= -kInsideTol && w >= -kInsideTol && v + w <= 1.0 + kInsideTol;
}

bool excluded(const std::vector<std::size_t> &ex, std::size_t object)
{
    return std::find(ex.begin(), ex.end(), object) != ex.end();
}
} // namespace

bool Facet::contains(const Vec3 &p) const
{
    return std::any_of(triangles.begin(), triangles.end(), [&p](const Triangle &t) { return point_in_triangle(p, t); });
}

TraceScene::TraceScene(std::vector<SceneObject> objects) : objects_(std::move(objects))
{
    for (std::size_t o = 0; o < objects_.size(); ++o)
    {
        const std::size_t first = facets_.size();
        for (const auto &tri : objects_[o].mesh.triangles())
        {
            const Vec3 n = tri.normal();
            const double offset = n.dot(tri.v0);
            auto it = std::find_if(facets_.begin() + static_cast<std::ptrdiff_t>(first), facets_.end(),
                                   [&](const Facet &f)
                                   {
                                       return f.material == tri.material && (f.normal - n).norm() < kPlaneTol &&
                                              std::abs(f.normal.dot(f.point) - offset) < kPlaneTol;
                                   });
            if (it == facets_.end())
                facets_.push_back(Facet{o, tri.v0, n, tri.material, {tri}});
            else
                it->triangles.push_back(tri);
        }
    }
}

PathComponent compute_path_component(std::span<const Vec3> chain, std::span<const MaterialId> materials,
                                     double carrier_ghz, const MaterialTable &table)
{
    if (chain.size() < 2)
        throw std::invalid_argument("compute_path_component: chain needs at least two points.");
    if (materials.size() != chain.size() - 2)
        throw std::invalid_argument("compute_path_component: need one material per reflection point.");
    if (!(carrier_ghz > 0.0))
        throw std::invalid_argument("compute_path_component: carrier frequency must be positive.");

    double length = 0.0;
    for (std::size_t i = 1; i < chain.size(); ++i)
    {
        const double seg = (chain[i] - chain[i - 1]).norm();
        if (!(seg > 0.0))
            throw std::invalid_argument("compute_path_component: zero-length segment.");
        length += seg;
    }

    double amp = 1.0;
    for (MaterialId m : materials)
        amp *= table.amplitude(m);

    const double lambda = wavelength_m(carrier_ghz);
    amp *= lambda / (4.0 * kPi * length);
    const double cycles = length / lambda;
    const double phase = -2.0 * kPi * (cycles - std::floor(cycles));

    PathComponent pc;
    pc.gain = std::polar(amp, phase);
    pc.length_m = length;
    pc.delay_s = length / kSpeedOfLight;
    pc.bounces = static_cast<int>(materials.size());

    const Vec3 dep = chain[1] - chain[0];
    const Vec3 arr = chain[chain.size() - 2] - chain.back();
    pc.aod_az_deg = azimuth_deg(dep);
    pc.aod_el_deg = elevation_deg(dep);
    pc.aoa_az_deg = azimuth_deg(arr);
    pc.aoa_el_deg = elevation_deg(arr);
    pc.points.assign(chain.begin(), chain.end());
    return pc;
}

namespace
{

struct Tracer
{
    const TraceScene &scene;
    const Vec3 &tx;
    const Vec3 &rx;
    const TraceOptions &opt;
    std::vector<PathComponent> out;

    std::vector<std::size_t> seq;
    std::vector<Vec3> images;

    bool clear(const Vec3 &a, const Vec3 &b) const { return segment_clear(a, b, scene.objects(), opt.exclude); }

    void complete()
    {
        const auto &facets = scene.facets();
        const std::size_t k = seq.size();
        const Facet &last = facets[seq.back()];
        if ((rx - last.point).dot(last.normal) <= kPlaneTol)
            return;

        std::vector<Vec3> chain(k + 2);
        chain.front() = tx;
        chain.back() = rx;
        Vec3 next = rx;
        for (std::size_t j = k; j-- > 0;)
        {
            const Facet &f = facets[seq[j]];
            const Vec3 &img = images[j + 1];
            const double den = (next - img).dot(f.normal);
            if (std::abs(den) < 1e-15)
                return;
            const double t = (f.point - img).dot(f.normal) / den;
            if (!(t > 0.0 && t < 1.0))
                return;
            const Vec3 p = img + t * (next - img);
            if (!f.contains(p))
                return;
            chain[j + 1] = p;
            next = p;
        }

        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            if (!clear(chain[i], chain[i + 1]))
                return;

        std::vector<MaterialId> mats;
        mats.reserve(k);
        for (std::size_t j : seq)
            mats.push_back(facets[j].material);
        out.push_back(compute_path_component(chain, mats, opt.carrier_ghz, opt.materials));
    }

    void descend(int depth)
    {
        const auto &facets = scene.facets();
        for (std::size_t f = 0; f < facets.size(); ++f)
        {
            if (!seq.empty() && seq.back() == f)
                continue;
            const Facet &fa = facets[f];
            if (excluded(opt.exclude, fa.object))
                continue;
            // The virtual source must face the reflecting side of the plane.
            if ((images.back() - fa.point).dot(fa.normal) <= kPlaneTol)
                continue;
            seq.push_back(f);
            images.push_back(mirror_point(images.back(), fa.point, fa.normal));
            complete();
            if (depth + 1 < opt.max_reflections)
                descend(depth + 1);
            images.pop_back();
            seq.pop_back();
        }
    }
};

} // namespace

std::vector<PathComponent> trace_paths(const TraceScene &scene, const Vec3 &tx, const Vec3 &rx, const TraceOptions &opt)
{
    if ((tx - rx).norm() <= 0.0)
        throw std::invalid_argument("trace_paths: transmitter and receiver coincide.");

    Tracer tr{scene, tx, rx, opt, {}, {}, {tx}};
    if (tr.clear(tx, rx))
    {
        const Vec3 los[2] = {tx, rx};
        tr.out.push_back(compute_path_component(los, {}, opt.carrier_ghz, opt.materials));
    }
    if (opt.max_reflections > 0)
        tr.descend(0);

    std::stable_sort(tr.out.begin(), tr.out.end(), [](const PathComponent &a, const PathComponent &b)
                     { return a.length_m != b.length_m ? a.length_m < b.length_m : a.bounces < b.bounces; });
    return std::move(tr.out);
}

} // namespace vabm
