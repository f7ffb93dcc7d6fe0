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

#include "vabm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace vabm
{

// ---- Activity ----------------------------------------------------------

int ScheduleClassifier::classify(const Scenario &, const UeConfig &ue, int frame) const
{
    return is_active(ue, frame) ? 1 : 0;
}

ActivityState activity_state(const Scenario &s, std::string_view ue_name, int frame)
{
    const UeConfig *ue = s.find_ue(ue_name);
    if (!ue)
        throw std::invalid_argument("activity_state: unknown UE '" + std::string(ue_name) + "'.");
    if (frame < 0 || frame >= s.system.frames)
        throw std::invalid_argument("activity_state: frame " + std::to_string(frame) + " out of range.");
    return ActivityState{ue->name, frame, ScheduleClassifier{}.classify(s, *ue, frame)};
}

// ---- Random streams ----------------------------------------------------

namespace
{
std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
} // namespace

std::mt19937_64 stream_for(std::uint64_t seed, int frame, std::string_view bs, std::string_view ue)
{
    const std::uint64_t hb = fnv1a(bs), hu = fnv1a(ue);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(hb),
                      static_cast<std::uint32_t>(hb >> 32), static_cast<std::uint32_t>(hu),
                      static_cast<std::uint32_t>(hu >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64 &g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64 &g)
{
    const double u1 = 1.0 - uniform01(g); // (0, 1]
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// ---- Detectors ---------------------------------------------------------

std::vector<Detection> OracleDetector::detect(std::span<const BoundingBox> truth, const CameraModel &, int,
                                              std::string_view) const
{
    std::vector<Detection> out;
    out.reserve(truth.size());
    for (const auto &b : truth)
        out.push_back(Detection{b.ue_name, b, b.visibility});
    return out;
}

NoisyOracleDetector::NoisyOracleDetector(DetectorNoiseModel model) : model_(model)
{
    if (!(model_.pixel_sigma >= 0.0))
        throw std::invalid_argument("DetectorNoiseModel: pixel_sigma must be >= 0.");
    if (!(model_.miss_prob >= 0.0 && model_.miss_prob <= 1.0))
        throw std::invalid_argument("DetectorNoiseModel: miss_prob must be in [0, 1].");
}

std::vector<Detection> NoisyOracleDetector::detect(std::span<const BoundingBox> truth, const CameraModel &cam,
                                                   int frame, std::string_view bs) const
{
    std::vector<Detection> out;
    for (const auto &b : truth)
    {
        auto g = stream_for(model_.seed, frame, bs, b.ue_name);
        // Always draw all three variates so streams stay aligned across noise settings.
        const bool missed = uniform01(g) < model_.miss_prob;
        const double du = model_.pixel_sigma * standard_normal(g);
        const double dv = model_.pixel_sigma * standard_normal(g);
        if (missed)
            continue;
        BoundingBox j = b;
        j.u_min = std::clamp(b.u_min + du, 0.0, static_cast<double>(cam.width));
        j.u_max = std::clamp(b.u_max + du, 0.0, static_cast<double>(cam.width));
        j.v_min = std::clamp(b.v_min + dv, 0.0, static_cast<double>(cam.height));
        j.v_max = std::clamp(b.v_max + dv, 0.0, static_cast<double>(cam.height));
        out.push_back(Detection{b.ue_name, j, b.visibility});
    }
    return out;
}

std::vector<Detection> detect(std::span<const BoundingBox> truth, const DetectorNoiseModel &model,
                              const CameraModel &cam, int frame, std::string_view bs)
{
    return NoisyOracleDetector(model).detect(truth, cam, frame, bs);
}

BeamChoice select_beam(const Detection &det, const CameraModel &cam, double boresight_deg, const Codebook &cb)
{
    BeamChoice c;
    c.angle_deg = pixel_to_azimuth(cam, boresight_deg, det.bbox.center_u());
    c.index = cb.bin_of(c.angle_deg);
    return c;
}

// ---- World -------------------------------------------------------------

namespace
{
Mesh place_mesh(const Mesh &local, const Vec3 &center, double yaw_deg)
{
    const double c = std::cos(deg2rad(yaw_deg)), s = std::sin(deg2rad(yaw_deg));
    Eigen::Matrix3d rot;
    rot << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    std::vector<Triangle> tris = local.triangles();
    for (auto &t : tris)
    {
        t.v0 = center + rot * t.v0;
        t.v1 = center + rot * t.v1;
        t.v2 = center + rot * t.v2;
    }
    return Mesh(std::move(tris));
}
} // namespace

World::World(Scenario s, const std::filesystem::path &base_dir) : scenario_(std::move(s))
{
    const auto violations = validate_scenario(scenario_);
    if (!violations.empty())
    {
        std::string msg = "invalid scenario: " + violations.front();
        for (std::size_t i = 1; i < violations.size(); ++i)
            msg += "; " + violations[i];
        throw ScenarioError(msg);
    }

    const auto &sys = scenario_.system;
    for (const auto &bs : scenario_.bss)
    {
        const ArrayConfig &array = *scenario_.find_array(bs.array);
        sites_.push_back(BsSite{bs, array, make_camera(bs), generate_codebook(array, sys.codebook_size),
                                LinkBudget{sys.tx_power_dbm, sys.noise_power_dbm}});
    }

    for (const auto &r : scenario_.reflectors)
    {
        const MaterialId m = *material_from_string(r.material);
        if (r.mesh_path)
        {
            std::filesystem::path p(*r.mesh_path);
            if (p.is_relative())
                p = base_dir / p;
            static_.push_back(SceneObject{r.name, ObjectKind::reflector,
                                          place_mesh(read_stl_file(p.string(), m), r.center, r.yaw_deg)});
        }
        else
        {
            static_.push_back(SceneObject{r.name, ObjectKind::reflector, box_mesh(r.center, r.size, r.yaw_deg, m)});
        }
    }

    for (const auto &u : scenario_.ues)
        trajectories_.emplace_back(u.keyframes);
}

Vec3 World::ue_position(std::size_t ue, int frame) const { return interpolate_position(trajectories_.at(ue), frame); }

std::vector<SceneObject> World::scene_at(int frame) const
{
    std::vector<SceneObject> scene = static_;
    scene.reserve(static_.size() + scenario_.ues.size());
    for (std::size_t i = 0; i < scenario_.ues.size(); ++i)
    {
        const auto &u = scenario_.ues[i];
        scene.push_back(SceneObject{u.name, ObjectKind::ue,
                                    box_mesh(ue_position(i, frame), u.size, 0.0, *material_from_string(u.material))});
    }
    return scene;
}

World load_world(const std::string &scenario_path)
{
    return World(load_scenario_file(scenario_path), std::filesystem::path(scenario_path).parent_path());
}

// ---- Simulation --------------------------------------------------------

namespace
{

const OracleDetector kOracle;
const ScheduleClassifier kSchedule;

// Fills detection and prediction for the links of one BS.
void apply_detection(const BsSite &site, std::span<LinkRecord> links, const Detector &detector, int frame)
{
    std::vector<BoundingBox> truth;
    for (const auto &l : links)
        if (l.truth_bbox)
            truth.push_back(*l.truth_bbox);
    const auto dets = detector.detect(truth, site.camera, frame, site.config.name);

    for (auto &l : links)
    {
        l.detection.reset();
        l.predicted_index.reset();
        l.predicted_angle_deg.reset();
        const auto it = std::find_if(dets.begin(), dets.end(), [&l](const Detection &d) { return d.ue_name == l.ue; });
        if (it == dets.end())
            continue;
        l.detection = *it;
        if (!l.active)
            continue;
        const auto choice = select_beam(*it, site.camera, site.config.boresight_deg, site.codebook);
        l.predicted_angle_deg = choice.angle_deg;
        l.predicted_index = choice.index;
    }
}

} // namespace

FrameRecord simulate_frame(const World &w, int frame, const PipelineOptions &opt)
{
    const Scenario &s = w.scenario();
    if (frame < 0 || frame >= s.system.frames)
        throw std::invalid_argument("simulate_frame: frame " + std::to_string(frame) + " out of range.");
    const Detector &detector = opt.detector ? *opt.detector : kOracle;
    const ActivityClassifier &activity = opt.activity ? *opt.activity : kSchedule;

    // One snapshot feeds the camera and the ray tracer alike.
    const TraceScene scene(w.scene_at(frame));
    const auto &objects = scene.objects();

    FrameRecord rec;
    rec.frame = frame;
    for (const auto &site : w.sites())
    {
        const std::size_t first = rec.links.size();
        for (std::size_t u = 0; u < s.ues.size(); ++u)
        {
            const std::size_t obj = w.ue_object_index(u);
            LinkRecord l;
            l.bs = site.config.name;
            l.ue = s.ues[u].name;
            l.ue_position = w.ue_position(u, frame);
            l.active = activity.classify(s, s.ues[u], frame) == 1;
            l.true_angle_deg =
                array_angle_deg(azimuth_deg(l.ue_position - site.config.position), site.config.boresight_deg);
            l.truth_bbox = project_bbox(site.camera, objects, obj);

            TraceOptions topt;
            topt.max_reflections = s.system.max_reflections;
            topt.carrier_ghz = s.system.carrier_ghz;
            topt.materials = s.materials;
            topt.exclude = {obj};
            l.paths = trace_paths(scene, site.config.position, l.ue_position, topt);

            const ChannelVector h = build_channel(l.paths, site.array, site.config.boresight_deg);
            auto sweep = optimal_beam(h, site.codebook, site.budget);
            l.beam_snr_db = std::move(sweep.per_beam_db);
            l.optimal_index = sweep.index;
            rec.links.push_back(std::move(l));
        }
        apply_detection(site, std::span(rec.links).subspan(first), detector, frame);
    }
    return rec;
}

std::vector<FrameRecord> run_simulation(const World &w, const PipelineOptions &opt)
{
    const int frames = w.scenario().system.frames;
    std::vector<FrameRecord> out(static_cast<std::size_t>(frames));
    const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(frames)));
    if (threads == 1)
    {
        for (int f = 0; f < frames; ++f)
            out[f] = simulate_frame(w, f, opt);
        return out;
    }

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back(
            [&]()
            {
                for (int f = next++; f < frames; f = next++)
                {
                    try
                    {
                        out[f] = simulate_frame(w, f, opt);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                    }
                }
            });
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
    return out;
}

std::vector<FrameRecord> run_simulation(const World &w, const DetectorNoiseModel &noise, unsigned threads)
{
    const NoisyOracleDetector det(noise);
    PipelineOptions opt;
    opt.detector = &det;
    opt.threads = threads;
    return run_simulation(w, opt);
}

std::vector<FrameRecord> redetect(const World &w, std::vector<FrameRecord> records, const Detector &detector)
{
    for (auto &rec : records)
    {
        std::size_t first = 0;
        for (const auto &site : w.sites())
        {
            std::size_t last = first;
            while (last < rec.links.size() && rec.links[last].bs == site.config.name)
                ++last;
            apply_detection(site, std::span(rec.links).subspan(first, last - first), detector, rec.frame);
            first = last;
        }
    }
    return records;
}

Image render_frame(const World &w, std::size_t site, const FrameRecord &rec)
{
    const BsSite &s = w.sites().at(site);
    const auto &ues = w.scenario().ues;
    std::vector<Overlay> overlays;
    for (const auto &l : rec.links)
    {
        if (l.bs != s.config.name || !l.detection)
            continue;
        const auto it = std::find_if(ues.begin(), ues.end(), [&l](const UeConfig &u) { return u.name == l.ue; });
        overlays.push_back(Overlay{l.detection->bbox, static_cast<int>(it - ues.begin())});
    }
    const auto scene = w.scene_at(rec.frame);
    return render_debug_frame(scene, s.camera, overlays);
}

} // namespace vabm
