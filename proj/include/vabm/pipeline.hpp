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

#ifndef VABM_PIPELINE_HPP
#define VABM_PIPELINE_HPP

#include "vabm/camera.hpp"
#include "vabm/channel.hpp"
#include "vabm/raytrace.hpp"
#include "vabm/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vabm
{

// ---- Activity gate -----------------------------------------------------

struct ActivityState
{
    std::string ue_name;
    int frame = 0;
    int state = 1; // 1 active, 0 inactive
};

/// Decides whether a UE is in active communication at a frame.
class ActivityClassifier
{
  public:
    virtual ~ActivityClassifier() = default;
    virtual int classify(const Scenario &s, const UeConfig &ue, int frame) const = 0;
};

/// Ground truth from the scenario's `active` ranges.
class ScheduleClassifier final : public ActivityClassifier
{
  public:
    int classify(const Scenario &s, const UeConfig &ue, int frame) const override;
};

/// Schedule lookup. Throws std::invalid_argument for an unknown UE or a frame out of range.
ActivityState activity_state(const Scenario &s, std::string_view ue_name, int frame);

// ---- Detection ---------------------------------------------------------

struct Detection
{
    std::string ue_name;
    BoundingBox bbox;
    double confidence = 0.0;

    bool operator==(const Detection &) const = default;
};

struct DetectorNoiseModel
{
    double pixel_sigma = 0.0; // std-dev of the bbox center jitter, per axis
    double miss_prob = 0.0;
    std::uint64_t seed = 0;
};

/// Random stream for one (seed, frame, bs, ue) tuple; independent of evaluation order.
std::mt19937_64 stream_for(std::uint64_t seed, int frame, std::string_view bs, std::string_view ue);

/// Uniform in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64 &g);
/// Standard normal via Box-Muller; consumes two draws.
double standard_normal(std::mt19937_64 &g);

class Detector
{
  public:
    virtual ~Detector() = default;
    virtual std::vector<Detection> detect(std::span<const BoundingBox> truth, const CameraModel &cam, int frame,
                                          std::string_view bs) const = 0;
};

/// Reports every visible UE with its true box.
class OracleDetector final : public Detector
{
  public:
    std::vector<Detection> detect(std::span<const BoundingBox> truth, const CameraModel &cam, int frame,
                                  std::string_view bs) const override;
};

/// Drops each box with miss_prob, then jitters the box center by N(0, sigma^2) per axis
/// and clips to the image.
class NoisyOracleDetector final : public Detector
{
  public:
    explicit NoisyOracleDetector(DetectorNoiseModel model);
    std::vector<Detection> detect(std::span<const BoundingBox> truth, const CameraModel &cam, int frame,
                                  std::string_view bs) const override;
    const DetectorNoiseModel &model() const { return model_; }

  private:
    DetectorNoiseModel model_;
};

std::vector<Detection> detect(std::span<const BoundingBox> truth, const DetectorNoiseModel &model,
                              const CameraModel &cam, int frame, std::string_view bs = {});

// ---- Beam selection ----------------------------------------------------

struct BeamChoice
{
    std::optional<int> index; // nothing when the angle is behind the array
    double angle_deg = 0.0;   // array angle from the bbox horizontal center
};

BeamChoice select_beam(const Detection &det, const CameraModel &cam, double boresight_deg, const Codebook &cb);

// ---- World and per-frame simulation -----------------------------------

struct BsSite
{
    BsConfig config;
    ArrayConfig array;
    CameraModel camera;
    Codebook codebook;
    LinkBudget budget;
};

/// Immutable, fully resolved scenario: static meshes, trajectories, cameras and codebooks.
class World
{
  public:
    /// `base_dir` resolves relative reflector mesh paths.
    explicit World(Scenario s, const std::filesystem::path &base_dir = {});

    const Scenario &scenario() const { return scenario_; }
    const std::vector<BsSite> &sites() const { return sites_; }
    const std::vector<SceneObject> &static_objects() const { return static_; }

    Vec3 ue_position(std::size_t ue, int frame) const;
    std::size_t ue_object_index(std::size_t ue) const { return static_.size() + ue; }

    /// Static reflectors followed by the UE boxes at their frame positions.
    std::vector<SceneObject> scene_at(int frame) const;

  private:
    Scenario scenario_;
    std::vector<BsSite> sites_;
    std::vector<SceneObject> static_;
    std::vector<Trajectory> trajectories_;
};

World load_world(const std::string &scenario_path);

struct LinkRecord
{
    std::string bs, ue;
    Vec3 ue_position = Vec3::Zero();
    bool active = false;
    double true_angle_deg = 0.0; // array angle of the UE centroid seen from the BS
    std::optional<BoundingBox> truth_bbox;
    std::optional<Detection> detection;
    std::vector<PathComponent> paths;
    std::vector<double> beam_snr_db;
    std::optional<int> optimal_index; // nothing on outage
    std::optional<int> predicted_index;
    std::optional<double> predicted_angle_deg;

    bool outage() const { return paths.empty(); }
};

struct FrameRecord
{
    int frame = 0;
    std::vector<LinkRecord> links; // BS-major, then UE order
};

struct PipelineOptions
{
    const Detector *detector = nullptr;             // default: noiseless oracle
    const ActivityClassifier *activity = nullptr;   // default: schedule
    unsigned threads = 1;
};

/// One frame from a single snapshot of UE positions: visual truth, wireless truth,
/// and the pipeline's prediction.
FrameRecord simulate_frame(const World &w, int frame, const PipelineOptions &opt = {});

/// All frames in order. Output does not depend on `threads`.
std::vector<FrameRecord> run_simulation(const World &w, const PipelineOptions &opt = {});
std::vector<FrameRecord> run_simulation(const World &w, const DetectorNoiseModel &noise, unsigned threads = 1);

/// Re-runs detection and beam selection on existing records, reusing the traced channels.
std::vector<FrameRecord> redetect(const World &w, std::vector<FrameRecord> records, const Detector &detector);

/// Debug view from one BS camera with the record's detections outlined in the UE colors.
Image render_frame(const World &w, std::size_t site, const FrameRecord &rec);

} // namespace vabm

#endif // VABM_PIPELINE_HPP
