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

#ifndef VABM_SCENARIO_HPP
#define VABM_SCENARIO_HPP

#include "vabm/geometry.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vabm
{

struct SystemParams
{
    int frames = 0;
    double fps = 30.0; // metadata only; the wireless path is indexed by frame
    double carrier_ghz = 0.0;
    int max_reflections = 2;
    int codebook_size = 0; // Q
    double tx_power_dbm = 0.0;
    double noise_power_dbm = 0.0;

    bool operator==(const SystemParams &) const = default;
};

// Amplitude reflection coefficients, frequency independent.
struct MaterialTable
{
    double metal = 0.95;
    double concrete = 0.60;
    double brick = 0.45;

    double amplitude(MaterialId m) const;

    bool operator==(const MaterialTable &) const = default;
};

struct ArrayConfig
{
    std::string name;
    int elements = 1;
    double spacing_wavelengths = 0.5;

    bool operator==(const ArrayConfig &) const = default;
};

struct CameraConfig
{
    int width_px = 1280;
    int height_px = 720;
    double hfov_deg = 90.0;
    Vec3 offset = Vec3::Zero(); // relative to the BS position
    double yaw_deg = 0.0;       // relative to the BS boresight
    double pitch_deg = 0.0;     // positive looks up

    bool operator==(const CameraConfig &) const = default;
};

struct BsConfig
{
    std::string name;
    Vec3 position = Vec3::Zero();
    double boresight_deg = 0.0; // world azimuth of the array normal
    std::string array;
    CameraConfig camera;

    bool operator==(const BsConfig &) const = default;
};

struct ReflectorConfig
{
    std::string name;
    std::string shape = "box";
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Zero();
    double yaw_deg = 0.0;
    std::string material;
    // STL geometry in the reflector's local frame; replaces the generated box when set.
    std::optional<std::string> mesh_path;

    bool operator==(const ReflectorConfig &) const = default;
};

struct FrameRange
{
    int first = 0;
    int last = 0; // inclusive

    bool contains(int frame) const { return frame >= first && frame <= last; }
    bool operator==(const FrameRange &) const = default;
};

struct UeConfig
{
    std::string name;
    Vec3 size = Vec3::Zero();
    std::string material;
    std::optional<std::string> array; // parsed and validated, unused by beam selection
    // nullopt: active in every frame. An empty list means never active.
    std::optional<std::vector<FrameRange>> active;
    std::vector<Keyframe> keyframes; // position of the box centroid

    bool operator==(const UeConfig &) const = default;
};

struct Scenario
{
    SystemParams system;
    MaterialTable materials;
    std::vector<ArrayConfig> arrays; // each collection sorted by name
    std::vector<BsConfig> bss;
    std::vector<ReflectorConfig> reflectors;
    std::vector<UeConfig> ues;

    const ArrayConfig *find_array(std::string_view name) const;
    const BsConfig *find_bs(std::string_view name) const;
    const UeConfig *find_ue(std::string_view name) const;

    bool operator==(const Scenario &) const = default;
};

class ScenarioError : public std::runtime_error
{
  public:
    ScenarioError(const std::string &what, int line = 0, int column = 0);
    int line() const { return line_; }
    int column() const { return column_; }

  private:
    int line_;
    int column_;
};

/**
 * Parses the sectioned scenario text format.
 *
 *     # comment
 *     [system]              frames, fps, carrier_ghz, max_reflections,
 *                           codebook_size, tx_power_dbm, noise_power_dbm
 *     [materials]           metal, concrete, brick (optional overrides)
 *     [array NAME]          elements, spacing_wavelengths
 *     [bs NAME]             position, boresight_deg, array, camera_*
 *     [reflector NAME]      shape, center, size, yaw_deg, material, mesh
 *     [ue NAME]             size, material, array, active, keyframe
 *
 * `keyframe = FRAME : X, Y, Z` and `active = A-B[, C-D...]` may repeat.
 * Collections are sorted by name, so section order never changes the result.
 * Syntax errors carry line/column; semantic violations are reported together.
 */
Scenario parse_scenario(std::string_view text);

Scenario load_scenario_file(const std::string &path);

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario &s);

/// Every invariant violation found; empty when the scenario is valid.
std::vector<std::string> validate_scenario(const Scenario &s);

/// True if `ue` is scheduled active at `frame`.
bool is_active(const UeConfig &ue, int frame);

} // namespace vabm

#endif // VABM_SCENARIO_HPP
