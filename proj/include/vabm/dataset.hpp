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

#ifndef VABM_DATASET_HPP
#define VABM_DATASET_HPP

// JSON-lines dataset: one header line, then one object per (frame, BS, UE) link.
// See docs/dataset-format.md for the field list.

#include "vabm/pipeline.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vabm
{

inline constexpr const char *kDatasetSchema = "vabm-dataset";
inline constexpr int kDatasetVersion = 1;

struct DatasetError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct DatasetHeader
{
    std::uint64_t seed = 0;
    double pixel_sigma = 0.0;
    double miss_prob = 0.0;
    int frames = 0;
    int codebook_size = 0;
    std::size_t records = 0; // filled in by export_records

    bool operator==(const DatasetHeader &) const = default;
};

struct PathEntry
{
    double gain_db = 0.0;
    double phase_deg = 0.0;
    double delay_ns = 0.0;
    double aod_az_deg = 0.0, aod_el_deg = 0.0;
    double aoa_az_deg = 0.0, aoa_el_deg = 0.0;
    int bounces = 0;
    double length_m = 0.0;

    bool operator==(const PathEntry &) const = default;
};

struct BoxEntry
{
    double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;
    double score = 0.0; // visibility for truth boxes, confidence for detections

    bool operator==(const BoxEntry &) const = default;
};

/// Serialized form of one LinkRecord. Missing values are nullopt; a beam with no
/// received power has no SNR entry.
struct DatasetRecord
{
    int frame = 0;
    std::string bs, ue;
    std::array<double, 3> position{};
    bool active = false;
    double true_angle_deg = 0.0;
    std::optional<BoxEntry> bbox;
    std::optional<BoxEntry> detection;
    std::vector<PathEntry> paths;
    std::vector<std::optional<double>> snr_db;
    std::optional<int> optimal_index; // nothing is written as "outage"
    std::optional<int> predicted_index;
    std::optional<double> predicted_angle_deg;

    bool outage() const { return !optimal_index.has_value(); }
    bool operator==(const DatasetRecord &) const = default;
};

std::vector<DatasetRecord> to_dataset_records(std::span<const FrameRecord> frames);

/// Writes the header and the records, returns the number of records written.
/// Throws DatasetError naming the path on I/O failure.
std::size_t export_records(const std::string &path, DatasetHeader header, std::span<const DatasetRecord> records);
std::string encode_dataset(DatasetHeader header, std::span<const DatasetRecord> records);

struct Dataset
{
    DatasetHeader header;
    std::vector<DatasetRecord> records;
};

Dataset import_records(const std::string &path);
Dataset decode_dataset(const std::string &text);

struct Metrics
{
    std::size_t records = 0;
    std::size_t active = 0;
    std::size_t eligible = 0; // active, detected, not in outage
    double top1 = 0.0;
    int k = 3;
    double topk = 0.0;
    double mean_snr_loss_db = 0.0;
    double outage_rate = 0.0;      // over active links
    double detection_recall = 0.0; // detected over active links with a visible truth box

    bool operator==(const Metrics &) const = default;
};

/// Accuracy and loss over eligible links. A detected link without a predicted beam
/// counts as a miss and is charged against the weakest beam. Throws on empty input.
Metrics evaluate(std::span<const DatasetRecord> records, int k = 3);

/// Rank of beam `index` in the sweep (0 is best; ties go to the lower index).
int beam_rank(std::span<const std::optional<double>> snr_db, int index);

struct SweepPoint
{
    double pixel_sigma = 0.0;
    double mean_top1 = 0.0;
    double min_top1 = 0.0, max_top1 = 0.0;
    int seeds = 0;
};

/// Mean top-1 accuracy per sigma over `seeds` detector seeds (base_seed, base_seed+1, ...).
/// The channels in `traced` are reused; only detection is redone.
std::vector<SweepPoint> sweep_pixel_sigma(const World &w, const std::vector<FrameRecord> &traced,
                                          std::span<const double> sigmas, int seeds, std::uint64_t base_seed,
                                          double miss_prob = 0.0);

} // namespace vabm

#endif // VABM_DATASET_HPP
