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

#include "vabm/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace vabm
{

using Json = nlohmann::ordered_json;

namespace
{

BoxEntry to_box(const BoundingBox &b, double score) { return BoxEntry{b.u_min, b.v_min, b.u_max, b.v_max, score}; }

double finite(double x, const char *field)
{
    if (!std::isfinite(x))
        throw DatasetError(std::string("non-finite value in field '") + field + "'");
    return x;
}

Json box_json(const std::optional<BoxEntry> &b, const char *score_key)
{
    if (!b)
        return nullptr;
    return Json{{"u_min", finite(b->u_min, "u_min")},
                {"v_min", finite(b->v_min, "v_min")},
                {"u_max", finite(b->u_max, "u_max")},
                {"v_max", finite(b->v_max, "v_max")},
                {score_key, finite(b->score, score_key)}};
}

Json record_json(const DatasetRecord &r)
{
    Json paths = Json::array();
    for (const auto &p : r.paths)
        paths.push_back(Json{{"gain_db", finite(p.gain_db, "gain_db")},
                             {"phase_deg", finite(p.phase_deg, "phase_deg")},
                             {"delay_ns", finite(p.delay_ns, "delay_ns")},
                             {"aod_az_deg", finite(p.aod_az_deg, "aod_az_deg")},
                             {"aod_el_deg", finite(p.aod_el_deg, "aod_el_deg")},
                             {"aoa_az_deg", finite(p.aoa_az_deg, "aoa_az_deg")},
                             {"aoa_el_deg", finite(p.aoa_el_deg, "aoa_el_deg")},
                             {"bounces", p.bounces},
                             {"length_m", finite(p.length_m, "length_m")}});
    Json snr = Json::array();
    for (const auto &s : r.snr_db)
        snr.push_back(s ? Json(finite(*s, "snr_db")) : Json(nullptr));

    Json j;
    j["frame"] = r.frame;
    j["bs"] = r.bs;
    j["ue"] = r.ue;
    j["position"] = {finite(r.position[0], "position"), finite(r.position[1], "position"),
                     finite(r.position[2], "position")};
    j["active"] = r.active ? 1 : 0;
    j["true_angle_deg"] = finite(r.true_angle_deg, "true_angle_deg");
    j["bbox"] = box_json(r.bbox, "visibility");
    j["detection"] = box_json(r.detection, "confidence");
    j["paths"] = std::move(paths);
    j["snr_db"] = std::move(snr);
    j["optimal_index"] = r.optimal_index ? Json(*r.optimal_index) : Json("outage");
    j["predicted_index"] = r.predicted_index ? Json(*r.predicted_index) : Json(nullptr);
    j["predicted_angle_deg"] =
        r.predicted_angle_deg ? Json(finite(*r.predicted_angle_deg, "predicted_angle_deg")) : Json(nullptr);
    return j;
}

std::optional<BoxEntry> box_from(const Json &j, const char *score_key)
{
    if (j.is_null())
        return std::nullopt;
    return BoxEntry{j.at("u_min").get<double>(), j.at("v_min").get<double>(), j.at("u_max").get<double>(),
                    j.at("v_max").get<double>(), j.at(score_key).get<double>()};
}

DatasetRecord record_from(const Json &j)
{
    DatasetRecord r;
    r.frame = j.at("frame").get<int>();
    r.bs = j.at("bs").get<std::string>();
    r.ue = j.at("ue").get<std::string>();
    const auto &pos = j.at("position");
    if (!pos.is_array() || pos.size() != 3)
        throw DatasetError("'position' must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i)
        r.position[i] = pos[i].get<double>();
    r.active = j.at("active").get<int>() == 1;
    r.true_angle_deg = j.at("true_angle_deg").get<double>();
    r.bbox = box_from(j.at("bbox"), "visibility");
    r.detection = box_from(j.at("detection"), "confidence");
    for (const auto &p : j.at("paths"))
        r.paths.push_back(PathEntry{p.at("gain_db").get<double>(), p.at("phase_deg").get<double>(),
                                    p.at("delay_ns").get<double>(), p.at("aod_az_deg").get<double>(),
                                    p.at("aod_el_deg").get<double>(), p.at("aoa_az_deg").get<double>(),
                                    p.at("aoa_el_deg").get<double>(), p.at("bounces").get<int>(),
                                    p.at("length_m").get<double>()});
    for (const auto &s : j.at("snr_db"))
        r.snr_db.push_back(s.is_null() ? std::nullopt : std::optional<double>(s.get<double>()));

    const auto &opt = j.at("optimal_index");
    if (opt.is_string())
    {
        if (opt.get<std::string>() != "outage")
            throw DatasetError("'optimal_index' must be an integer or \"outage\"");
    }
    else
    {
        r.optimal_index = opt.get<int>();
    }
    if (const auto &p = j.at("predicted_index"); !p.is_null())
        r.predicted_index = p.get<int>();
    if (const auto &a = j.at("predicted_angle_deg"); !a.is_null())
        r.predicted_angle_deg = a.get<double>();
    return r;
}

} // namespace

std::vector<DatasetRecord> to_dataset_records(std::span<const FrameRecord> frames)
{
    std::vector<DatasetRecord> out;
    for (const auto &f : frames)
        for (const auto &l : f.links)
        {
            DatasetRecord r;
            r.frame = f.frame;
            r.bs = l.bs;
            r.ue = l.ue;
            r.position = {l.ue_position.x(), l.ue_position.y(), l.ue_position.z()};
            r.active = l.active;
            r.true_angle_deg = l.true_angle_deg;
            if (l.truth_bbox)
                r.bbox = to_box(*l.truth_bbox, l.truth_bbox->visibility);
            if (l.detection)
                r.detection = to_box(l.detection->bbox, l.detection->confidence);
            for (const auto &p : l.paths)
                r.paths.push_back(PathEntry{20.0 * std::log10(std::abs(p.gain)), rad2deg(std::arg(p.gain)),
                                            p.delay_s * 1e9, p.aod_az_deg, p.aod_el_deg, p.aoa_az_deg, p.aoa_el_deg,
                                            p.bounces, p.length_m});
            for (double s : l.beam_snr_db)
                r.snr_db.push_back(std::isfinite(s) ? std::optional<double>(s) : std::nullopt);
            r.optimal_index = l.optimal_index;
            r.predicted_index = l.predicted_index;
            r.predicted_angle_deg = l.predicted_angle_deg;
            out.push_back(std::move(r));
        }
    return out;
}

std::string encode_dataset(DatasetHeader header, std::span<const DatasetRecord> records)
{
    header.records = records.size();
    Json h;
    h["schema"] = kDatasetSchema;
    h["version"] = kDatasetVersion;
    h["seed"] = header.seed;
    h["pixel_sigma"] = finite(header.pixel_sigma, "pixel_sigma");
    h["miss_prob"] = finite(header.miss_prob, "miss_prob");
    h["frames"] = header.frames;
    h["codebook_size"] = header.codebook_size;
    h["records"] = header.records;

    std::string out = h.dump() + '\n';
    for (const auto &r : records)
    {
        out += record_json(r).dump();
        out += '\n';
    }
    return out;
}

std::size_t export_records(const std::string &path, DatasetHeader header, std::span<const DatasetRecord> records)
{
    const std::string text = encode_dataset(header, records);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DatasetError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out)
        throw DatasetError("write failed for '" + path + "'");
    return records.size();
}

Dataset decode_dataset(const std::string &text)
{
    Dataset ds;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        try
        {
            const Json j = Json::parse(line);
            if (!have_header)
            {
                if (j.value("schema", std::string()) != kDatasetSchema)
                    throw DatasetError("missing dataset header");
                const int version = j.at("version").get<int>();
                if (version != kDatasetVersion)
                    throw DatasetError("unsupported dataset version " + std::to_string(version));
                ds.header.seed = j.at("seed").get<std::uint64_t>();
                ds.header.pixel_sigma = j.at("pixel_sigma").get<double>();
                ds.header.miss_prob = j.at("miss_prob").get<double>();
                ds.header.frames = j.at("frames").get<int>();
                ds.header.codebook_size = j.at("codebook_size").get<int>();
                ds.header.records = j.at("records").get<std::size_t>();
                have_header = true;
                continue;
            }
            ds.records.push_back(record_from(j));
        }
        catch (const Json::exception &e)
        {
            throw DatasetError("line " + std::to_string(lineno) + ": " + e.what());
        }
        catch (const DatasetError &e)
        {
            throw DatasetError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_header)
        throw DatasetError("empty dataset");
    if (ds.records.size() != ds.header.records)
        throw DatasetError("header announces " + std::to_string(ds.header.records) + " records, found " +
                           std::to_string(ds.records.size()));
    return ds;
}

Dataset import_records(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatasetError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try
    {
        return decode_dataset(ss.str());
    }
    catch (const DatasetError &e)
    {
        throw DatasetError(path + ": " + e.what());
    }
}

int beam_rank(std::span<const std::optional<double>> snr_db, int index)
{
    const double ninf = -std::numeric_limits<double>::infinity();
    const double mine = snr_db[index].value_or(ninf);
    int rank = 0;
    for (int i = 0; i < static_cast<int>(snr_db.size()); ++i)
    {
        const double s = snr_db[i].value_or(ninf);
        if (s > mine || (s == mine && i < index))
            ++rank;
    }
    return rank;
}

Metrics evaluate(std::span<const DatasetRecord> records, int k)
{
    if (records.empty())
        throw std::invalid_argument("evaluate: no records.");
    if (k < 1)
        throw std::invalid_argument("evaluate: k must be >= 1.");

    Metrics m;
    m.records = records.size();
    m.k = k;
    std::size_t top1 = 0, topk = 0, outages = 0, visible = 0, detected = 0;
    std::vector<double> losses;
    for (const auto &r : records)
    {
        if (!r.active)
            continue;
        ++m.active;
        if (r.outage())
            ++outages;
        if (r.bbox)
        {
            ++visible;
            if (r.detection)
                ++detected;
        }
        if (!r.detection || r.outage())
            continue;
        ++m.eligible;

        const double best = *r.snr_db.at(*r.optimal_index);
        double achieved;
        if (r.predicted_index)
        {
            const int rank = beam_rank(r.snr_db, *r.predicted_index);
            top1 += rank == 0;
            topk += rank < k;
            achieved = r.snr_db.at(*r.predicted_index).value_or(-std::numeric_limits<double>::infinity());
        }
        else
        {
            achieved = std::numeric_limits<double>::infinity();
            for (const auto &s : r.snr_db)
                achieved = std::min(achieved, s.value_or(-std::numeric_limits<double>::infinity()));
        }
        losses.push_back(best - achieved);
    }

    if (m.eligible > 0)
    {
        m.top1 = static_cast<double>(top1) / m.eligible;
        m.topk = static_cast<double>(topk) / m.eligible;
        // Sorted so the sum does not depend on record order.
        std::sort(losses.begin(), losses.end());
        m.mean_snr_loss_db = std::accumulate(losses.begin(), losses.end(), 0.0) / m.eligible;
    }
    if (m.active > 0)
        m.outage_rate = static_cast<double>(outages) / m.active;
    if (visible > 0)
        m.detection_recall = static_cast<double>(detected) / visible;
    return m;
}

std::vector<SweepPoint> sweep_pixel_sigma(const World &w, const std::vector<FrameRecord> &traced,
                                          std::span<const double> sigmas, int seeds, std::uint64_t base_seed,
                                          double miss_prob)
{
    if (seeds < 1)
        throw std::invalid_argument("sweep_pixel_sigma: need at least one seed.");
    std::vector<SweepPoint> out;
    for (double sigma : sigmas)
    {
        SweepPoint pt;
        pt.pixel_sigma = sigma;
        pt.seeds = seeds;
        pt.min_top1 = std::numeric_limits<double>::infinity();
        pt.max_top1 = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (int i = 0; i < seeds; ++i)
        {
            const NoisyOracleDetector det(DetectorNoiseModel{sigma, miss_prob, base_seed + static_cast<std::uint64_t>(i)});
            const auto recs = to_dataset_records(redetect(w, traced, det));
            const double acc = evaluate(recs, 1).top1;
            sum += acc;
            pt.min_top1 = std::min(pt.min_top1, acc);
            pt.max_top1 = std::max(pt.max_top1, acc);
        }
        pt.mean_top1 = sum / seeds;
        out.push_back(pt);
    }
    return out;
}

} // namespace vabm
