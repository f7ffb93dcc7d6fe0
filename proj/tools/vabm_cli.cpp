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

// vabm command line: generate, evaluate, render, inspect, sweep.

#include "vabm/dataset.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace vabm;

namespace
{

struct NoiseArgs
{
    std::uint64_t seed = 0;
    double pixel_sigma = 0.0;
    double miss_prob = 0.0;
};

void add_noise_flags(CLI::App *cmd, NoiseArgs &n)
{
    cmd->add_option("--seed", n.seed, "Detector RNG seed")->capture_default_str();
    cmd->add_option("--pixel-sigma", n.pixel_sigma, "Std-dev of the bbox center jitter in pixels")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--miss-prob", n.miss_prob, "Probability of missing a visible UE")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
}

std::string frame_name(int frame, const std::string &bs)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%05d", frame);
    return "frame_" + std::string(buf) + "_" + bs + ".ppm";
}

std::size_t find_site(const World &w, const std::string &bs)
{
    if (bs.empty())
        return 0;
    for (std::size_t i = 0; i < w.sites().size(); ++i)
        if (w.sites()[i].config.name == bs)
            return i;
    throw std::invalid_argument("unknown bs '" + bs + "'");
}

void print_metrics(const Metrics &m)
{
    const std::string topk = "top" + std::to_string(m.k) + "_accuracy";
    std::printf("%-20s %zu\n", "records", m.records);
    std::printf("%-20s %zu\n", "active", m.active);
    std::printf("%-20s %zu\n", "eligible", m.eligible);
    std::printf("%-20s %.4f\n", "top1_accuracy", m.top1);
    std::printf("%-20s %.4f\n", topk.c_str(), m.topk);
    std::printf("%-20s %.4f\n", "mean_snr_loss_db", m.mean_snr_loss_db);
    std::printf("%-20s %.4f\n", "outage_rate", m.outage_rate);
    std::printf("%-20s %.4f\n", "detection_recall", m.detection_recall);
}

std::string metrics_json(const Metrics &m)
{
    nlohmann::ordered_json j;
    j["records"] = m.records;
    j["active"] = m.active;
    j["eligible"] = m.eligible;
    j["top1_accuracy"] = m.top1;
    j["k"] = m.k;
    j["topk_accuracy"] = m.topk;
    j["mean_snr_loss_db"] = m.mean_snr_loss_db;
    j["outage_rate"] = m.outage_rate;
    j["detection_recall"] = m.detection_recall;
    return j.dump(2);
}

std::string opt_int(const std::optional<int> &v, const char *none)
{
    return v ? std::to_string(*v) : std::string(none);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Vision-assisted mmWave beam management co-simulator"};
    app.require_subcommand(1);

    // generate
    auto *gen = app.add_subcommand("generate", "Simulate a scenario and write a JSON-lines dataset");
    std::string scenario_path, out_path, render_dir;
    NoiseArgs noise;
    int render_every = 0;
    unsigned threads = 1;
    gen->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", out_path, "Dataset output path")->required();
    add_noise_flags(gen, noise);
    gen->add_option("--render-every", render_every, "Write a PPM every N frames (0 disables)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    gen->add_option("--render-dir", render_dir, "Directory for frame renders (default: next to --out)");
    gen->add_option("--threads", threads, "Worker threads; output does not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // evaluate
    auto *eval = app.add_subcommand("evaluate", "Compute beam prediction metrics of a dataset");
    std::string dataset_path;
    bool as_json = false;
    int topk = 3;
    eval->add_option("dataset", dataset_path, "Dataset file")->required()->check(CLI::ExistingFile);
    eval->add_flag("--json", as_json, "Print machine-readable JSON");
    eval->add_option("--topk", topk, "k for top-k accuracy")->check(CLI::PositiveNumber)->capture_default_str();

    // render
    auto *render = app.add_subcommand("render", "Render one frame from a BS camera as PPM");
    int frame = 0;
    std::string bs_name, stl_path;
    render->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    render->add_option("--frame", frame, "Frame index")->required();
    render->add_option("--out", out_path, "PPM output path")->required();
    render->add_option("--bs", bs_name, "BS whose camera to use (default: first)");
    render->add_option("--stl", stl_path, "Also export the frame geometry as binary STL");
    add_noise_flags(render, noise);

    // inspect
    auto *inspect = app.add_subcommand("inspect", "Per-frame summary of a dataset");
    std::optional<int> only_frame;
    inspect->add_option("dataset", dataset_path, "Dataset file")->required()->check(CLI::ExistingFile);
    inspect->add_option("--frame", only_frame, "Show a single frame");

    // sweep
    auto *sweep = app.add_subcommand("sweep", "Top-1 accuracy versus detector pixel noise, as CSV");
    std::vector<double> sigmas{0.0, 2.0, 5.0, 10.0};
    int seeds = 20;
    sweep->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--sigmas", sigmas, "Pixel sigma grid")->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", seeds, "Seeds per sigma")->check(CLI::PositiveNumber)->capture_default_str();
    add_noise_flags(sweep, noise);
    sweep->add_option("--threads", threads, "Worker threads for the channel trace")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*gen)
        {
            const World world = load_world(scenario_path);
            const NoisyOracleDetector det({noise.pixel_sigma, noise.miss_prob, noise.seed});
            PipelineOptions opt;
            opt.detector = &det;
            opt.threads = threads;
            const auto frames = run_simulation(world, opt);
            const auto records = to_dataset_records(frames);

            DatasetHeader h;
            h.seed = noise.seed;
            h.pixel_sigma = noise.pixel_sigma;
            h.miss_prob = noise.miss_prob;
            h.frames = world.scenario().system.frames;
            h.codebook_size = world.scenario().system.codebook_size;
            const auto n = export_records(out_path, h, records);
            std::cout << "wrote " << n << " records to " << out_path << "\n";

            if (render_every > 0)
            {
                fs::path dir = render_dir.empty() ? fs::path(out_path).replace_extension("").concat("_frames")
                                                  : fs::path(render_dir);
                fs::create_directories(dir);
                int written = 0;
                for (const auto &rec : frames)
                {
                    if (rec.frame % render_every != 0)
                        continue;
                    for (std::size_t s = 0; s < world.sites().size(); ++s)
                    {
                        const auto path = dir / frame_name(rec.frame, world.sites()[s].config.name);
                        write_ppm_file(path.string(), render_frame(world, s, rec));
                        ++written;
                    }
                }
                std::cout << "wrote " << written << " renders to " << dir.string() << "\n";
            }
        }
        else if (*eval)
        {
            const auto ds = import_records(dataset_path);
            const auto m = evaluate(ds.records, topk);
            if (as_json)
                std::cout << metrics_json(m) << "\n";
            else
                print_metrics(m);
        }
        else if (*render)
        {
            const World world = load_world(scenario_path);
            const std::size_t site = find_site(world, bs_name);
            const NoisyOracleDetector det({noise.pixel_sigma, noise.miss_prob, noise.seed});
            PipelineOptions opt;
            opt.detector = &det;
            const auto rec = simulate_frame(world, frame, opt);
            write_ppm_file(out_path, render_frame(world, site, rec));
            std::cout << "wrote " << out_path << "\n";
            if (!stl_path.empty())
            {
                std::vector<Triangle> tris;
                for (const auto &obj : world.scene_at(frame))
                    tris.insert(tris.end(), obj.mesh.triangles().begin(), obj.mesh.triangles().end());
                write_stl_file(stl_path, Mesh(std::move(tris)));
                std::cout << "wrote " << stl_path << "\n";
            }
        }
        else if (*inspect)
        {
            const auto ds = import_records(dataset_path);
            std::printf("# seed=%llu pixel_sigma=%g miss_prob=%g frames=%d codebook_size=%d records=%zu\n",
                        static_cast<unsigned long long>(ds.header.seed), ds.header.pixel_sigma, ds.header.miss_prob,
                        ds.header.frames, ds.header.codebook_size, ds.header.records);
            std::printf("%6s %-8s %-8s %6s %9s %5s %8s %8s %9s\n", "frame", "bs", "ue", "active", "angle", "paths",
                        "optimal", "pred", "detected");
            for (const auto &r : ds.records)
            {
                if (only_frame && r.frame != *only_frame)
                    continue;
                std::printf("%6d %-8s %-8s %6d %9.3f %5zu %8s %8s %9s\n", r.frame, r.bs.c_str(), r.ue.c_str(),
                            r.active ? 1 : 0, r.true_angle_deg, r.paths.size(),
                            opt_int(r.optimal_index, "outage").c_str(), opt_int(r.predicted_index, "-").c_str(),
                            r.detection ? "yes" : "no");
            }
        }
        else if (*sweep)
        {
            const World world = load_world(scenario_path);
            PipelineOptions opt;
            opt.threads = threads;
            const auto traced = run_simulation(world, opt);
            const auto points = sweep_pixel_sigma(world, traced, sigmas, seeds, noise.seed, noise.miss_prob);
            std::cout << "pixel_sigma,mean_top1,min_top1,max_top1,seeds\n";
            for (const auto &p : points)
                std::printf("%g,%.6f,%.6f,%.6f,%d\n", p.pixel_sigma, p.mean_top1, p.min_top1, p.max_top1, p.seeds);
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
