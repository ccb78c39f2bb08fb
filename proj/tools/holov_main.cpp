// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "holov/allocation.hpp"
#include "holov/analysis.hpp"
#include "holov/baselines.hpp"
#include "holov/core_model.hpp"
#include "holov/cost_model.hpp"
#include "holov/mask_io.hpp"
#include "holov/parallel.hpp"
#include "holov/prng.hpp"
#include "holov/tensor_io.hpp"
#include "spec_json.hpp"

namespace {

using namespace holov;
using holov::cli::ordered_json;

constexpr std::size_t kDefaultHidden = 4096;
constexpr std::size_t kDefaultFfn = 11008;
constexpr std::size_t kDefaultLayers = 32;

struct PruneArgs {
    std::string input;
    std::string out;
    std::string metrics_path;
    std::string method = "holov";
    std::string mode = "grid";
    long long retain = -1;
    double ratio = -1.0;
    double tau = 1.0;
    long long crops = -1;
    double gamma_floor = 1e-12;
    std::uint64_t seed = 0;
};

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string canonical_config(const PruneArgs& args, std::size_t n_v, std::size_t retain,
                             std::size_t crop_count) {
    std::ostringstream out;
    out << "method=" << args.method << ";n_v=" << n_v << ";retain=" << retain
        << ";tau=" << format_g(args.tau) << ";crops=" << crop_count << ";mode="
        << (args.mode == "blocks" ? "row_major_blocks" : "grid_tiles")
        << ";gamma_floor=" << format_g(args.gamma_floor) << ";seed=" << args.seed;
    return out.str();
}

void write_json(const std::string& path, const ordered_json& j) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    atomic_write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

PruneConfig config_from(const PruneArgs& args, std::size_t retain) {
    PruneConfig cfg;
    cfg.retain_count = retain;
    cfg.tau = static_cast<float>(args.tau);
    if (args.crops >= 0) cfg.crop_count = static_cast<std::size_t>(args.crops);
    cfg.partition_mode =
        args.mode == "blocks" ? PartitionMode::row_major_blocks : PartitionMode::grid_tiles;
    cfg.gamma_floor = static_cast<float>(args.gamma_floor);
    cfg.seed = args.seed;
    return cfg;
}

ordered_json flops_block(std::size_t n_v, std::size_t retain) {
    CostParams params;
    params.n = n_v;
    params.d = kDefaultHidden;
    params.m = kDefaultFfn;
    params.layers = kDefaultLayers;
    const double ratio = static_cast<double>(n_v - retain) / static_cast<double>(n_v);
    const auto reduction = flops_reduction(params, ratio);

    ordered_json j;
    j["pruned_n"] = reduction.pruned_n;
    j["exact_reduction"] = reduction.exact;
    j["approx_reduction"] = reduction.approx;
    j["prefill_full"] = prefill_flops(params);
    CostParams pruned = params;
    pruned.n = reduction.pruned_n;
    j["prefill_pruned"] = prefill_flops(pruned);
    j["decode_per_token_full"] = decode_flops_per_token(params, params.n);
    j["decode_per_token_pruned"] = decode_flops_per_token(params, reduction.pruned_n);
    return j;
}

int run_prune(const PruneArgs& args) {
    if ((args.retain < 0) == (args.ratio < 0.0))
        throw error("exactly one of --retain or --ratio is required");
    if (args.retain == 0) throw error("retain_count must be >= 1");

    const auto sets = load_tensors(args.input);
    if (sets.empty()) throw error("input container holds no token sets");

    MaskFile mask;
    mask.records.resize(sets.size());
    std::vector<ordered_json> images(sets.size());

    parallel_for(sets.size(), [&](std::size_t img) {
        const auto& [name, raw] = sets[img];
        const std::size_t n_v = raw.token_count();
        const std::size_t retain = args.retain >= 0
                                       ? static_cast<std::size_t>(args.retain)
                                       : retain_count_from_ratio(n_v, args.ratio);
        if (retain == 0) throw error("retain_count must be >= 1");
        if (retain > n_v) throw error("retain_count exceeds token count");

        const PruneConfig cfg = config_from(args, retain);
        const TokenSet normalized = raw.normalized ? raw : normalize_rows(raw);
        const CropPartition part = make_partition(normalized, cfg);

        std::vector<std::size_t> retained;
        if (args.method == "holov") {
            retained = prune(normalized, cfg).retained;
        } else if (args.method == "random") {
            retained = random_prune(normalized, retain, cfg.seed);
        } else {
            retained = attention_topk_prune(normalized, retain);
        }

        MaskRecord rec;
        rec.image_id = name;
        rec.n_v = n_v;
        rec.grid_h = raw.grid_h;
        rec.grid_w = raw.grid_w;
        rec.retain_count = retain;
        rec.retained = retained;
        rec.method = args.method;
        rec.config_digest = config_digest(canonical_config(args, n_v, retain, part.crop_count));

        ordered_json m;
        m["image"] = name;
        m["n_v"] = n_v;
        m["grid"] = {raw.grid_h, raw.grid_w};
        m["method"] = args.method;
        m["retain_count"] = retain;
        m["retain_ratio"] = static_cast<double>(retain) / static_cast<double>(n_v);
        m["pruning_ratio"] = static_cast<double>(n_v - retain) / static_cast<double>(n_v);
        m["crop_count"] = part.crop_count;
        m["spatial_coverage"] = spatial_coverage(part, retained);
        if (retained.size() >= 2)
            m["redundancy"] = redundancy_metric(normalized, retained);
        else
            m["redundancy"] = nullptr;
        m["flops"] = flops_block(n_v, retain);
        m["config_digest"] = rec.config_digest;

        mask.records[img] = std::move(rec);
        images[img] = std::move(m);
    });

    save_mask_file(args.out, mask);

    ordered_json report;
    report["images"] = images;
    write_json(args.metrics_path, report);
    return 0;
}

int run_render(const std::string& mask_path, const std::string& image_id,
               const std::string& grid_text, const std::string& out_path) {
    const MaskFile mf = load_mask_file(mask_path);
    const MaskRecord* rec = nullptr;
    if (!image_id.empty()) {
        for (const auto& r : mf.records)
            if (r.image_id == image_id) rec = &r;
        if (!rec) throw error("no record for image: " + image_id);
    } else if (mf.records.size() == 1) {
        rec = &mf.records.front();
    } else {
        throw error("mask holds multiple records; pick one with --image");
    }

    std::size_t h = rec->grid_h, w = rec->grid_w;
    if (!grid_text.empty()) {
        const auto sep = grid_text.find('x');
        if (sep == std::string::npos) throw error("grid must look like HxW");
        h = std::stoull(grid_text.substr(0, sep));
        w = std::stoull(grid_text.substr(sep + 1));
    }
    atomic_write_file(out_path, render_mask_pgm(*rec, h, w));
    return 0;
}

int run_flops(const CostParams& params, double ratio, const std::string& out_path) {
    const auto reduction = flops_reduction(params, ratio);
    ordered_json j;
    j["n"] = params.n;
    j["d"] = params.d;
    j["m"] = params.m;
    j["layers"] = params.layers;
    j["constants"] = {{"a", params.a}, {"b", params.b}, {"c", params.c}};
    j["ratio"] = ratio;
    j["pruned_n"] = reduction.pruned_n;
    j["exact_reduction"] = reduction.exact;
    j["approx_reduction"] = reduction.approx;
    j["prefill_full"] = prefill_flops(params);
    CostParams pruned = params;
    pruned.n = reduction.pruned_n;
    j["prefill_pruned"] = prefill_flops(pruned);
    j["decode_per_token_full"] = decode_flops_per_token(params, params.n);
    j["decode_per_token_pruned"] = decode_flops_per_token(params, reduction.pruned_n);
    write_json(out_path, j);
    return 0;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char ch : text) {
        if (ch == ',') {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current += ch;
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

int run_lab(const std::string& spec_path, std::size_t trials, std::uint64_t master_seed,
            const std::string& methods_csv, const std::string& ratios_csv, double tau,
            long long crops, const std::string& out_path) {
    if (trials == 0) throw error("trials must be >= 1");
    const SyntheticSpec base = holov::cli::spec_from_json(read_json_file(spec_path));
    const auto methods = split_csv(methods_csv);
    if (methods.empty()) throw error("no methods selected");
    for (const auto& m : methods)
        if (m != "holov" && m != "random" && m != "attn-topk") throw error("unknown method: " + m);

    std::vector<double> ratios;
    for (const auto& r : split_csv(ratios_csv)) ratios.push_back(std::stod(r));
    if (ratios.empty()) throw error("no pruning ratios given");

    const std::size_t n_v = base.grid_h * base.grid_w;
    std::vector<ordered_json> records(trials);

    parallel_for(trials, [&](std::size_t t) {
        SyntheticSpec spec = base;
        spec.seed = derive_trial_seed(master_seed, t);
        const auto inst = generate_synthetic(spec);
        const TokenSet ts = normalize_rows(inst.tokens);
        const bool has_planted = !spec.planted_informative.empty();

        ordered_json rec;
        rec["trial"] = t;
        rec["seed"] = spec.seed;
        ordered_json per_ratio = ordered_json::array();
        for (double ratio : ratios) {
            const std::size_t retain = retain_count_from_ratio(n_v, ratio);
            if (retain == 0 || retain > n_v) throw error("ratio leaves no tokens");

            PruneConfig cfg;
            cfg.retain_count = retain;
            cfg.tau = static_cast<float>(tau);
            if (crops >= 0) cfg.crop_count = static_cast<std::size_t>(crops);
            const CropPartition part = make_partition(ts, cfg);

            ordered_json block;
            block["pruning_ratio"] = ratio;
            block["retain_count"] = retain;
            block["crop_count"] = part.crop_count;
            for (const auto& method : methods) {
                std::vector<std::size_t> retained;
                if (method == "holov") retained = prune(ts, cfg).retained;
                else if (method == "random") retained = random_prune(ts, retain, spec.seed);
                else retained = attention_topk_prune(ts, retain);

                ordered_json m;
                m["spatial_coverage"] = spatial_coverage(part, retained);
                m["redundancy"] = retained.size() >= 2
                                      ? ordered_json(redundancy_metric(ts, retained))
                                      : ordered_json(nullptr);
                if (has_planted) m["planted_recall"] = planted_recall(retained, inst.planted);
                block[method] = std::move(m);
            }
            per_ratio.push_back(std::move(block));
        }
        rec["ratios"] = std::move(per_ratio);
        records[t] = std::move(rec);
    });

    const auto has = [&](const char* name) {
        return std::find(methods.begin(), methods.end(), name) != methods.end();
    };

    ordered_json aggregate = ordered_json::array();
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
        ordered_json agg;
        agg["pruning_ratio"] = ratios[ri];
        agg["retain_count"] = retain_count_from_ratio(n_v, ratios[ri]);
        if (has("holov") && has("attn-topk")) {
            std::size_t wins = 0, cov = 0, red = 0;
            for (const auto& rec : records) {
                const auto& block = rec["ratios"][ri];
                const bool cov_ok = block["holov"]["spatial_coverage"].get<double>() >=
                                    block["attn-topk"]["spatial_coverage"].get<double>();
                const bool red_ok = block["holov"]["redundancy"].is_null() ||
                                    block["attn-topk"]["redundancy"].is_null() ||
                                    block["holov"]["redundancy"].get<double>() <=
                                        block["attn-topk"]["redundancy"].get<double>();
                cov += cov_ok;
                red += red_ok;
                wins += cov_ok && red_ok;
            }
            agg["holov_coverage_ge_attn_rate"] = static_cast<double>(cov) / trials;
            agg["holov_redundancy_le_attn_rate"] = static_cast<double>(red) / trials;
            agg["holov_beats_attn_rate"] = static_cast<double>(wins) / trials;
        }
        if (has("holov") && has("random") && !base.planted_informative.empty()) {
            std::size_t wins = 0;
            for (const auto& rec : records) {
                const auto& block = rec["ratios"][ri];
                wins += block["holov"]["planted_recall"].get<double>() >=
                        block["random"]["planted_recall"].get<double>();
            }
            agg["holov_recall_ge_random_rate"] = static_cast<double>(wins) / trials;
        }
        aggregate.push_back(std::move(agg));
    }

    ordered_json report;
    report["spec"] = holov::cli::spec_to_json(base);
    report["trials"] = trials;
    report["master_seed"] = master_seed;
    report["methods"] = methods;
    report["pruning_ratios"] = ratios;
    report["records"] = records;
    report["aggregate"] = aggregate;
    write_json(out_path, report);
    return 0;
}

int run_synth(const std::string& spec_path, const std::string& image_id,
              const std::string& out_path) {
    const SyntheticSpec spec = holov::cli::spec_from_json(read_json_file(spec_path));
    const auto inst = generate_synthetic(spec);
    save_token_sets(out_path, {{image_id, inst.tokens}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"holov: crop-wise visual token pruning toolkit"};
    app.require_subcommand(1);

    PruneArgs prune_args;
    auto* cmd_prune = app.add_subcommand("prune", "Prune a tensor container into a mask file");
    cmd_prune->add_option("--input", prune_args.input, "tensor container (.htc)")->required();
    cmd_prune->add_option("--out", prune_args.out, "mask file to write")->required();
    cmd_prune->add_option("--metrics", prune_args.metrics_path,
                          "metrics JSON path ('-' or empty for stdout)");
    cmd_prune->add_option("--retain", prune_args.retain, "tokens to keep");
    cmd_prune->add_option("--ratio", prune_args.ratio, "pruning ratio R in [0,1]");
    cmd_prune->add_option("--tau", prune_args.tau, "allocation sharpness (default 1.0)");
    cmd_prune->add_option("--crops", prune_args.crops, "crop count (default round(1024/retain))");
    cmd_prune->add_option("--method", prune_args.method, "holov | random | attn-topk")
        ->check(CLI::IsMember({"holov", "random", "attn-topk"}));
    cmd_prune->add_option("--mode", prune_args.mode, "grid | blocks")
        ->check(CLI::IsMember({"grid", "blocks"}));
    cmd_prune->add_option("--seed", prune_args.seed, "seed for the random baseline");
    cmd_prune->add_option("--gamma-floor", prune_args.gamma_floor,
                          "variance magnitude treated as zero");

    std::string render_mask_path, render_image, render_grid, render_out;
    auto* cmd_render = app.add_subcommand("render-mask", "Render a mask record as a binary PGM");
    cmd_render->add_option("--mask", render_mask_path, "mask file")->required();
    cmd_render->add_option("--out", render_out, "output .pgm path")->required();
    cmd_render->add_option("--image", render_image, "image id (defaults to the only record)");
    cmd_render->add_option("--grid", render_grid, "override grid as HxW");

    CostParams flops_params;
    flops_params.n = 576;
    flops_params.d = kDefaultHidden;
    flops_params.m = kDefaultFfn;
    flops_params.layers = kDefaultLayers;
    double flops_ratio = 0.0;
    std::string flops_out;
    auto* cmd_flops = app.add_subcommand("flops", "Evaluate the FLOPs cost model");
    cmd_flops->add_option("--n", flops_params.n, "visual token count");
    cmd_flops->add_option("--d", flops_params.d, "hidden size");
    cmd_flops->add_option("--m", flops_params.m, "FFN intermediate size");
    cmd_flops->add_option("--layers", flops_params.layers, "decoder layers");
    cmd_flops->add_option("--a", flops_params.a, "attention matmul constant");
    cmd_flops->add_option("--b", flops_params.b, "projection constant");
    cmd_flops->add_option("--c", flops_params.c, "FFN constant");
    cmd_flops->add_option("--ratio", flops_ratio, "pruning ratio R in [0,1]")->required();
    cmd_flops->add_option("--out", flops_out, "output JSON path (default stdout)");

    std::string lab_spec, lab_methods = "holov,random,attn-topk";
    std::string lab_ratios = "0.667,0.778,0.889", lab_out;
    std::size_t lab_trials = 1;
    std::uint64_t lab_seed = 0;
    double lab_tau = 1.0;
    long long lab_crops = -1;
    auto* cmd_lab = app.add_subcommand("lab", "Run synthetic pruning trials and report metrics");
    cmd_lab->add_option("--spec", lab_spec, "synthetic spec JSON file")->required();
    cmd_lab->add_option("--trials", lab_trials, "number of trials");
    cmd_lab->add_option("--seed", lab_seed, "master seed");
    cmd_lab->add_option("--methods", lab_methods, "comma-separated method list");
    cmd_lab->add_option("--ratios", lab_ratios, "comma-separated pruning ratios");
    cmd_lab->add_option("--tau", lab_tau, "allocation sharpness");
    cmd_lab->add_option("--crops", lab_crops, "crop count (default round(1024/retain))");
    cmd_lab->add_option("--out", lab_out, "report path (default stdout)");

    std::string synth_spec, synth_id = "img0", synth_out;
    auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic tensor container");
    cmd_synth->add_option("--spec", synth_spec, "synthetic spec JSON file")->required();
    cmd_synth->add_option("--id", synth_id, "image id for the container group");
    cmd_synth->add_option("--out", synth_out, "container path to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_prune->parsed()) return run_prune(prune_args);
        if (cmd_render->parsed())
            return run_render(render_mask_path, render_image, render_grid, render_out);
        if (cmd_flops->parsed()) return run_flops(flops_params, flops_ratio, flops_out);
        if (cmd_lab->parsed())
            return run_lab(lab_spec, lab_trials, lab_seed, lab_methods, lab_ratios, lab_tau,
                           lab_crops, lab_out);
        if (cmd_synth->parsed()) return run_synth(synth_spec, synth_id, synth_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
