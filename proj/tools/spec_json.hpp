// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "holov/analysis.hpp"

namespace holov::cli {

using ordered_json = nlohmann::ordered_json;

inline SyntheticSpec spec_from_json(const nlohmann::json& j) {
    SyntheticSpec spec;
    spec.grid_h = j.at("grid_h").get<std::size_t>();
    spec.grid_w = j.at("grid_w").get<std::size_t>();
    spec.d = j.at("d").get<std::size_t>();
    spec.cluster_count = j.value("cluster_count", std::size_t{1});
    if (j.contains("planted_informative"))
        spec.planted_informative = j.at("planted_informative").get<std::vector<std::size_t>>();
    spec.positional_bias_strength = j.value("positional_bias_strength", 0.0f);
    spec.noise_sigma = j.value("noise_sigma", 0.0f);
    spec.seed = j.value("seed", std::uint64_t{0});
    return spec;
}

inline ordered_json spec_to_json(const SyntheticSpec& spec) {
    ordered_json j;
    j["grid_h"] = spec.grid_h;
    j["grid_w"] = spec.grid_w;
    j["d"] = spec.d;
    j["cluster_count"] = spec.cluster_count;
    j["planted_informative"] = spec.planted_informative;
    j["positional_bias_strength"] = spec.positional_bias_strength;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    return j;
}

}  // namespace holov::cli
