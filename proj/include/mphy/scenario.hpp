// SPDX-License-Identifier: Apache-2.0
//
// mphy - physical-layer multicast transceiver designs and rate audits
// Copyright (C) 2026 The mphy authors
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

#ifndef MPHY_SCENARIO_HPP
#define MPHY_SCENARIO_HPP

#include "mphy/numlin.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mphy
{

inline constexpr int scenario_schema_version = 1;

// Channels h_1..h_M in C^N. Noise is unit variance, so all SNR knobs live in the power P.
struct ChannelSet
{
    std::vector<ComplexVector> channels;
    int n_antennas = 0;
    int n_users = 0;
    std::uint64_t seed = 0;

    // Throws invalid_input_error when dimensions disagree, M or N is zero, an entry is
    // non-finite or a channel is (numerically) zero.
    void validate() const;

    // N x M matrix with h_i as column i
    ComplexMatrix as_matrix() const;

    bool operator==(const ChannelSet &other) const;
};

// Experiment description consumed by the CLI sweeps.
struct ScenarioConfig
{
    int n_antennas = 8;
    int n_users = 32;
    std::vector<double> power_grid;  // linear P, noise power 1
    std::vector<int> users;          // M sweep for rate-vs-users (optional)
    int trials = 200;
    std::uint64_t master_seed = 1;
    std::vector<std::string> schemes;
    int num_rand = 0;                // 0 selects 30 * M * N
    int mc_samples = 10000;
    int frame_len = 1440;
    int frames = 100;
    std::string output_path;

    void validate() const;
    bool operator==(const ScenarioConfig &other) const = default;
};

struct parse_error : std::runtime_error
{
    std::string field;
    parse_error(const std::string &field_name, const std::string &what)
        : std::runtime_error("scenario parse error in field '" + field_name + "': " + what), field(field_name)
    {
    }
};

struct schema_version_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// M i.i.d. CN(0, I_N) channels. User i is drawn from the substream (seed, i, attempt);
// draws with norm below 1e-12 are discarded and redrawn with attempt + 1.
ChannelSet generate_channels(int n_antennas, int n_users, std::uint64_t seed);

void save_scenario(const std::filesystem::path &path, const ChannelSet &channels);
void save_scenario(const std::filesystem::path &path, const ScenarioConfig &config);

using ScenarioDocument = std::variant<ChannelSet, ScenarioConfig>;

// Dispatches on the "kind" field of the document.
ScenarioDocument load_scenario(const std::filesystem::path &path);
ChannelSet load_channel_set(const std::filesystem::path &path);
ScenarioConfig load_scenario_config(const std::filesystem::path &path);

// String forms, used by the loaders and handy in tests.
std::string to_json_string(const ChannelSet &channels);
std::string to_json_string(const ScenarioConfig &config);
ScenarioDocument parse_scenario(const std::string &text);

} // namespace mphy

#endif
