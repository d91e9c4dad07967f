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

#include "mphy/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mphy
{

using nlohmann::json;

// ---------- validation ----------

void ChannelSet::validate() const
{
    if (n_antennas < 1)
        throw invalid_input_error("ChannelSet: n_antennas must be at least 1.");
    if (n_users < 1)
        throw invalid_input_error("ChannelSet: n_users must be at least 1.");
    if (static_cast<int>(channels.size()) != n_users)
        throw invalid_input_error("ChannelSet: number of channels does not match n_users.");
    for (const auto &h : channels)
    {
        if (h.size() != n_antennas)
            throw invalid_input_error("ChannelSet: channel length does not match n_antennas.");
        if (!h.allFinite())
            throw invalid_input_error("ChannelSet: non-finite channel entry.");
        if (h.norm() < 1e-12)
            throw invalid_input_error("ChannelSet: zero channel vector.");
    }
}

ComplexMatrix ChannelSet::as_matrix() const
{
    ComplexMatrix h(n_antennas, n_users);
    for (int i = 0; i < n_users; ++i)
        h.col(i) = channels[static_cast<std::size_t>(i)];
    return h;
}

bool ChannelSet::operator==(const ChannelSet &other) const
{
    if (n_antennas != other.n_antennas || n_users != other.n_users || seed != other.seed ||
        channels.size() != other.channels.size())
        return false;
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].size() != other.channels[i].size() || channels[i] != other.channels[i])
            return false;
    return true;
}

void ScenarioConfig::validate() const
{
    if (n_antennas < 1)
        throw invalid_input_error("ScenarioConfig: n_antennas must be positive.");
    if (n_users < 1)
        throw invalid_input_error("ScenarioConfig: n_users must be positive.");
    if (trials < 1 || mc_samples < 1 || frame_len < 1 || frames < 1 || num_rand < 0)
        throw invalid_input_error("ScenarioConfig: counts must be positive.");
    for (double p : power_grid)
        if (!(p > 0.0) || !std::isfinite(p))
            throw invalid_input_error("ScenarioConfig: power values must be positive and finite.");
    for (int m : users)
        if (m < 1)
            throw invalid_input_error("ScenarioConfig: user counts must be positive.");
}

// ---------- generation ----------

ChannelSet generate_channels(int n_antennas, int n_users, std::uint64_t seed)
{
    if (n_antennas < 1 || n_users < 1)
        throw invalid_input_error("generate_channels: N and M must be at least 1.");

    ChannelSet out;
    out.n_antennas = n_antennas;
    out.n_users = n_users;
    out.seed = seed;
    out.channels.reserve(static_cast<std::size_t>(n_users));
    for (int i = 0; i < n_users; ++i)
    {
        for (std::uint64_t attempt = 0;; ++attempt)
        {
            Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(i), attempt});
            ComplexVector h = sample_standard_cn(rng, n_antennas);
            if (h.norm() >= 1e-12)
            {
                out.channels.push_back(std::move(h));
                break;
            }
        }
    }
    return out;
}

// ---------- serialization ----------

namespace
{
std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <class T>
T required(const json &doc, const char *field)
{
    if (!doc.contains(field))
        throw parse_error(field, "missing");
    try
    {
        return doc.at(field).get<T>();
    }
    catch (const json::exception &e)
    {
        throw parse_error(field, e.what());
    }
}

template <class T>
T optional_field(const json &doc, const char *field, T fallback)
{
    if (!doc.contains(field))
        return fallback;
    try
    {
        return doc.at(field).get<T>();
    }
    catch (const json::exception &e)
    {
        throw parse_error(field, e.what());
    }
}

void check_header(const json &doc)
{
    if (!doc.is_object())
        throw parse_error("<root>", "document must be a JSON object");
    const int version = required<int>(doc, "schema_version");
    if (version != scenario_schema_version)
        throw schema_version_error("scenario schema_version " + std::to_string(version) + " is not supported (expected " +
                                   std::to_string(scenario_schema_version) + ")");
}

ChannelSet channel_set_from_json(const json &doc)
{
    ChannelSet cs;
    cs.n_antennas = required<int>(doc, "n_antennas");
    cs.n_users = required<int>(doc, "n_users");
    cs.seed = optional_field<std::uint64_t>(doc, "seed", 0);
    if (!doc.contains("channels") || !doc["channels"].is_array())
        throw parse_error("channels", "missing or not an array");

    for (const auto &row : doc["channels"])
    {
        if (!row.is_array())
            throw parse_error("channels", "each channel must be an array of [re, im] pairs");
        ComplexVector h(static_cast<Eigen::Index>(row.size()));
        Eigen::Index k = 0;
        for (const auto &entry : row)
        {
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
                throw parse_error("channels", "entries must be [re, im] number pairs");
            h(k++) = cdouble(entry[0].get<double>(), entry[1].get<double>());
        }
        cs.channels.push_back(std::move(h));
    }
    try
    {
        cs.validate();
    }
    catch (const invalid_input_error &e)
    {
        throw parse_error("channels", e.what());
    }
    return cs;
}

ScenarioConfig config_from_json(const json &doc)
{
    ScenarioConfig c;
    c.n_antennas = required<int>(doc, "n_antennas");
    c.n_users = required<int>(doc, "n_users");
    c.power_grid = optional_field<std::vector<double>>(doc, "power_grid", {});
    c.users = optional_field<std::vector<int>>(doc, "users", {});
    c.trials = optional_field<int>(doc, "trials", c.trials);
    c.master_seed = optional_field<std::uint64_t>(doc, "master_seed", c.master_seed);
    c.schemes = optional_field<std::vector<std::string>>(doc, "schemes", {});
    c.num_rand = optional_field<int>(doc, "num_rand", c.num_rand);
    c.mc_samples = optional_field<int>(doc, "mc_samples", c.mc_samples);
    c.frame_len = optional_field<int>(doc, "frame_len", c.frame_len);
    c.frames = optional_field<int>(doc, "frames", c.frames);
    c.output_path = optional_field<std::string>(doc, "output", "");
    try
    {
        c.validate();
    }
    catch (const invalid_input_error &e)
    {
        throw parse_error("config", e.what());
    }
    return c;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out)
        throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

// Written by hand so every double carries 17 significant digits.
std::string to_json_string(const ChannelSet &cs)
{
    cs.validate();
    std::ostringstream o;
    o << "{\n  \"schema_version\": " << scenario_schema_version << ",\n  \"kind\": \"channel_set\",\n"
      << "  \"n_antennas\": " << cs.n_antennas << ",\n  \"n_users\": " << cs.n_users << ",\n"
      << "  \"seed\": " << cs.seed << ",\n  \"channels\": [\n";
    for (std::size_t i = 0; i < cs.channels.size(); ++i)
    {
        o << "    [";
        const auto &h = cs.channels[i];
        for (Eigen::Index k = 0; k < h.size(); ++k)
            o << (k ? ", " : "") << '[' << fmt17(h(k).real()) << ", " << fmt17(h(k).imag()) << ']';
        o << ']' << (i + 1 < cs.channels.size() ? "," : "") << '\n';
    }
    o << "  ]\n}\n";
    return o.str();
}

std::string to_json_string(const ScenarioConfig &c)
{
    c.validate();
    std::ostringstream o;
    auto list = [&](const auto &v, auto fmt) {
        o << '[';
        for (std::size_t i = 0; i < v.size(); ++i)
            o << (i ? ", " : "") << fmt(v[i]);
        o << ']';
    };
    o << "{\n  \"schema_version\": " << scenario_schema_version << ",\n  \"kind\": \"scenario_config\",\n"
      << "  \"n_antennas\": " << c.n_antennas << ",\n  \"n_users\": " << c.n_users << ",\n  \"power_grid\": ";
    list(c.power_grid, fmt17);
    o << ",\n  \"users\": ";
    list(c.users, [](int m) { return std::to_string(m); });
    o << ",\n  \"trials\": " << c.trials << ",\n  \"master_seed\": " << c.master_seed << ",\n  \"schemes\": ";
    list(c.schemes, [](const std::string &s) { return json(s).dump(); });
    o << ",\n  \"num_rand\": " << c.num_rand << ",\n  \"mc_samples\": " << c.mc_samples
      << ",\n  \"frame_len\": " << c.frame_len << ",\n  \"frames\": " << c.frames
      << ",\n  \"output\": " << json(c.output_path).dump() << "\n}\n";
    return o.str();
}

ScenarioDocument parse_scenario(const std::string &text)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw parse_error("<document>", e.what());
    }
    check_header(doc);
    const std::string kind = optional_field<std::string>(doc, "kind", "channel_set");
    if (kind == "channel_set")
        return channel_set_from_json(doc);
    if (kind == "scenario_config")
        return config_from_json(doc);
    throw parse_error("kind", "unknown document kind '" + kind + "'");
}

void save_scenario(const std::filesystem::path &path, const ChannelSet &channels)
{
    write_text(path, to_json_string(channels));
}

void save_scenario(const std::filesystem::path &path, const ScenarioConfig &config)
{
    write_text(path, to_json_string(config));
}

ScenarioDocument load_scenario(const std::filesystem::path &path)
{
    return parse_scenario(read_text(path));
}

ChannelSet load_channel_set(const std::filesystem::path &path)
{
    auto doc = load_scenario(path);
    if (auto *cs = std::get_if<ChannelSet>(&doc))
        return std::move(*cs);
    throw parse_error("kind", "expected a channel_set document in '" + path.string() + "'");
}

ScenarioConfig load_scenario_config(const std::filesystem::path &path)
{
    auto doc = load_scenario(path);
    if (auto *c = std::get_if<ScenarioConfig>(&doc))
        return std::move(*c);
    throw parse_error("kind", "expected a scenario_config document in '" + path.string() + "'");
}

} // namespace mphy
