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

#ifndef MPHY_CLI_HPP
#define MPHY_CLI_HPP

#include "mphy/linksim.hpp"
#include "mphy/randomization.hpp"
#include "mphy/sbf.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mphy::cli
{

// Everything the sweeps need. P values are in dB with unit noise power.
struct ExperimentConfig
{
    std::string scenario_id = "default";
    int n_antennas = 8;
    std::vector<int> users = {32};
    std::vector<double> p_db = {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0};
    int trials = 200;
    std::uint64_t seed = 1;
    std::vector<SchemeKind> schemes = {all_schemes.begin(), all_schemes.end()}; // empty: capacity and open loop only
    int num_rand = 0; // 0 selects 30 M N
    int samples = 10000;
    int frame_len = 1440;
    int frames = 100;
    std::string output_path; // used when --out is absent; empty: stdout

    void validate() const;
};

// ScenarioConfig (JSON) to ExperimentConfig; scenario_id is the file stem.
ExperimentConfig from_scenario(const ScenarioConfig &config, const std::string &scenario_id);

double db_to_linear(double db);

// One CSV row of rate-vs-power / rate-vs-users. scheme is a SchemeKind name, "capacity"
// or "open-loop". Rates and CI are trial averages (nats); gap_bits = capacity - rate.
struct ExperimentResultRow
{
    std::string scenario_id;
    std::string scheme;
    int n_antennas = 0;
    int n_users = 0;
    int r = 0;               // largest rank(W*) over the trials
    double p_db = 0.0;
    double p = 0.0;
    double rate_nats = 0.0;
    double rate_bits = 0.0;
    double gap_bits = 0.0;
    double ci_low = 0.0;     // mean -/+ 1.96 standard errors over trials, nats
    double ci_high = 0.0;
    double bound_bits = 0.0; // mean per-trial gap bound (inf: none)
    bool bound_satisfied = true; // every trial's gap below its bound
    std::uint64_t seed = 0;
};

std::string csv_header();
std::string to_csv(const ExperimentResultRow &row);
void write_rows(std::ostream &out, const std::vector<ExperimentResultRow> &rows);
// gnuplot data: one `index` block per scheme, columns x rate gap ci_low ci_high (bits)
void write_gnuplot(std::ostream &out, const std::vector<ExperimentResultRow> &rows, bool x_is_users);

// Trial t uses the channels generate_channels(N, M, mix_seed(seed, {M, t})).
std::vector<ExperimentResultRow> rate_vs_power(const ExperimentConfig &config);
// Sweeps config.users at the single power config.p_db.front().
std::vector<ExperimentResultRow> rate_vs_users(const ExperimentConfig &config);

// Worst-case gap constants next to the rounded published table values.
struct GapAuditRow
{
    std::string table;  // "elliptic" or "elliptic-alamouti"
    std::string r;      // "1", "2", "3" or "inf"
    double nats = 0.0;
    double bits = 0.0;
    double published_nats = 0.0;
    double published_bits = 0.0;

    bool nats_match() const;
    bool bits_match() const;
};

inline constexpr double gap_audit_tolerance = 5e-5;

std::vector<GapAuditRow> gap_audit();
void write_gap_audit(std::ostream &out, const std::vector<GapAuditRow> &rows);

// Fact-style SNR guarantees over config.trials instances at (N, users.front()), plus the
// tail-bound audit with config.samples draws on the first instance.
std::vector<BoundAuditReport> randomization_audit(const ExperimentConfig &config);
void write_audit(std::ostream &out, const std::vector<BoundAuditReport> &reports);

// Frame-level simulation of every scheme on one instance (N, users.front()).
struct SimulationRow
{
    std::string scheme;
    double p_db = 0.0;
    double p = 0.0;
    int frame_len = 0;
    int frames = 0;
    double empirical_rate_nats = 0.0; // min over users of the frame-averaged rate
    double rate_se = 0.0;             // standard error for that user
    double closed_form_nats = 0.0;
    double worst_user_ber = 0.0;
    double expected_ber = 0.0;        // E Q(sqrt SNR) of the same user
    long long bits = 0;
    std::uint64_t seed = 0;
};

std::vector<SimulationRow> simulate(const ExperimentConfig &config);
void write_simulation(std::ostream &out, const std::vector<SimulationRow> &rows);

// JSON report of the solver: W* spectrum, rho, rank, certificate.
std::string solution_report(const McSolution &mc, const ChannelSet &channels);

} // namespace mphy::cli

#endif
