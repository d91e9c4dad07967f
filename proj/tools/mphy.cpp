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

// mphy: multicast capacity, randomization and SBF rate experiments.
// Exit codes: 0 success, 1 numerical failure, 2 usage or I/O error.

#include "mphy/cli.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace
{

using namespace mphy;

constexpr int exit_numerical = 1;
constexpr int exit_usage = 2;

struct io_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Flags
{
    std::string scenario;
    std::string out;
    std::uint64_t seed = 1;
    int trials = 0;
    int samples = 0;
    int num_rand = 0;
    int antennas = 0;
    int frames = 0;
    int frame_len = 0;
    std::string schemes;
    double pmin_db = -2.0, pmax_db = 9.0, pstep_db = 1.0;
    std::vector<int> users;
    double tol = 1e-6;
    std::string gnuplot;
    bool config_template = false;
};

std::vector<SchemeKind> parse_schemes(const std::string &list)
{
    std::vector<SchemeKind> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        // the reference rows are always emitted
        if (!item.empty() && item != "capacity" && item != "open-loop")
            out.push_back(parse_scheme(item));
    return out;
}

std::vector<double> db_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo)
        throw invalid_input_error("power grid: need pmin <= pmax and pstep > 0");
    std::vector<double> g;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int k = 0; k < n; ++k)
        g.push_back(lo + k * step);
    return g;
}

// config from --scenario (if any), then every flag given on the command line
cli::ExperimentConfig build_config(const Flags &f, const CLI::App &app, cli::ExperimentConfig c)
{
    if (!f.scenario.empty())
    {
        if (!std::filesystem::exists(f.scenario))
            throw io_error("scenario file not found: " + f.scenario);
        c = cli::from_scenario(load_scenario_config(f.scenario), std::filesystem::path(f.scenario).stem().string());
    }
    auto given = [&](const char *name) {
        const CLI::Option *opt = app.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--seed"))
        c.seed = f.seed;
    if (given("--trials"))
        c.trials = f.trials;
    if (given("--samples"))
        c.samples = f.samples;
    if (given("--num-rand"))
        c.num_rand = f.num_rand;
    if (given("--antennas"))
        c.n_antennas = f.antennas;
    if (given("--frames"))
        c.frames = f.frames;
    if (given("--frame-len"))
        c.frame_len = f.frame_len;
    if (given("--schemes"))
        c.schemes = parse_schemes(f.schemes);
    if (given("--users"))
        c.users = f.users;
    if (given("--pmin-db") || given("--pmax-db") || given("--pstep-db"))
        c.p_db = db_grid(f.pmin_db, given("--pmax-db") ? f.pmax_db : f.pmin_db, f.pstep_db);
    c.validate();
    return c;
}

void emit(const std::string &path, const std::function<void(std::ostream &)> &writer)
{
    if (path.empty())
    {
        writer(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw io_error("cannot open output file: " + path);
    writer(out);
    if (!out)
        throw io_error("write failed: " + path);
}

void add_common(CLI::App *cmd, Flags &f)
{
    cmd->add_option("--scenario", f.scenario, "scenario JSON file");
    cmd->add_option("--out", f.out, "output path (default stdout)");
    cmd->add_option("--seed", f.seed, "master seed");
}

void add_sweep(CLI::App *cmd, Flags &f)
{
    cmd->add_option("--trials", f.trials, "channel realizations");
    cmd->add_option("--num-rand", f.num_rand, "randomization candidates (0: 30 M N)");
    cmd->add_option("--schemes", f.schemes, "comma-separated scheme names");
    cmd->add_option("--pmin-db", f.pmin_db, "lowest power (dB)");
    cmd->add_option("--pmax-db", f.pmax_db, "highest power (dB)");
    cmd->add_option("--pstep-db", f.pstep_db, "power step (dB)");
    cmd->add_option("--users", f.users, "user counts M")->delimiter(',');
    cmd->add_option("--antennas", f.antennas, "transmit antennas N");
}

void add_plot(CLI::App *cmd, Flags &f)
{
    cmd->add_option("--gnuplot", f.gnuplot, "also write gnuplot data blocks to this path");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mphy: multicast transmit designs and rate audits"};
    app.require_subcommand(1);
    Flags f;

    auto *solve = app.add_subcommand("solve", "solve the multicast capacity problem for a channel set");
    add_common(solve, f);
    solve->add_option("--tol", f.tol, "relative duality gap target");

    auto *rvp = app.add_subcommand("rate-vs-power", "trial-averaged rates over a power grid (CSV)");
    add_common(rvp, f);
    add_sweep(rvp, f);
    add_plot(rvp, f);

    auto *rvu = app.add_subcommand("rate-vs-users", "trial-averaged rates over user counts at --pmin-db (CSV)");
    add_common(rvu, f);
    add_sweep(rvu, f);
    add_plot(rvu, f);

    auto *gap = app.add_subcommand("gap-audit", "worst-case gap constants against the published tables (CSV)");
    gap->add_option("--out", f.out, "output path (default stdout)");

    auto *audit = app.add_subcommand("randomization-audit", "SNR guarantees and tail bounds (CSV)");
    add_common(audit, f);
    add_sweep(audit, f);
    audit->add_option("--samples", f.samples, "draws for the tail-bound audit");

    auto *sim = app.add_subcommand("simulate", "frame-level rates and uncoded BER (CSV)");
    add_common(sim, f);
    add_sweep(sim, f);
    sim->add_option("--frame-len", f.frame_len, "symbols per frame");
    sim->add_option("--frames", f.frames, "frames per point");
    sim->add_option("--samples", f.samples, "unused; accepted for symmetry");

    auto *gen = app.add_subcommand("generate", "write a random i.i.d. CN(0, I) channel set or a config template");
    gen->add_option("--out", f.out, "output path")->required();
    gen->add_option("--seed", f.seed, "seed");
    gen->add_option("--antennas", f.antennas, "transmit antennas N");
    gen->add_option("--users", f.users, "number of users M")->expected(1);
    gen->add_flag("--config-template", f.config_template, "write an experiment config instead of channels");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try
    {
        if (*solve)
        {
            if (f.scenario.empty())
                throw invalid_input_error("solve needs --scenario");
            if (!std::filesystem::exists(f.scenario))
                throw io_error("scenario file not found: " + f.scenario);
            const ChannelSet cs = load_channel_set(f.scenario);
            const McSolution mc = solve_mc(cs, f.tol);
            emit(f.out, [&](std::ostream &o) { o << cli::solution_report(mc, cs); });
        }
        else if (*rvp)
        {
            const auto c = build_config(f, *rvp, {});
            const auto rows = cli::rate_vs_power(c);
            emit(f.out.empty() ? c.output_path : f.out, [&](std::ostream &o) { cli::write_rows(o, rows); });
            if (!f.gnuplot.empty())
                emit(f.gnuplot, [&](std::ostream &o) { cli::write_gnuplot(o, rows, false); });
        }
        else if (*rvu)
        {
            cli::ExperimentConfig base;
            base.users = {8, 16, 24, 32, 40, 48, 56, 64};
            base.p_db = {3.0};
            const auto c = build_config(f, *rvu, base);
            const auto rows = cli::rate_vs_users(c);
            emit(f.out.empty() ? c.output_path : f.out, [&](std::ostream &o) { cli::write_rows(o, rows); });
            if (!f.gnuplot.empty())
                emit(f.gnuplot, [&](std::ostream &o) { cli::write_gnuplot(o, rows, true); });
        }
        else if (*gap)
        {
            emit(f.out, [&](std::ostream &o) { cli::write_gap_audit(o, cli::gap_audit()); });
        }
        else if (*audit)
        {
            cli::ExperimentConfig base;
            base.n_antennas = 4;
            base.users = {24};
            base.trials = 300;
            base.samples = 20000;
            const auto c = build_config(f, *audit, base);
            emit(f.out.empty() ? c.output_path : f.out,
                 [&](std::ostream &o) { cli::write_audit(o, cli::randomization_audit(c)); });
        }
        else if (*sim)
        {
            cli::ExperimentConfig base;
            base.p_db = {3.0};
            const auto c = build_config(f, *sim, base);
            emit(f.out.empty() ? c.output_path : f.out,
                 [&](std::ostream &o) { cli::write_simulation(o, cli::simulate(c)); });
        }
        else if (*gen)
        {
            const int n = gen->count("--antennas") ? f.antennas : 8;
            const int m = f.users.empty() ? 32 : f.users.front();
            if (f.config_template)
            {
                ScenarioConfig sc;
                sc.n_antennas = n;
                sc.n_users = m;
                sc.master_seed = f.seed;
                for (double db : cli::ExperimentConfig{}.p_db)
                    sc.power_grid.push_back(cli::db_to_linear(db));
                for (SchemeKind k : all_schemes)
                    sc.schemes.push_back(to_string(k));
                save_scenario(f.out, sc);
            }
            else
                save_scenario(f.out, generate_channels(n, m, f.seed));
        }
    }
    catch (const convergence_error &e)
    {
        std::cerr << "mphy: solver did not converge: " << e.what() << " (relative gap "
                  << e.best.relative_gap() << ")\n";
        return exit_numerical;
    }
    catch (const not_psd_error &e)
    {
        std::cerr << "mphy: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    catch (const std::domain_error &e)
    {
        std::cerr << "mphy: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    catch (const std::exception &e)
    {
        // parse, schema, file and argument errors
        std::cerr << "mphy: " << e.what() << '\n';
        return exit_usage;
    }
    return 0;
}
