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

#include "mphy/cli.hpp"
#include "mphy/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace mphy::cli
{

namespace
{

constexpr double inf = std::numeric_limits<double>::infinity();

// 17 significant digits keeps rows exact and byte-stable across runs
std::string num(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_bits(double nats)
{
    return nats / std::numbers::ln2;
}

struct MeanCi
{
    double mean = 0.0, low = 0.0, high = 0.0;
};

MeanCi mean_ci(const std::vector<double> &v)
{
    MeanCi out;
    const auto n = static_cast<double>(v.size());
    for (double x : v)
        out.mean += x;
    out.mean /= n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - out.mean) * (x - out.mean);
    const double half = v.size() > 1 ? 1.96 * std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out.low = out.mean - half;
    out.high = out.mean + half;
    return out;
}

SbfSampler make_sampler(SchemeKind kind, const McSolution &mc, const ChannelSet &cs, int num_rand, Rng &rng)
{
    if (kind == SchemeKind::FixedBF)
        return SbfSampler::fixed_bf(randomize_rank1(mc, cs, num_rand, rng).w);
    if (kind == SchemeKind::FixedAlamouti)
        return SbfSampler::fixed_alamouti(randomize_rank2_alamouti(mc, cs, num_rand, rng).b);
    return SbfSampler::stochastic(kind, mc);
}

// Per-trial rates in nats: rows are [capacity, open-loop, schemes...], columns are P values.
struct TrialResult
{
    int rank = 0;
    Eigen::MatrixXd rate;
    Eigen::MatrixXd bound;
};

TrialResult run_trial(const ExperimentConfig &c, int m, std::size_t t, const std::vector<double> &p_lin)
{
    const ChannelSet cs = generate_channels(c.n_antennas, m, mix_seed(c.seed, {static_cast<std::uint64_t>(m), t}));
    const McSolution mc = solve_mc(cs);
    const auto n_rows = static_cast<Eigen::Index>(c.schemes.size() + 2);
    const auto n_p = static_cast<Eigen::Index>(p_lin.size());

    TrialResult tr;
    tr.rank = mc.rank_r;
    tr.rate.resize(n_rows, n_p);
    tr.bound.resize(n_rows, n_p);
    for (Eigen::Index k = 0; k < n_p; ++k)
    {
        const double p = p_lin[static_cast<std::size_t>(k)];
        tr.rate(0, k) = capacity_rate(mc.rho_min, p);
        tr.bound(0, k) = 0.0;
        tr.rate(1, k) = open_loop_rate(cs, p);
        tr.bound(1, k) = inf;
    }
    for (std::size_t s = 0; s < c.schemes.size(); ++s)
    {
        const SchemeKind kind = c.schemes[s];
        Rng rng = Rng::stream(c.seed, {static_cast<std::uint64_t>(m), t, 1 + s});
        const SbfSampler sampler = make_sampler(kind, mc, cs, c.num_rand, rng);
        const auto row = static_cast<Eigen::Index>(s + 2);
        for (Eigen::Index k = 0; k < n_p; ++k)
        {
            const double p = p_lin[static_cast<std::size_t>(k)];
            tr.rate(row, k) = closed_form_rate(sampler, cs, p);
            if (kind == SchemeKind::FixedBF)
                tr.bound(row, k) = gap_bound_rank1(mc.rho_min, p, m);
            else if (kind == SchemeKind::FixedAlamouti)
                tr.bound(row, k) = gap_bound_rank2(mc.rho_min, p, m);
            else
                tr.bound(row, k) = gap_bound(kind, mc.rank_r).bound_nats;
        }
    }
    return tr;
}

std::vector<ExperimentResultRow> sweep(const ExperimentConfig &c, int m, const std::vector<double> &p_db)
{
    std::vector<double> p_lin;
    for (double db : p_db)
        p_lin.push_back(db_to_linear(db));

    std::vector<TrialResult> trials(static_cast<std::size_t>(c.trials));
    parallel_for(trials.size(), [&](std::size_t t) { trials[t] = run_trial(c, m, t, p_lin); });

    int max_rank = 0;
    for (const auto &t : trials)
        max_rank = std::max(max_rank, t.rank);

    std::vector<std::string> names = {"capacity", "open-loop"};
    for (SchemeKind k : c.schemes)
        names.push_back(to_string(k));

    std::vector<ExperimentResultRow> rows;
    for (std::size_t k = 0; k < p_lin.size(); ++k)
    {
        const auto col = static_cast<Eigen::Index>(k);
        std::vector<double> cap;
        for (const auto &t : trials)
            cap.push_back(t.rate(0, col));
        const double cap_mean = mean_ci(cap).mean;

        for (std::size_t s = 0; s < names.size(); ++s)
        {
            const auto row = static_cast<Eigen::Index>(s);
            std::vector<double> rate;
            double bound_sum = 0.0;
            bool ok = true;
            for (const auto &t : trials)
            {
                rate.push_back(t.rate(row, col));
                bound_sum += t.bound(row, col);
                ok = ok && (t.rate(0, col) - t.rate(row, col) <= t.bound(row, col) + 1e-9);
            }
            const MeanCi mc = mean_ci(rate);
            ExperimentResultRow r;
            r.scenario_id = c.scenario_id;
            r.scheme = names[s];
            r.n_antennas = c.n_antennas;
            r.n_users = m;
            r.r = max_rank;
            r.p_db = p_db[k];
            r.p = p_lin[k];
            r.rate_nats = mc.mean;
            r.rate_bits = to_bits(mc.mean);
            r.gap_bits = to_bits(cap_mean) - r.rate_bits;
            r.ci_low = mc.low;
            r.ci_high = mc.high;
            r.bound_bits = to_bits(bound_sum / static_cast<double>(trials.size()));
            r.bound_satisfied = ok;
            r.seed = c.seed;
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

void ExperimentConfig::validate() const
{
    if (n_antennas < 1)
        throw invalid_input_error("config: N must be positive.");
    if (users.empty())
        throw invalid_input_error("config: need at least one user count.");
    for (int m : users)
        if (m < 1)
            throw invalid_input_error("config: user counts must be positive.");
    if (p_db.empty())
        throw invalid_input_error("config: empty power grid.");
    for (double p : p_db)
        if (!std::isfinite(p))
            throw invalid_input_error("config: power grid must be finite.");
    if (trials < 1 || samples < 1 || frame_len < 1 || frames < 1 || num_rand < 0)
        throw invalid_input_error("config: trials, samples, frame length and frames must be positive.");
}

ExperimentConfig from_scenario(const ScenarioConfig &sc, const std::string &scenario_id)
{
    sc.validate();
    ExperimentConfig c;
    c.scenario_id = scenario_id;
    c.n_antennas = sc.n_antennas;
    c.users = sc.users.empty() ? std::vector<int>{sc.n_users} : sc.users;
    if (!sc.power_grid.empty())
    {
        c.p_db.clear();
        for (double p : sc.power_grid)
            c.p_db.push_back(10.0 * std::log10(p));
    }
    c.trials = sc.trials;
    c.seed = sc.master_seed;
    if (!sc.schemes.empty())
    {
        c.schemes.clear();
        for (const auto &s : sc.schemes)
            c.schemes.push_back(parse_scheme(s));
    }
    c.num_rand = sc.num_rand;
    c.samples = sc.mc_samples;
    c.frame_len = sc.frame_len;
    c.frames = sc.frames;
    c.output_path = sc.output_path;
    return c;
}

std::string csv_header()
{
    return "scenario_id,scheme,N,M,r,p_db,p,rate_nats,rate_bits,gap_bits,ci_low,ci_high,bound_bits,bound_satisfied,"
           "seed";
}

std::string to_csv(const ExperimentResultRow &r)
{
    return r.scenario_id + "," + r.scheme + "," + std::to_string(r.n_antennas) + "," + std::to_string(r.n_users) +
           "," + std::to_string(r.r) + "," + num(r.p_db) + "," + num(r.p) + "," + num(r.rate_nats) + "," +
           num(r.rate_bits) + "," + num(r.gap_bits) + "," + num(r.ci_low) + "," + num(r.ci_high) + "," +
           num(r.bound_bits) + "," + (r.bound_satisfied ? "1" : "0") + "," + std::to_string(r.seed);
}

void write_rows(std::ostream &out, const std::vector<ExperimentResultRow> &rows)
{
    out << csv_header() << '\n';
    for (const auto &r : rows)
        out << to_csv(r) << '\n';
}

void write_gnuplot(std::ostream &out, const std::vector<ExperimentResultRow> &rows, bool x_is_users)
{
    // one index block per scheme, first-appearance order
    std::vector<std::string> order;
    for (const auto &r : rows)
        if (std::find(order.begin(), order.end(), r.scheme) == order.end())
            order.push_back(r.scheme);
    bool first = true;
    for (const auto &s : order)
    {
        if (!first)
            out << "\n\n";
        first = false;
        out << "# " << s << '\n' << (x_is_users ? "# M" : "# p_db") << " rate_bits gap_bits ci_low_bits ci_high_bits\n";
        for (const auto &r : rows)
            if (r.scheme == s)
                out << (x_is_users ? std::to_string(r.n_users) : num(r.p_db)) << ' ' << num(r.rate_bits) << ' '
                    << num(r.gap_bits) << ' ' << num(to_bits(r.ci_low)) << ' ' << num(to_bits(r.ci_high)) << '\n';
    }
}

std::vector<ExperimentResultRow> rate_vs_power(const ExperimentConfig &c)
{
    c.validate();
    std::vector<ExperimentResultRow> rows;
    for (int m : c.users)
    {
        auto part = sweep(c, m, c.p_db);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<ExperimentResultRow> rate_vs_users(const ExperimentConfig &c)
{
    c.validate();
    std::vector<ExperimentResultRow> rows;
    for (int m : c.users)
    {
        auto part = sweep(c, m, {c.p_db.front()});
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

// ---------------------------------------------------------------------------
// gap audit
// ---------------------------------------------------------------------------

bool GapAuditRow::nats_match() const
{
    return std::abs(nats - published_nats) <= gap_audit_tolerance;
}

bool GapAuditRow::bits_match() const
{
    return std::abs(bits - published_bits) <= gap_audit_tolerance;
}

std::vector<GapAuditRow> gap_audit()
{
    // rounded values as printed in the two gap tables
    struct Published
    {
        const char *r;
        double nats, bits;
    };
    const Published elliptic[] = {{"1", 0.0, 0.0}, {"2", 0.3069, 0.4428}, {"3", 0.4014, 0.5791}, {"inf", 0.5772, 0.8327}};
    const Published alamouti[] = {{"1", 0.0, 0.0}, {"2", 0.1402, 0.2023}, {"3", 0.1847, 0.2665}, {"inf", 0.2703, 0.39}};

    std::vector<GapAuditRow> rows;
    auto add = [&](const char *table, const Published &p, SchemeKind finite, SchemeKind limit) {
        GapAuditRow row;
        row.table = table;
        row.r = p.r;
        const GapBound g = std::string(p.r) == "inf" ? gap_bound(limit, 1) : gap_bound(finite, std::stoi(p.r));
        row.nats = g.bound_nats;
        row.bits = g.bound_bits;
        row.published_nats = p.nats;
        row.published_bits = p.bits;
        rows.push_back(row);
    };
    for (const auto &p : elliptic)
        add("elliptic", p, SchemeKind::EllipticSBF, SchemeKind::GaussianSBF);
    for (const auto &p : alamouti)
        add("elliptic-alamouti", p, SchemeKind::EllipticSBFAlamouti, SchemeKind::GaussianSBFAlamouti);
    return rows;
}

void write_gap_audit(std::ostream &out, const std::vector<GapAuditRow> &rows)
{
    out << "table,r,nats,bits,published_nats,published_bits,diff_nats,diff_bits,nats_flag,bits_flag\n";
    for (const auto &r : rows)
        out << r.table << ',' << r.r << ',' << num(r.nats) << ',' << num(r.bits) << ',' << num(r.published_nats) << ','
            << num(r.published_bits) << ',' << num(r.nats - r.published_nats) << ',' << num(r.bits - r.published_bits)
            << ',' << (r.nats_match() ? "ok" : "MISMATCH") << ',' << (r.bits_match() ? "ok" : "MISMATCH") << '\n';
}

// ---------------------------------------------------------------------------
// randomization audit
// ---------------------------------------------------------------------------

std::vector<BoundAuditReport> randomization_audit(const ExperimentConfig &c)
{
    c.validate();
    RandomizationAuditConfig rc;
    rc.n_antennas = c.n_antennas;
    rc.n_users = c.users.front();
    rc.instances = c.trials;
    rc.num_rand = c.num_rand;
    rc.seed = c.seed;
    auto reports = audit_randomization(rc);

    const ChannelSet cs = generate_channels(c.n_antennas, rc.n_users, mix_seed(c.seed, {0}));
    const McSolution mc = solve_mc(cs);
    Rng rng = Rng::stream(c.seed, {~0ULL});
    auto tails = audit_tail_bounds(mc.w_star, rc.n_users, c.samples, rng);
    reports.insert(reports.end(), tails.begin(), tails.end());
    return reports;
}

void write_audit(std::ostream &out, const std::vector<BoundAuditReport> &reports)
{
    out << "bound_kind,parameter,instances,satisfaction_frequency,required_frequency,direction,sigma,satisfied\n";
    for (const auto &r : reports)
        out << to_string(r.bound_kind) << ',' << num(r.parameter) << ',' << r.instances << ','
            << num(r.satisfaction_frequency) << ',' << num(r.required_frequency) << ','
            << (r.upper_limit ? "at_most" : "at_least") << ',' << num(r.sigma()) << ',' << (r.satisfied() ? 1 : 0)
            << '\n';
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

std::vector<SimulationRow> simulate(const ExperimentConfig &c)
{
    c.validate();
    const int m = c.users.front();
    const ChannelSet cs = generate_channels(c.n_antennas, m, mix_seed(c.seed, {static_cast<std::uint64_t>(m), 0}));
    const McSolution mc = solve_mc(cs);

    std::vector<SimulationRow> rows;
    for (std::size_t s = 0; s < c.schemes.size(); ++s)
    {
        Rng rng = Rng::stream(c.seed, {static_cast<std::uint64_t>(m), 0, 1 + s});
        const SbfSampler sampler = make_sampler(c.schemes[s], mc, cs, c.num_rand, rng);
        for (std::size_t k = 0; k < c.p_db.size(); ++k)
        {
            const double p = db_to_linear(c.p_db[k]);
            const std::uint64_t run_seed = mix_seed(c.seed, {s, k});
            const FrameTrace tr = simulate_frame(sampler, cs, p, c.frame_len * c.frames, run_seed);
            const BerResult ber = uncoded_ber(sampler, cs, p, c.frames, c.frame_len, run_seed);

            SimulationRow row;
            row.scheme = to_string(c.schemes[s]);
            row.p_db = c.p_db[k];
            row.p = p;
            row.frame_len = c.frame_len;
            row.frames = c.frames;
            Eigen::Index arg = 0;
            row.empirical_rate_nats = tr.rate.minCoeff(&arg);
            row.rate_se = tr.rate_se(arg);
            row.closed_form_nats = closed_form_rate(sampler, cs, p);
            row.worst_user_ber = ber.worst_user_ber;
            row.expected_ber = ber.expected_ber(ber.worst_user);
            row.bits = ber.bits;
            row.seed = c.seed;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_simulation(std::ostream &out, const std::vector<SimulationRow> &rows)
{
    out << "scheme,p_db,p,frame_len,frames,empirical_rate_nats,rate_se,closed_form_nats,worst_user_ber,expected_ber,"
           "bits,seed\n";
    for (const auto &r : rows)
        out << r.scheme << ',' << num(r.p_db) << ',' << num(r.p) << ',' << r.frame_len << ',' << r.frames << ','
            << num(r.empirical_rate_nats) << ',' << num(r.rate_se) << ',' << num(r.closed_form_nats) << ','
            << num(r.worst_user_ber) << ',' << num(r.expected_ber) << ',' << r.bits << ',' << r.seed << '\n';
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

std::string solution_report(const McSolution &mc, const ChannelSet &channels)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["kind"] = "mc_solution";
    j["n_antennas"] = channels.n_antennas;
    j["n_users"] = channels.n_users;
    j["rank_r"] = mc.rank_r;
    j["rho_min"] = mc.rho_min;
    j["argmin_user"] = mc.argmin_user;
    j["duality_gap"] = mc.duality_gap;
    j["relative_gap"] = mc.relative_gap();
    j["iterations"] = mc.iterations;
    const RealVector ev = eig_hermitian(mc.w_star).eigenvalues;
    j["w_star_eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
    j["rho"] = std::vector<double>(mc.rho.data(), mc.rho.data() + mc.rho.size());
    j["dual_weights"] = std::vector<double>(mc.dual_weights.data(), mc.dual_weights.data() + mc.dual_weights.size());
    ordered_json re = ordered_json::array(), im = ordered_json::array();
    for (Eigen::Index i = 0; i < mc.w_star.dim(); ++i)
    {
        std::vector<double> rr, ii;
        for (Eigen::Index k = 0; k < mc.w_star.dim(); ++k)
        {
            rr.push_back(mc.w_star.matrix()(i, k).real());
            ii.push_back(mc.w_star.matrix()(i, k).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    j["w_star"] = {{"re", re}, {"im", im}};
    return j.dump(2) + "\n";
}

} // namespace mphy::cli
