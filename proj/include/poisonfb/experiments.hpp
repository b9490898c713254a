#pragma once

// Monte Carlo harness for the three figure scenarios. Every (x, trial) cell
// is a pure function of the ScenarioSpec and its counter-addressed random streams,
// so cells can run on any number of workers and are reduced in index order.

#include "poisonfb/attacker.hpp"
#include "poisonfb/model.hpp"
#include "poisonfb/transmitter.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace poisonfb::experiments {

enum class Figure { txpower, avgsnr, minrate };

inline std::string_view to_string(Figure f)
{
    switch (f) {
    case Figure::txpower: return "txpower";
    case Figure::avgsnr: return "avgsnr";
    case Figure::minrate: return "minrate";
    }
    return "unknown";
}

inline std::optional<Figure> parse_figure(std::string_view name)
{
    for (Figure f : {Figure::txpower, Figure::avgsnr, Figure::minrate})
        if (to_string(f) == name)
            return f;
    return std::nullopt;
}

/// Curve names in CSV order.
inline std::vector<std::string> curve_names(Figure f)
{
    if (f == Figure::minrate)
        return {"honest", "poisoned", "open_loop"};
    return {"honest", "poisoned"};
}

struct ScenarioSpec {
    Figure figure = Figure::txpower;
    /// K (total reported receivers) for txpower/minrate, P in dB for avgsnr.
    std::vector<double> sweep;
    std::size_t n_tx = 5;
    /// Linear P; ignored by avgsnr, which sweeps it.
    double power = 100.0;
    /// Linear gamma (txpower only).
    double gamma = 3.1622776601683795;
    double noise = 1.0;
    /// K~ for avgsnr.
    std::size_t n_legit = 5;
    int trials = 200;
    std::uint64_t seed = 1;
    attacker::AttackConfig attack{};
    int n_draws = 1000;
    /// Worker count; 0 reads POISONFB_THREADS, then the hardware count.
    unsigned threads = 0;

    /// Reference setup for a figure: gamma = 5 dB, P = 20 dB, sigma^2 = 1,
    /// N_t = 5 (txpower, avgsnr) or 4 (minrate), attack matching the figure.
    static ScenarioSpec defaults(Figure f)
    {
        ScenarioSpec s;
        s.figure = f;
        switch (f) {
        case Figure::txpower:
            s.sweep = {2, 3, 4, 5, 6, 7, 8};
            s.attack.strategy = attacker::Strategy::power_drain;
            break;
        case Figure::avgsnr:
            s.sweep = {0, 5, 10, 15, 20, 25, 30};
            s.attack.strategy = attacker::Strategy::orthogonal_starvation;
            break;
        case Figure::minrate:
            s.n_tx = 4;
            s.sweep = {3, 4, 5, 6, 7, 8, 9};
            s.attack.strategy = attacker::Strategy::maxmin_poison;
            break;
        }
        return s;
    }

    void validate() const
    {
        if (trials < 1)
            throw std::invalid_argument("ScenarioSpec: trials must be >= 1");
        if (sweep.empty())
            throw std::invalid_argument("ScenarioSpec: sweep is empty");
        for (std::size_t i = 1; i < sweep.size(); ++i)
            if (!(sweep[i] > sweep[i - 1]))
                throw std::invalid_argument("ScenarioSpec: sweep must be strictly increasing");
        if (n_tx < 1 || !(power > 0.0) || !(gamma > 0.0) || !(noise > 0.0) || n_legit < 1 || n_draws < 1)
            throw std::invalid_argument("ScenarioSpec: N_t, P, gamma, sigma^2, K~ and draws must be positive");
        if (figure != Figure::avgsnr)
            for (double k : sweep)
                if (k < 2.0 || k != std::floor(k) || k > 64.0)
                    throw std::invalid_argument("ScenarioSpec: K must be an integer in [2, 64]");
        attack.validate();
    }
};

struct TrialRecord {
    std::size_t trial = 0;
    double x = 0.0;
    /// One entry per curve, in curve_names order. NaN where outage.
    std::vector<double> values;
    std::vector<bool> outage;
    /// Attacker's own prediction of its objective vs what the transmitter
    /// actually produced (txpower: required power, minrate: legitimate min
    /// SNR). NaN when not applicable.
    double attack_predicted = std::nan("");
    double attack_realized = std::nan("");
};

struct Aggregate {
    double mean = std::nan("");
    double stderr_ = std::nan("");
    double outage_frac = 0.0;
    int ok = 0;
};

struct ScenarioResult {
    Figure figure = Figure::txpower;
    std::vector<std::string> curves;
    std::vector<double> xs;
    /// [x index][curve index]
    std::vector<std::vector<Aggregate>> points;
    int trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    /// [x index * trials + trial]; empty when loaded from CSV.
    std::vector<TrialRecord> records;
};

/// FNV-1a over a canonical rendering of every field that affects output.
inline std::uint64_t config_hash(const ScenarioSpec& s)
{
    std::string text;
    char buf[64];
    auto add = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g;", v);
        text += buf;
    };
    text += to_string(s.figure);
    text += ';';
    for (double x : s.sweep)
        add(x);
    add(static_cast<double>(s.n_tx));
    add(s.power);
    add(s.gamma);
    add(s.noise);
    add(static_cast<double>(s.n_legit));
    add(s.trials);
    add(static_cast<double>(s.seed));
    add(s.n_draws);
    text += attacker::to_string(s.attack.strategy);
    add(s.attack.beta(s.n_tx));
    add(s.attack.amplification);
    add(s.attack.max_iters());
    add(s.attack.line_search_steps);
    add(s.attack.step_scale);
    add(s.attack.stop_tol);
    add(s.attack.n_starts);
    add(s.attack.inner_draws);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Mean over the non-outage entries, standard error of that mean, outage fraction.
inline Aggregate aggregate(const std::vector<double>& values, const std::vector<bool>& outage)
{
    Aggregate a;
    double sum = 0.0;
    int bad = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (outage[i]) {
            ++bad;
            continue;
        }
        sum += values[i];
        ++a.ok;
    }
    a.outage_frac = values.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(values.size());
    if (a.ok == 0)
        return a;
    a.mean = sum / a.ok;
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!outage[i])
            ss += (values[i] - a.mean) * (values[i] - a.mean);
    a.stderr_ = a.ok > 1 ? std::sqrt(ss / (a.ok - 1) / a.ok) : 0.0;
    return a;
}

namespace detail {

// Stream coordinates: channels depend on (trial, user) only, so the K users
// at one sweep point are a prefix of those at the next; solver and attacker
// randomness depend on (x index, trial, purpose).
enum Purpose : std::uint32_t { honest_solver = 1, poisoned_solver = 2, attack = 3 };

inline RandomStream channel_stream(const ScenarioSpec& s, std::size_t trial, std::size_t user)
{
    return RandomStream(s.seed, 0, static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(user));
}

inline RandomStream cell_stream(const ScenarioSpec& s, std::size_t xi, std::size_t trial, Purpose p)
{
    return RandomStream(s.seed, static_cast<std::uint32_t>(xi + 1), static_cast<std::uint32_t>(trial), p);
}

inline ChannelMatrix draw_users(const ScenarioSpec& s, std::size_t trial, std::size_t count)
{
    std::vector<ChannelVector> rows;
    rows.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        rows.push_back(generate_channel(channel_stream(s, trial, k), s.n_tx));
    return ChannelMatrix(std::move(rows));
}

inline double mean_snr(const ChannelMatrix& h, const Beamformer& u, double noise)
{
    double acc = 0.0;
    for (double v : snr_all(h, u, noise))
        acc += v;
    return acc / static_cast<double>(h.size());
}

inline TrialRecord run_txpower(const ScenarioSpec& s, std::size_t xi, std::size_t trial)
{
    const auto k = static_cast<std::size_t>(s.sweep[xi]);
    const ChannelMatrix all = draw_users(s, trial, k);
    TrialRecord r{trial, s.sweep[xi], std::vector<double>(2, std::nan("")), std::vector<bool>(2, true)};

    const auto honest = transmitter::solve_power_min(all, s.gamma, s.noise, s.power,
                                                     {s.n_draws, cell_stream(s, xi, trial, honest_solver), {}});
    if (honest.feasible) {
        r.values[0] = honest.required_power / s.power;
        r.outage[0] = false;
    }

    const ChannelMatrix legit = all.leading(k - 1);
    const auto forged = attacker::forge(legit, {s.gamma, s.power, s.noise}, s.attack,
                                        cell_stream(s, xi, trial, attack));
    if (!forged) {
        r.values[1] = r.values[0];
        r.outage[1] = r.outage[0];
        return r;
    }
    const auto poisoned = transmitter::solve_power_min(legit.with_adversary(forged->reported_channel), s.gamma,
                                                       s.noise, s.power,
                                                       {s.n_draws, cell_stream(s, xi, trial, poisoned_solver), {}});
    if (poisoned.feasible) {
        r.values[1] = poisoned.required_power / s.power;
        r.outage[1] = false;
    }
    if (s.attack.strategy == attacker::Strategy::power_drain) {
        r.attack_predicted = forged->attacker_objective;
        r.attack_realized = poisoned.required_power;
    }
    return r;
}

inline TrialRecord run_avgsnr(const ScenarioSpec& s, std::size_t xi, std::size_t trial)
{
    const double power = db_to_linear(s.sweep[xi]);
    const ChannelMatrix legit = draw_users(s, trial, s.n_legit);
    TrialRecord r{trial, s.sweep[xi], std::vector<double>(2, std::nan("")), std::vector<bool>(2, false)};
    r.values[0] = mean_snr(legit, transmitter::solve_max_avg_snr(legit, power, s.noise), s.noise);

    const auto forged = attacker::forge(legit, {s.gamma, power, s.noise}, s.attack,
                                        cell_stream(s, xi, trial, attack));
    if (!forged) {
        r.values[1] = r.values[0];
        return r;
    }
    const auto u = transmitter::solve_max_avg_snr(legit.with_adversary(forged->reported_channel), power, s.noise);
    r.values[1] = mean_snr(legit, u, s.noise);
    return r;
}

inline TrialRecord run_minrate(const ScenarioSpec& s, std::size_t xi, std::size_t trial)
{
    const auto k = static_cast<std::size_t>(s.sweep[xi]);
    const ChannelMatrix all = draw_users(s, trial, k);
    TrialRecord r{trial, s.sweep[xi], std::vector<double>(3, std::nan("")), std::vector<bool>(3, true)};

    const auto honest = transmitter::solve_max_min_sdr(all, s.power, s.noise,
                                                       {s.n_draws, cell_stream(s, xi, trial, honest_solver), {}});
    if (honest.converged) {
        r.values[0] = transmitter::min_rate_objective(all, honest.beamformer, s.noise);
        r.outage[0] = false;
    }

    double open_loop = std::numeric_limits<double>::infinity();
    for (const auto& row : all.rows())
        open_loop = std::min(open_loop, isotropic_baseline_snr(row, s.power, s.n_tx, s.noise));
    r.values[2] = std::log2(1.0 + open_loop);
    r.outage[2] = false;

    const ChannelMatrix legit = all.leading(k - 1);
    const auto forged = attacker::forge(legit, {s.gamma, s.power, s.noise}, s.attack,
                                        cell_stream(s, xi, trial, attack));
    if (!forged) {
        r.values[1] = r.values[0];
        r.outage[1] = r.outage[0];
        return r;
    }
    const auto poisoned = transmitter::solve_max_min_sdr(legit.with_adversary(forged->reported_channel), s.power,
                                                         s.noise,
                                                         {s.n_draws, cell_stream(s, xi, trial, poisoned_solver), {}});
    if (poisoned.converged) {
        r.values[1] = transmitter::min_rate_objective(legit, poisoned.beamformer, s.noise);
        r.outage[1] = false;
    }
    if (s.attack.strategy == attacker::Strategy::maxmin_poison) {
        r.attack_predicted = forged->attacker_objective;
        r.attack_realized = min_snr(legit, poisoned.beamformer, s.noise);
    }
    return r;
}

inline TrialRecord run_trial(const ScenarioSpec& s, std::size_t xi, std::size_t trial)
{
    try {
        switch (s.figure) {
        case Figure::txpower: return run_txpower(s, xi, trial);
        case Figure::avgsnr: return run_avgsnr(s, xi, trial);
        case Figure::minrate: return run_minrate(s, xi, trial);
        }
    } catch (const std::exception&) {
        // Any solver failure is an outage for every curve of this cell.
    }
    const std::size_t nc = curve_names(s.figure).size();
    return {trial, s.sweep[xi], std::vector<double>(nc, std::nan("")), std::vector<bool>(nc, true)};
}

inline unsigned worker_count(unsigned requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("POISONFB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace detail

/// Runs every (x, trial) cell and reduces per curve. Worker count never
/// changes the result.
inline ScenarioResult run_scenario(const ScenarioSpec& spec)
{
    spec.validate();
    const std::size_t nx = spec.sweep.size();
    const auto nt = static_cast<std::size_t>(spec.trials);
    std::vector<TrialRecord> records(nx * nt);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++)
            records[i] = detail::run_trial(spec, i / nt, i % nt);
    };
    const unsigned workers = std::min<unsigned>(detail::worker_count(spec.threads),
                                                static_cast<unsigned>(records.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }

    ScenarioResult out;
    out.figure = spec.figure;
    out.curves = curve_names(spec.figure);
    out.xs = spec.sweep;
    out.trials = spec.trials;
    out.seed = spec.seed;
    out.config_hash = config_hash(spec);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        std::vector<Aggregate> row;
        for (std::size_t c = 0; c < out.curves.size(); ++c) {
            std::vector<double> v(nt);
            std::vector<bool> o(nt);
            for (std::size_t t = 0; t < nt; ++t) {
                v[t] = records[xi * nt + t].values[c];
                o[t] = records[xi * nt + t].outage[c];
            }
            row.push_back(aggregate(v, o));
        }
        out.points.push_back(std::move(row));
    }
    out.records = std::move(records);
    return out;
}

} // namespace poisonfb::experiments
