#pragma once

// Command-line front end: run <scenario>, validate, plot <csv>.
// Kept in a header so the test suite can drive it in-process.

#include "poisonfb/experiments.hpp"
#include "poisonfb/report.hpp"
#include "poisonfb/validation/suite.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poisonfb::cli {

/// Parsed `run` arguments. Unset optionals fall back to the per-scenario defaults.
struct CliConfig {
    std::string scenario;
    int trials = 200;
    std::uint64_t seed = 1;
    std::optional<std::size_t> n_tx;
    double power_db = 20.0;
    double gamma_db = 5.0;
    std::optional<double> beta;
    double amplification = attacker::default_amplification;
    std::optional<double> sweep_min;
    std::optional<double> sweep_max;
    std::optional<double> sweep_step;
    std::size_t users = 5;
    int draws = 1000;
    unsigned threads = 0;
    std::string out_dir = ".";
    bool emit_plot = false;
};

/// Defaults for the figure plus overrides, validated.
inline experiments::ScenarioSpec to_spec(const CliConfig& c)
{
    using experiments::Figure;
    const auto fig = experiments::parse_figure(c.scenario);
    if (!fig)
        throw std::invalid_argument("unknown scenario '" + c.scenario + "' (expected txpower, avgsnr or minrate)");
    auto s = experiments::ScenarioSpec::defaults(*fig);
    s.trials = c.trials;
    s.seed = c.seed;
    if (c.n_tx)
        s.n_tx = *c.n_tx;
    s.power = db_to_linear(c.power_db);
    s.gamma = db_to_linear(c.gamma_db);
    s.n_legit = c.users;
    s.n_draws = c.draws;
    s.threads = c.threads;
    s.attack.norm_floor = c.beta;
    s.attack.amplification = c.amplification;

    if (c.sweep_min || c.sweep_max || c.sweep_step) {
        const double lo = c.sweep_min.value_or(s.sweep.front());
        const double hi = c.sweep_max.value_or(s.sweep.back());
        const double step = c.sweep_step.value_or(*fig == Figure::avgsnr ? 5.0 : 1.0);
        if (!(step > 0.0))
            throw std::invalid_argument("--sweep-step must be positive");
        if (!(hi >= lo))
            throw std::invalid_argument("--sweep-max must not be below --sweep-min");
        s.sweep.clear();
        // Index-based so the grid does not drift with accumulated rounding.
        for (int i = 0; lo + i * step <= hi + 1e-9 * step; ++i)
            s.sweep.push_back(lo + i * step);
    }
    s.validate();
    return s;
}

struct Outputs {
    std::string csv;
    std::string trials;
    std::string svg;
};

inline Outputs cmd_run(const CliConfig& c, std::ostream& out)
{
    const auto spec = to_spec(c);
    std::filesystem::create_directories(c.out_dir);
    const auto base = std::filesystem::path(c.out_dir) / c.scenario;
    Outputs o{base.string() + ".csv", base.string() + "_trials.csv", ""};
    const auto result = experiments::run_scenario(spec);
    experiments::write_results(result, o.csv);
    experiments::write_trials(result, o.trials);
    out << "wrote " << o.csv << "\n";
    if (c.emit_plot) {
        o.svg = base.string() + ".svg";
        experiments::render_plot(result, o.svg);
        out << "wrote " << o.svg << "\n";
    }
    return o;
}

/// Returns true when every check passes.
inline bool cmd_validate(double tolerance_scale, std::ostream& out)
{
    validation::SuiteOptions opt;
    opt.tolerance_scale = tolerance_scale;
    bool all = true;
    for (const auto& c : validation::run_all(opt)) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        all = all && c.pass;
    }
    out << (all ? "all checks passed" : "some checks FAILED") << "\n";
    return all;
}

inline std::string cmd_plot(const std::string& csv, std::string svg, std::ostream& out)
{
    const auto r = experiments::read_results(csv);
    if (svg.empty())
        svg = std::filesystem::path(csv).replace_extension(".svg").string();
    experiments::render_plot(r, svg);
    out << "wrote " << svg << "\n";
    return svg;
}

/// Reads a flat `key = value` file; '#' starts a comment. Keys are the long
/// flag names without dashes.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    auto trim = [](std::string t) {
        const auto b = t.find_first_not_of(" \t\r");
        const auto e = t.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    for (int n = 1; std::getline(f, line); ++n) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key = value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

/// For `run`, splices the --config file entries in front of the explicit
/// flags; options keep their last value, so flags win.
inline std::vector<std::string> expand_config(std::vector<std::string> args)
{
    if (args.size() < 2 || args[1] != "run")
        return args;
    std::vector<std::string> rest;
    std::vector<std::string> from_file;
    for (std::size_t i = 2; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[++i];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        else {
            rest.push_back(args[i]);
            continue;
        }
        for (const auto& [k, v] : read_config(path))
            from_file.push_back("--" + k + "=" + v);
    }
    std::vector<std::string> out{args[0], args[1]};
    out.insert(out.end(), from_file.begin(), from_file.end());
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

/// Exit status: 0 success, 1 failed checks or runtime error, 2 usage or config error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Poisoned CSI feedback against multicast beamforming: Monte Carlo experiments", "poisonfb"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CliConfig cfg;
    auto* run = app.add_subcommand("run", "Run one scenario and write <out-dir>/<scenario>.csv");
    run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run->add_option("scenario", cfg.scenario, "txpower | avgsnr | minrate")
        ->required()
        ->check(CLI::IsMember({"txpower", "avgsnr", "minrate"}));
    run->add_option("--trials", cfg.trials, "Monte Carlo trials per point (1000 for full-precision curves)")
        ->capture_default_str();
    run->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    run->add_option("--ntx", cfg.n_tx, "transmit antennas N_t [default 5; 4 for minrate]");
    run->add_option("--power-db", cfg.power_db, "transmit power P in dB (avgsnr sweeps P instead)")
        ->capture_default_str();
    run->add_option("--gamma-db", cfg.gamma_db, "SNR target gamma in dB (txpower)")->capture_default_str();
    run->add_option("--beta", cfg.beta, "attacker norm floor beta, linear [default N_t]");
    run->add_option("--amplification", cfg.amplification, "avgsnr attacker: ||h_a||^2 = amplification * beta")
        ->capture_default_str();
    run->add_option("--sweep-min", cfg.sweep_min, "first x value [default 2 txpower, 0 dB avgsnr, 3 minrate]");
    run->add_option("--sweep-max", cfg.sweep_max, "last x value [default 8 txpower, 30 dB avgsnr, 9 minrate]");
    run->add_option("--sweep-step", cfg.sweep_step, "x spacing [default 1; 5 dB for avgsnr]");
    run->add_option("--users", cfg.users, "legitimate receivers K~ (avgsnr)")->capture_default_str();
    run->add_option("--draws", cfg.draws, "Gaussian randomization draws per relaxed solve")->capture_default_str();
    run->add_option("--threads", cfg.threads, "worker threads; 0 reads POISONFB_THREADS, then the core count")
        ->capture_default_str();
    run->add_option("--out-dir", cfg.out_dir, "output directory")->capture_default_str();
    run->add_flag("--emit-plot", cfg.emit_plot, "also write <out-dir>/<scenario>.svg");
    std::string config_path;
    run->add_option("--config", config_path, "flat key = value file using the long flag names; flags win");

    double tolerance_scale = 1.0;
    auto* validate = app.add_subcommand("validate", "Check the numerics against brute-force oracles");
    validate->add_option("--tolerance-scale", tolerance_scale)->group("");

    std::string plot_csv;
    std::string plot_svg;
    auto* plot = app.add_subcommand("plot", "Render a results CSV as SVG");
    plot->add_option("csv", plot_csv, "results CSV written by run")->required()->check(CLI::ExistingFile);
    plot->add_option("-o,--out", plot_svg, "SVG path [default: the CSV path with .svg]");

    std::vector<std::string> args;
    try {
        args = expand_config(std::vector<std::string>(argv, argv + argc));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    std::vector<const char*> cargs;
    for (const auto& a : args)
        cargs.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            cmd_run(cfg, out);
            return 0;
        }
        if (*validate)
            return cmd_validate(tolerance_scale, out) ? 0 : 1;
        if (*plot) {
            cmd_plot(plot_csv, plot_svg, out);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace poisonfb::cli
