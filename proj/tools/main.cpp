#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "collcav/experiments.hpp"
#include "collcav/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "JSON run configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", args.seed, "64-bit seed (overrides the config)");
    sub->add_flag("--quiet", args.quiet, "suppress the progress summary");
}

collcav::RunConfig load_config(const CommonArgs& args, bool seed_given) {
    collcav::RunConfig config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw collcav::ConfigError("cannot open config file '" + args.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        config = collcav::config_from_json(ss.str());
    }
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (seed_given) {
        config.seed = args.seed;
        if (config.decay) config.decay->seed = args.seed;
    }
    return config;
}

void warn_guard(const std::vector<collcav::GuardEvent>& events) {
    for (const auto& e : events)
        std::fprintf(stderr,
                     "warning: truncation guard: mode %s top-level population %.3e at t = %.6g; "
                     "results near the truncation boundary are unphysical\n",
                     e.mode.c_str(), e.population, e.time);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collcav: exact and moment-equation dynamics of cavity-coupled particles"};
    app.set_version_flag("--version", collcav::kVersion);
    app.require_subcommand(1);

    CommonArgs args;

    CLI::App* cmd_validate = app.add_subcommand("validate", "run the invariant validation suite");
    CLI::App* cmd_exact = app.add_subcommand("run-exact", "exact propagation of the configured recipe");
    CLI::App* cmd_rates = app.add_subcommand("run-rates", "moment-equation integration");
    CLI::App* cmd_compare = app.add_subcommand("compare", "exact vs moment-equation comparison");
    CLI::App* cmd_sweep = app.add_subcommand("sweep-n", "collective N-scaling sweep of the k1 rate");
    CLI::App* cmd_decay = app.add_subcommand("decay", "trajectory-averaged cavity-decay run");
    for (CLI::App* sub : {cmd_validate, cmd_exact, cmd_rates, cmd_compare, cmd_sweep, cmd_decay})
        add_common(sub, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    bool seed_given = false;
    for (const CLI::App* sub : app.get_subcommands())
        if (const CLI::Option* opt = sub->get_option_no_throw("--seed"); opt && opt->count())
            seed_given = true;

    try {
        const collcav::RunConfig config = load_config(args, seed_given);

        if (cmd_validate->parsed()) {
            const auto report = collcav::validate_suite(config);
            if (!args.quiet)
                for (const auto& c : report.checks)
                    std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                                c.detail.c_str());
            std::printf("validate: %zu checks, %s\n", report.checks.size(),
                        report.all_pass() ? "all passed" : "FAILURES");
            return report.all_pass() ? 0 : 1;
        }
        if (cmd_exact->parsed()) {
            const auto result = collcav::run_scenario(config);
            warn_guard(result.guard_events);
            if (!args.quiet)
                std::printf("run-exact: %zu rows, m(t_max) = %.6g, wall %.2fs -> %s/series.csv\n",
                            result.series.size(), result.series.rows.back().m,
                            result.wall_seconds, config.output_dir.c_str());
            return result.guard_events.empty() ? 0 : 1;
        }
        if (cmd_rates->parsed()) {
            const auto table = collcav::run_rates(config);
            if (!args.quiet)
                std::printf("run-rates: %zu rows, m(t_max) = %.6g -> %s/series.csv\n",
                            table.size(), table.rows.back().m, config.output_dir.c_str());
            return 0;
        }
        if (cmd_compare->parsed()) {
            const auto result = collcav::compare_exact_vs_moments(config);
            warn_guard(result.guard_events);
            if (!args.quiet)
                std::printf("compare: winning sign mode %s, short-window max error %0.3e "
                            "(losing %0.3e) -> %s/compare.csv\n",
                            collcav::to_string(result.winning),
                            std::min(result.max_err_as_printed, result.max_err_opposite),
                            std::max(result.max_err_as_printed, result.max_err_opposite),
                            config.output_dir.c_str());
            return result.guard_events.empty() ? 0 : 1;
        }
        if (cmd_sweep->parsed()) {
            const auto report = collcav::sweep_collective_scaling(config, config.sweep_n);
            if (!args.quiet)
                std::printf("sweep-n: slope %.6g, intercept %.6g, max residual %.3e, "
                            "measured sign %+d -> %s/scaling.csv\n",
                            report.slope, report.intercept, report.residual,
                            report.measured_sign, config.output_dir.c_str());
            return 0;
        }
        if (cmd_decay->parsed()) {
            collcav::RunConfig decay_config = config;
            if (!decay_config.decay) {
                collcav::DecayParams decay;
                decay.kappa = decay_config.params.coupling;
                decay.n_traj = 8;
                decay.seed = decay_config.seed;
                decay_config.decay = decay;
            }
            const auto result = collcav::run_decay(decay_config);
            warn_guard(result.guard_events);
            if (!args.quiet)
                std::printf("decay: kappa = %.6g, %d trajectories, emitted(t_max) = %.6g, "
                            "m: %.6g -> %.6g, wall %.2fs -> %s/series.csv\n",
                            decay_config.decay->kappa, decay_config.decay->n_traj,
                            result.series.rows.back().emitted, result.series.rows.front().m,
                            result.series.rows.back().m, result.wall_seconds,
                            decay_config.output_dir.c_str());
            return result.guard_events.empty() ? 0 : 1;
        }
        return 2;  // unreachable: a subcommand is required
    } catch (const collcav::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const collcav::InvariantError& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
