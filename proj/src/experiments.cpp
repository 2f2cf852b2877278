#include "collcav/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "collcav/rng.hpp"
#include "collcav/version.hpp"

namespace collcav {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
}

StateKind state_kind_from(const std::string& s) {
    if (s == "vacuum") return StateKind::Vacuum;
    if (s == "fock_product") return StateKind::FockProduct;
    if (s == "exchange") return StateKind::Exchange;
    if (s == "pairing") return StateKind::Pairing;
    throw ConfigError("unknown state kind '" + s + "'");
}

SignMode sign_mode_from(const std::string& s) {
    if (s == "as_printed") return SignMode::AsPrinted;
    if (s == "opposite") return SignMode::Opposite;
    throw ConfigError("unknown sign mode '" + s + "'");
}

std::vector<std::pair<double, double>> load_k2_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open k2 series file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty k2 series file '" + path + "'");
    auto split = [](const std::string& text) {
        std::vector<std::string> out;
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    const auto header = split(line);
    int t_col = -1, k2_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "t" || header[c] == "time") t_col = static_cast<int>(c);
        if (header[c] == "k2") k2_col = static_cast<int>(c);
    }
    if (t_col < 0 || k2_col < 0)
        throw ConfigError("k2 series file '" + path + "' lacks t/k2 columns");
    std::vector<std::pair<double, double>> series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (static_cast<int>(cells.size()) <= std::max(t_col, k2_col))
            throw ConfigError("short row in k2 series file '" + path + "'");
        double t = 0.0, k2 = 0.0;
        try {
            t = std::stod(cells[t_col]);
            k2 = std::stod(cells[k2_col]);
        } catch (const std::exception&) {
            throw ConfigError("bad number in k2 series file '" + path + "'");
        }
        if (std::isnan(k2))
            throw ConfigError("k2 series file '" + path + "' contains nan");
        series.emplace_back(t, k2);
    }
    return series;
}

RunConfig config_from_parsed(const json& j) {
    check_keys(j, "config",
               {"model", "state", "grid", "tol", "seed", "output_dir", "decay", "closure",
                "sweep"});
    RunConfig config;
    bool decay_seed_given = false;

    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, "model", {"n_particles", "coupling", "dims"});
        if (m.contains("n_particles")) config.params.n_particles = m.at("n_particles").get<int>();
        if (m.contains("coupling")) config.params.coupling = m.at("coupling").get<double>();
        if (m.contains("dims")) {
            const auto& d = m.at("dims");
            check_keys(d, "model.dims", {"a", "b", "c"});
            if (d.contains("a")) config.params.dim_a = d.at("a").get<int>();
            if (d.contains("b")) config.params.dim_b = d.at("b").get<int>();
            if (d.contains("c")) config.params.dim_c = d.at("c").get<int>();
        }
    }
    if (j.contains("state")) {
        const auto& s = j.at("state");
        check_keys(s, "state", {"kind", "theta", "phi", "occupations"});
        if (s.contains("kind")) config.recipe.kind = state_kind_from(s.at("kind").get<std::string>());
        if (s.contains("theta")) config.recipe.theta = s.at("theta").get<double>();
        if (s.contains("phi")) config.recipe.phi = s.at("phi").get<double>();
        if (s.contains("occupations"))
            config.recipe.occupations = s.at("occupations").get<std::vector<int>>();
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "grid", {"t_max", "n_samples"});
        if (g.contains("t_max")) config.grid.t_max = g.at("t_max").get<double>();
        if (g.contains("n_samples")) config.grid.n_samples = g.at("n_samples").get<int>();
    }
    if (j.contains("tol")) config.tol = j.at("tol").get<double>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("decay")) {
        const auto& d = j.at("decay");
        check_keys(d, "decay", {"kappa", "n_traj", "seed"});
        DecayParams decay;
        decay.kappa = d.value("kappa", config.params.coupling);
        decay.n_traj = d.value("n_traj", 8);
        if (d.contains("seed")) {
            decay.seed = d.at("seed").get<std::uint64_t>();
            decay_seed_given = true;
        }
        config.decay = decay;
    }
    if (j.contains("closure")) {
        const auto& c = j.at("closure");
        check_keys(c, "closure", {"sign_mode", "k2", "k2_csv"});
        ClosureConfig closure;
        if (c.contains("sign_mode"))
            closure.sign_mode = sign_mode_from(c.at("sign_mode").get<std::string>());
        if (c.contains("k2") && c.contains("k2_csv"))
            throw ConfigError("closure: give either k2 or k2_csv, not both");
        if (c.contains("k2")) {
            const auto& k2 = c.at("k2");
            if (k2.is_string()) {
                if (k2.get<std::string>() != "from_exact")
                    throw ConfigError("closure.k2 must be a number or \"from_exact\"");
                closure.use_time_series = true;  // series filled from an exact run
            } else {
                closure.k2_constant = k2.get<double>();
                closure.has_explicit_constant = true;
            }
        }
        if (c.contains("k2_csv")) {
            closure.source_csv = c.at("k2_csv").get<std::string>();
            closure.k2_series = load_k2_csv(closure.source_csv);
            closure.use_time_series = true;
        }
        config.closure = closure;
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "sweep", {"n_values"});
        if (s.contains("n_values")) config.sweep_n = s.at("n_values").get<std::vector<int>>();
    }
    if (config.decay && !decay_seed_given) config.decay->seed = config.seed;
    return config;
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return config_from_parsed(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

namespace {

json config_to_json_value(const RunConfig& config) {
    json j;
    j["model"] = {{"n_particles", config.params.n_particles},
                  {"coupling", config.params.coupling},
                  {"dims",
                   {{"a", config.params.dim_a}, {"b", config.params.dim_b},
                    {"c", config.params.dim_c}}}};
    json state = {{"kind", to_string(config.recipe.kind)},
                  {"theta", config.recipe.theta},
                  {"phi", config.recipe.phi}};
    if (!config.recipe.occupations.empty()) state["occupations"] = config.recipe.occupations;
    j["state"] = state;
    j["grid"] = {{"t_max", config.grid.t_max}, {"n_samples", config.grid.n_samples}};
    j["tol"] = config.tol;
    j["seed"] = config.seed;
    j["output_dir"] = config.output_dir;
    if (config.decay)
        j["decay"] = {{"kappa", config.decay->kappa},
                      {"n_traj", config.decay->n_traj},
                      {"seed", config.decay->seed}};
    if (config.closure) {
        json c = {{"sign_mode", to_string(config.closure->sign_mode)}};
        if (!config.closure->source_csv.empty())
            c["k2_csv"] = config.closure->source_csv;
        else if (config.closure->use_time_series)
            c["k2"] = "from_exact";
        else if (config.closure->has_explicit_constant)
            c["k2"] = config.closure->k2_constant;
        j["closure"] = c;
    }
    j["sweep"] = {{"n_values", config.sweep_n}};
    return j;
}

}  // namespace

std::string config_to_json(const RunConfig& config) {
    return config_to_json_value(config).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Deterministic output formatting
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output dir '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

json guard_to_json(const std::vector<GuardEvent>& events) {
    json list = json::array();
    for (const auto& e : events)
        list.push_back({{"mode", e.mode}, {"time", e.time}, {"population", e.population}});
    return {{"tripped", !events.empty()}, {"threshold", 1e-3}, {"events", list}};
}

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& config,
                    const std::vector<GuardEvent>& guard_events, double wall_seconds,
                    const std::vector<std::string>& outputs) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["config"] = config_to_json_value(config);
    j["guard"] = guard_to_json(guard_events);
    j["wall_seconds"] = wall_seconds;
    j["outputs"] = outputs;
    auto out = open_out(dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

class WallTimer {
public:
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

}  // namespace

void write_series_csv(const std::string& path, const SeriesTable& table) {
    auto out = open_out(path);
    out << "t,m,k1,k2,n_photon,norm_drift";
    if (table.has_emitted) out << ",emitted";
    out << "\n";
    for (const auto& r : table.rows) {
        out << fmt(r.t) << ',' << fmt(r.m) << ',' << fmt(r.k1) << ',' << fmt(r.k2) << ','
            << fmt(r.n_photon) << ',' << fmt(r.norm_drift);
        if (table.has_emitted) out << ',' << fmt(r.emitted);
        out << "\n";
    }
}

void write_compare_csv(const std::string& path, const CompareResult& result) {
    auto out = open_out(path);
    out << "t,m_exact,m_rate,abs_error\n";
    const auto& rate = result.winning == SignMode::AsPrinted ? result.m_rate_as_printed
                                                             : result.m_rate_opposite;
    for (std::size_t k = 0; k < result.t.size(); ++k)
        out << fmt(result.t[k]) << ',' << fmt(result.m_exact[k]) << ',' << fmt(rate[k]) << ','
            << fmt(std::abs(result.m_exact[k] - rate[k])) << "\n";
}

void write_scaling_csv(const std::string& path, const ScalingReport& report) {
    auto out = open_out(path);
    out << "N,rate\n";
    for (std::size_t k = 0; k < report.n_values.size(); ++k)
        out << report.n_values[k] << ',' << fmt(report.rates[k]) << "\n";
}

// ---------------------------------------------------------------------------
// Scenario runs
// ---------------------------------------------------------------------------

namespace {

struct ExactRun {
    SpacePtr space;
    StateVector initial;
    std::vector<StateVector> samples;
    SeriesTable series;
    std::vector<GuardEvent> guard_events;
};

ExactRun execute_exact(const RunConfig& config) {
    validate(config.params);
    validate(config.grid);
    SpacePtr space = make_space(config.params);
    StateVector initial = build_state(space, config.recipe);
    const Operator h = build_interaction_hamiltonian(config.params, space);
    ExactRun run{space, initial, {}, {}, {}};
    run.samples = evolve(initial, h, config.grid, config.tol);
    run.series = observable_series(run.samples, config.grid, config.params);
    run.guard_events = truncation_guard(run.samples, config.grid);
    return run;
}

MomentState initial_moments(const RunConfig& config, const StateVector& state) {
    MomentState init;
    init.m = real_expectation(state, build_observable(config.params, state.space_ptr(),
                                                      ObservableKind::M));
    init.k1 = real_expectation(state, build_observable(config.params, state.space_ptr(),
                                                       ObservableKind::K1));
    if (config.params.n_particles >= 2)
        init.k2 = real_expectation(state, build_observable(config.params, state.space_ptr(),
                                                           ObservableKind::K2));
    return init;
}

std::vector<std::pair<double, double>> k2_series_of(const SeriesTable& series) {
    std::vector<std::pair<double, double>> out;
    out.reserve(series.rows.size());
    for (const auto& r : series.rows) out.emplace_back(r.t, r.k2);
    return out;
}

}  // namespace

RunResult run_scenario(const RunConfig& config) {
    WallTimer timer;
    ensure_dir(config.output_dir);
    ExactRun run = execute_exact(config);
    write_series_csv(config.output_dir + "/series.csv", run.series);
    RunResult result{std::move(run.series), std::move(run.guard_events), timer.seconds()};
    write_manifest(config.output_dir, "run-exact", config, result.guard_events, result.wall_seconds,
                   {"series.csv"});
    return result;
}

SeriesTable run_rates(const RunConfig& config) {
    WallTimer timer;
    validate(config.params);
    validate(config.grid);
    ensure_dir(config.output_dir);

    SpacePtr space = make_space(config.params);
    StateVector initial = build_state(space, config.recipe);
    MomentState init = initial_moments(config, initial);

    ClosureConfig closure = config.closure.value_or(ClosureConfig{});
    if (!config.closure.has_value() || (!closure.use_time_series && !closure.has_explicit_constant)) {
        if (config.params.n_particles < 2)
            throw ConfigError("run-rates with N = 1 needs an explicit closure.k2 value");
        closure.k2_constant = init.k2;
    }
    if (closure.use_time_series && closure.k2_series.empty()) {
        if (config.params.n_particles < 2)
            throw ConfigError("closure.k2 = \"from_exact\" needs N >= 2");
        ExactRun run = execute_exact(config);
        closure.k2_series = k2_series_of(run.series);
    }

    SeriesTable table = integrate_moment_equations(init, config.params, closure, config.grid);
    write_series_csv(config.output_dir + "/series.csv", table);

    RunConfig echo = config;
    echo.closure = closure;
    write_manifest(config.output_dir, "run-rates", echo, {}, timer.seconds(), {"series.csv"});
    return table;
}

RunResult run_decay(const RunConfig& config) {
    WallTimer timer;
    if (!config.decay) throw ConfigError("decay run needs a decay config section");
    validate(config.params);
    validate(config.grid);
    ensure_dir(config.output_dir);

    SpacePtr space = make_space(config.params);
    StateVector initial = build_state(space, config.recipe);
    const Operator h = build_interaction_hamiltonian(config.params, space);
    std::vector<GuardEvent> guard_events;
    SeriesTable table = evolve_with_decay(initial, h, *config.decay, config.grid, config.params,
                                          config.tol, &guard_events);
    write_series_csv(config.output_dir + "/series.csv", table);
    RunResult result{std::move(table), std::move(guard_events), timer.seconds()};
    write_manifest(config.output_dir, "decay", config, result.guard_events, result.wall_seconds,
                   {"series.csv"});
    return result;
}

// ---------------------------------------------------------------------------
// Exact vs moment comparison
// ---------------------------------------------------------------------------

CompareResult compare_exact_vs_moments(const RunConfig& config) {
    WallTimer timer;
    if (config.params.n_particles < 2)
        throw ConfigError("compare needs N >= 2 (k2 is undefined at N = 1)");
    ensure_dir(config.output_dir);

    ExactRun run = execute_exact(config);
    MomentState init = initial_moments(config, run.initial);

    ClosureConfig closure = config.closure.value_or(ClosureConfig{});
    if (closure.use_time_series && closure.k2_series.empty())
        closure.k2_series = k2_series_of(run.series);
    if (!closure.use_time_series && !closure.has_explicit_constant)
        closure.k2_constant = init.k2;

    CompareResult result;
    result.guard_events = run.guard_events;
    for (const auto& r : run.series.rows) {
        result.t.push_back(r.t);
        result.m_exact.push_back(r.m);
    }

    ClosureConfig as_printed = closure;
    as_printed.sign_mode = SignMode::AsPrinted;
    ClosureConfig opposite = closure;
    opposite.sign_mode = SignMode::Opposite;
    const SeriesTable rate_ap =
        integrate_moment_equations(init, config.params, as_printed, config.grid);
    const SeriesTable rate_op =
        integrate_moment_equations(init, config.params, opposite, config.grid);
    for (const auto& r : rate_ap.rows) result.m_rate_as_printed.push_back(r.m);
    for (const auto& r : rate_op.rows) result.m_rate_opposite.push_back(r.m);

    // The closure is a short-time statement; pick the winner on the first
    // quarter of the window (at least 3 samples).
    const double t_cut = config.grid.t_max / 4.0;
    int rows = 0;
    for (std::size_t k = 0; k < result.t.size(); ++k) {
        if (result.t[k] <= t_cut || rows < 3) {
            result.max_err_as_printed = std::max(
                result.max_err_as_printed, std::abs(result.m_exact[k] - result.m_rate_as_printed[k]));
            result.max_err_opposite = std::max(
                result.max_err_opposite, std::abs(result.m_exact[k] - result.m_rate_opposite[k]));
            ++rows;
        }
    }
    result.short_window_rows = rows;
    result.winning = result.max_err_opposite < result.max_err_as_printed ? SignMode::Opposite
                                                                         : SignMode::AsPrinted;

    write_compare_csv(config.output_dir + "/compare.csv", result);
    json report;
    report["winning_sign_mode"] = to_string(result.winning);
    report["short_window"] = {{"t_cut", t_cut}, {"rows", rows}};
    report["max_abs_error"] = {{"as_printed", result.max_err_as_printed},
                               {"opposite", result.max_err_opposite}};
    report["closure"] = {{"type", closure.use_time_series ? "time_series" : "constant"},
                         {"k2_initial", init.k2}};
    report["guard"] = guard_to_json(result.guard_events);
    {
        auto out = open_out(config.output_dir + "/report.json");
        out << report.dump(2) << "\n";
    }
    write_manifest(config.output_dir, "compare", config, result.guard_events, timer.seconds(),
                   {"compare.csv", "report.json"});
    return result;
}

// ---------------------------------------------------------------------------
// Collective N-scaling sweep
// ---------------------------------------------------------------------------

ScalingReport sweep_collective_scaling(const RunConfig& base_config,
                                       const std::vector<int>& n_values) {
    WallTimer timer;
    if (n_values.size() < 3)
        throw ConfigError("sweep needs at least 3 N values (affine fit under-determined)");
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (n_values[k] < 2)
            throw ConfigError("sweep N values must be >= 2 (k2 undefined at N = 1)");
        if (k > 0 && n_values[k] <= n_values[k - 1])
            throw ConfigError("sweep N values must be strictly increasing");
    }
    ensure_dir(base_config.output_dir);

    ScalingReport report;
    report.n_values = n_values;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        RunConfig config = base_config;
        config.params.n_particles = n_values[k];
        validate(config.params);
        SpacePtr space = make_space(config.params);
        StateVector state = build_state(space, config.recipe);
        const Operator h = build_interaction_hamiltonian(config.params, space);
        const Operator k1_op = build_observable(config.params, space, ObservableKind::K1);
        report.rates.push_back(exact_rate(state, k1_op, h));
        if (k == 0)
            report.k2_initial =
                real_expectation(state, build_observable(config.params, space, ObservableKind::K2));
    }

    // Least-squares affine fit rate(N) = slope * N + intercept.
    const std::size_t n = n_values.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = n_values[k];
        const double y = report.rates[k];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    report.slope = (n * sxy - sx * sy) / det;
    report.intercept = (sxx * sy - sx * sxy) / det;
    for (std::size_t k = 0; k < n; ++k)
        report.residual = std::max(
            report.residual,
            std::abs(report.rates[k] - (report.slope * n_values[k] + report.intercept)));

    const double eg = base_config.params.coupling;
    report.predicted_slope_as_printed = -2.0 * eg * report.k2_initial;
    report.predicted_slope_opposite = 2.0 * eg * report.k2_initial;
    if (std::abs(report.slope) < 1e-12 || std::abs(report.k2_initial) < 1e-12)
        report.measured_sign = 0;
    else
        report.measured_sign = report.slope * report.k2_initial > 0.0 ? 1 : -1;

    write_scaling_csv(base_config.output_dir + "/scaling.csv", report);
    json rj;
    rj["n_values"] = report.n_values;
    rj["rates"] = report.rates;
    rj["fit"] = {{"slope", report.slope},
                 {"intercept", report.intercept},
                 {"max_residual", report.residual}};
    rj["k2_initial"] = report.k2_initial;
    rj["predicted_slope"] = {{"as_printed", report.predicted_slope_as_printed},
                             {"opposite", report.predicted_slope_opposite}};
    rj["measured_sign"] = report.measured_sign;
    {
        auto out = open_out(base_config.output_dir + "/report.json");
        out << rj.dump(2) << "\n";
    }
    write_manifest(base_config.output_dir, "sweep-n", base_config, {}, timer.seconds(),
                   {"scaling.csv", "report.json"});
    return report;
}

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

namespace {

double sparse_max_abs(const SparseMatrix& m) {
    double worst = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

double sparse_inf_norm(const SparseMatrix& m) {
    std::vector<double> rows(m.rows(), 0.0);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            rows[it.row()] += std::abs(it.value());
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

StateVector random_state(const SpacePtr& space, CounterRng& rng) {
    DenseVector v(space->total_dim());
    for (std::int64_t i = 0; i < v.size(); ++i)
        v[i] = Complex(2.0 * rng.next_uniform() - 1.0, 2.0 * rng.next_uniform() - 1.0);
    return StateVector(space, std::move(v));
}

}  // namespace

ValidationReport validate_suite(const RunConfig& config, const ValidationHooks& hooks) {
    WallTimer timer;
    validate(config.params);
    ValidationReport report;

    // Pinned self-test geometry: oracle-dependent checks run at N = 2 with the
    // configured coupling and dims, on guard-clean short windows.
    ModelParams p2 = config.params;
    p2.n_particles = 2;
    const double eg = p2.coupling;
    const TimeGrid short_grid{0.1 / eg, 21};

    auto add = [&](const std::string& name, auto&& body) {
        CheckResult r;
        r.name = name;
        try {
            r.detail = body();
            r.pass = true;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = e.what();
        }
        report.checks.push_back(std::move(r));
    };

    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw InvariantError(msg);
    };

    add("commutator_truncation", [&] {
        double worst = 0.0;
        for (int d : {2, 3, 4}) {
            SpacePtr s = make_space({mode_c(d)});
            const Operator x = lowering_op(s, {ModeRole::Cavity, 0});
            SparseMatrix comm = (x * x.adjoint() - x.adjoint() * x).matrix();
            Eigen::MatrixXcd dense(comm);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    const double expected = r != c ? 0.0 : (r == d - 1 ? 1.0 - d : 1.0);
                    worst = std::max(worst, std::abs(dense(r, c) - expected));
                }
        }
        require(worst <= 1e-14, "commutator deviation " + std::to_string(worst));
        return "max deviation " + fmt(worst);
    });

    add("cross_mode_commutator", [&] {
        SpacePtr s = make_space({mode_a(1, 2), mode_b(1, 3)});
        const Operator x = lowering_op(s, {ModeRole::ParticleA, 1});
        const Operator y = lowering_op(s, {ModeRole::ParticleB, 1});
        double worst = sparse_max_abs((x * y.adjoint() - y.adjoint() * x).matrix());
        worst = std::max(worst, sparse_max_abs((x * y - y * x).matrix()));
        require(worst == 0.0, "cross-mode commutator " + std::to_string(worst));
        return "exactly zero";
    });

    add("hermiticity", [&] {
        SpacePtr space = make_space(p2);
        const Operator h = hooks.override_hamiltonian
                               ? *hooks.override_hamiltonian
                               : build_interaction_hamiltonian(p2, space);
        double worst = h.hermiticity_defect();
        for (auto kind : {ObservableKind::M, ObservableKind::K1, ObservableKind::K2,
                          ObservableKind::CavityPhotons})
            worst = std::max(worst, build_observable(p2, space, kind).hermiticity_defect());
        require(worst <= 1e-12, "hermiticity defect " + std::to_string(worst));
        return "max defect " + fmt(worst);
    });

    add("embedding_spectrum", [&] {
        SpacePtr s = make_space({mode_a(1, 2), mode_b(1, 3)});
        const Operator nb = number_op(s, {ModeRole::ParticleB, 1});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Eigen::MatrixXcd(nb.matrix()));
        std::vector<double> got(eig.eigenvalues().data(),
                                eig.eigenvalues().data() + eig.eigenvalues().size());
        std::vector<double> expected{0, 0, 1, 1, 2, 2};
        double worst = 0.0;
        for (std::size_t k = 0; k < expected.size(); ++k)
            worst = std::max(worst, std::abs(got[k] - expected[k]));
        require(worst <= 1e-12, "spectrum deviation " + std::to_string(worst));
        return "eigenvalue multiplicities preserved, deviation " + fmt(worst);
    });

    add("expectation_conjugate_symmetry", [&] {
        SpacePtr space = make_space(p2);
        const Operator a = lowering_op(space, {ModeRole::ParticleA, 1});
        const Operator b = lowering_op(space, {ModeRole::ParticleB, 2});
        const Operator c = lowering_op(space, {ModeRole::Cavity, 0});
        const Operator op = a * b.adjoint() + Complex(0.0, 0.7) * (c * b);
        CounterRng rng(config.seed, 101);
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            const StateVector psi = random_state(space, rng);
            worst = std::max(worst, std::abs(expectation(psi, op) -
                                             std::conj(expectation(psi, op.adjoint()))));
        }
        require(worst <= 1e-12, "conjugate symmetry deviation " + std::to_string(worst));
        return "max deviation " + fmt(worst);
    });

    add("ehrenfest_identity", [&] {
        SpacePtr space = make_space(p2);
        const Operator h = build_interaction_hamiltonian(p2, space);
        const Operator m_op = build_observable(p2, space, ObservableKind::M);
        const Operator k1_op = build_observable(p2, space, ObservableKind::K1);
        CounterRng rng(config.seed, 202);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const StateVector psi = random_state(space, rng);
            worst = std::max(worst, std::abs(exact_rate(psi, m_op, h) -
                                             eg * real_expectation(psi, k1_op)));
        }
        require(worst <= 1e-10, "Ehrenfest identity residual " + std::to_string(worst));
        return "max |exact_rate(M) - coupling*<K1>| = " + fmt(worst);
    });

    add("k2_reference_exchange", [&] {
        SpacePtr space = make_space(p2);
        const Operator k2_op = build_observable(p2, space, ObservableKind::K2);
        double worst = 0.0;
        for (double theta : {std::numbers::pi / 8, std::numbers::pi / 4, 3 * std::numbers::pi / 8})
            for (double phi : {0.0, 2.5}) {
                const StateVector psi =
                    build_state(space, {StateKind::Exchange, theta, phi, {}});
                const double expected = std::pow(std::cos(theta) * std::sin(theta), 2);
                worst = std::max(worst, std::abs(real_expectation(psi, k2_op) - expected));
            }
        require(worst <= 1e-10, "exchange k2 deviation " + std::to_string(worst));
        return "max deviation " + fmt(worst);
    });

    add("k2_reference_pairing", [&] {
        SpacePtr space = make_space(p2);
        const Operator k2_op = build_observable(p2, space, ObservableKind::K2);
        double worst = 0.0;
        for (double theta : {std::numbers::pi / 8, std::numbers::pi / 4, 3 * std::numbers::pi / 8})
            for (double phi : {0.0, 2.5}) {
                const StateVector psi =
                    build_state(space, {StateKind::Pairing, theta, phi, {}});
                const double expected = -std::pow(std::cos(theta) * std::sin(theta), 2);
                worst = std::max(worst, std::abs(real_expectation(psi, k2_op) - expected));
            }
        require(worst <= 1e-10, "pairing k2 deviation " + std::to_string(worst));
        return "max deviation " + fmt(worst);
    });

    add("k1_vanishes_on_cavity_vacuum", [&] {
        SpacePtr space = make_space(p2);
        const Operator k1_op = build_observable(p2, space, ObservableKind::K1);
        double worst = 0.0;
        for (StateKind kind : {StateKind::Vacuum, StateKind::Exchange, StateKind::Pairing}) {
            const StateVector psi = build_state(space, {kind, 0.6, 1.1, {}});
            worst = std::max(worst, std::abs(real_expectation(psi, k1_op)));
        }
        require(worst <= 1e-12, "k1 on cavity vacuum " + std::to_string(worst));
        return "max |<K1>| = " + fmt(worst);
    });

    add("permutation_symmetry", [&] {
        SpacePtr space = make_space(p2);
        // One b-excitation on particle 1 vs particle 2 (modes a1,b1,a2,b2,c).
        const StateVector psi1 =
            build_state(space, {StateKind::FockProduct, 0, 0, {0, 1, 0, 0, 0}});
        const StateVector psi2 =
            build_state(space, {StateKind::FockProduct, 0, 0, {0, 0, 0, 1, 0}});
        double worst = 0.0;
        for (auto kind : {ObservableKind::M, ObservableKind::K1, ObservableKind::K2}) {
            const Operator op = build_observable(p2, space, kind);
            worst = std::max(worst, std::abs(real_expectation(psi1, op) -
                                             real_expectation(psi2, op)));
        }
        require(worst <= 1e-12, "permutation asymmetry " + std::to_string(worst));
        return "max observable shift " + fmt(worst);
    });

    add("norm_drift_and_energy", [&] {
        SpacePtr space = make_space(p2);
        const Operator h = build_interaction_hamiltonian(p2, space);
        const StateVector psi =
            build_state(space, {StateKind::Exchange, std::numbers::pi / 4, 0, {}});
        const auto samples = evolve(psi, h, short_grid, config.tol);
        double drift = 0.0, e0 = real_expectation(samples.front(), h), ewander = 0.0;
        for (const auto& s : samples) {
            drift = std::max(drift, std::abs(s.norm() - 1.0));
            ewander = std::max(ewander, std::abs(real_expectation(s, h) - e0));
        }
        const double ebound = 1e-8 * std::max(1.0, sparse_inf_norm(h.matrix()));
        require(drift <= 1e-8, "norm drift " + std::to_string(drift));
        require(ewander <= ebound, "energy wander " + std::to_string(ewander));
        return "norm drift " + fmt(drift) + ", energy wander " + fmt(ewander);
    });

    add("truncation_guard_clean_window", [&] {
        SpacePtr space = make_space(p2);
        const Operator h = build_interaction_hamiltonian(p2, space);
        const StateVector psi =
            build_state(space, {StateKind::Exchange, std::numbers::pi / 4, 0, {}});
        const auto samples = evolve(psi, h, short_grid, config.tol);
        const auto events = truncation_guard(samples, short_grid);
        require(events.empty(),
                events.empty() ? "" : "guard tripped on mode " + events.front().mode);
        return "no monitored mode above 1e-3";
    });

    add("time_reversal", [&] {
        SpacePtr space = make_space(p2);
        const Operator h = build_interaction_hamiltonian(p2, space);
        const StateVector psi =
            build_state(space, {StateKind::Exchange, std::numbers::pi / 4, 0, {}});
        const auto forward = evolve(psi, h, short_grid, config.tol);
        const Operator hneg = Complex(-1.0, 0.0) * h;
        const auto back = evolve(forward.back(), hneg, short_grid, config.tol);
        const double fidelity = std::abs(psi.amplitudes().dot(back.back().amplitudes()));
        require(fidelity >= 1.0 - 1e-8, "fidelity " + std::to_string(fidelity));
        return "round-trip fidelity " + fmt(fidelity);
    });

    add("propagation_determinism", [&] {
        SpacePtr space = make_space(p2);
        const Operator h = build_interaction_hamiltonian(p2, space);
        const StateVector psi =
            build_state(space, {StateKind::Exchange, std::numbers::pi / 4, 0, {}});
        const auto run1 = evolve(psi, h, short_grid, config.tol);
        const auto run2 = evolve(psi, h, short_grid, config.tol);
        for (std::size_t k = 0; k < run1.size(); ++k) {
            const auto& v1 = run1[k].amplitudes();
            const auto& v2 = run2[k].amplitudes();
            for (std::int64_t i = 0; i < v1.size(); ++i)
                require(v1[i] == v2[i], "amplitudes differ at sample " + std::to_string(k));
        }
        return "two runs bitwise identical";
    });

    add("moment_closed_form", [&] {
        const MomentState init{0.5, 0.0, 0.25};
        ModelParams p4 = p2;
        p4.n_particles = 4;
        const TimeGrid grid{1.0, 11};
        ClosureConfig closure;
        closure.k2_constant = init.k2;
        closure.has_explicit_constant = true;
        closure.sign_mode = SignMode::AsPrinted;
        const SeriesTable table = integrate_moment_equations(init, p4, closure, grid);
        double worst = 0.0;
        for (const auto& r : table.rows) {
            const double expected = init.m - p4.n_particles * eg * eg * init.k2 * r.t * r.t;
            worst = std::max(worst, std::abs(r.m - expected));
        }
        closure.sign_mode = SignMode::Opposite;
        const SeriesTable flipped = integrate_moment_equations(init, p4, closure, grid);
        for (std::size_t k = 0; k < table.rows.size(); ++k)
            worst = std::max(worst, std::abs((flipped.rows[k].m - init.m) +
                                             (table.rows[k].m - init.m)));
        require(worst <= 1e-10, "moment closed-form deviation " + std::to_string(worst));
        return "closed form and sign flip reproduced, deviation " + fmt(worst);
    });

    ensure_dir(config.output_dir);
    json rj;
    rj["all_pass"] = report.all_pass();
    json list = json::array();
    for (const auto& c : report.checks)
        list.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    rj["checks"] = list;
    {
        auto out = open_out(config.output_dir + "/report.json");
        out << rj.dump(2) << "\n";
    }
    write_manifest(config.output_dir, "validate", config, {}, timer.seconds(), {"report.json"});
    return report;
}

}  // namespace collcav
