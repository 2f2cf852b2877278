#ifndef COLLCAV_EXPERIMENTS_HPP
#define COLLCAV_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collcav/dynamics.hpp"
#include "collcav/moments.hpp"
#include "collcav/states.hpp"

namespace collcav {

// Full run description. The JSON schema is documented in the README; every
// field has a default so a config file only states what it overrides.
struct RunConfig {
    ModelParams params{2, 0.1, 2, 3, 3};
    StateRecipe recipe;
    TimeGrid grid{20.0, 201};  // coupling * t_max = 2 at the default coupling
    double tol = 1e-8;
    std::optional<DecayParams> decay;
    std::optional<ClosureConfig> closure;
    std::vector<int> sweep_n{2, 3, 4, 5, 6};
    std::string output_dir = ".";
    std::uint64_t seed = 0;
};

RunConfig config_from_json(const std::string& text);  // ConfigError on bad input
std::string config_to_json(const RunConfig& config);  // resolved echo, 2-space indent

// ---------------------------------------------------------------------------
// Scenario runs
// ---------------------------------------------------------------------------

struct RunResult {
    SeriesTable series;
    std::vector<GuardEvent> guard_events;  // non-empty => truncation guard tripped
    double wall_seconds = 0.0;
};

// Exact propagation of the configured recipe. Writes series.csv (columns
// exactly t,m,k1,k2,n_photon,norm_drift) and manifest.json into output_dir.
// A tripped truncation guard is reported in the result and the manifest, not
// thrown: the outputs are still written in full.
RunResult run_scenario(const RunConfig& config);

// Moment-equation integration. The initial (m, k1, k2) is measured on the
// configured recipe's exact initial state; the closure defaults to constant
// k2(0) with sign mode AsPrinted unless the config overrides it. Writes
// series.csv (n_photon, norm_drift columns NaN) and manifest.json.
SeriesTable run_rates(const RunConfig& config);

// Trajectory-averaged decay run; requires config.decay. Writes series.csv
// with the additional emitted column, and manifest.json.
RunResult run_decay(const RunConfig& config);

// ---------------------------------------------------------------------------
// Exact vs moment comparison
// ---------------------------------------------------------------------------

struct CompareResult {
    std::vector<double> t;
    std::vector<double> m_exact;
    std::vector<double> m_rate_as_printed;
    std::vector<double> m_rate_opposite;
    SignMode winning = SignMode::AsPrinted;
    double max_err_as_printed = 0.0;  // over the short-time window
    double max_err_opposite = 0.0;
    int short_window_rows = 0;        // samples with t <= t_max/4 used to pick the winner
    std::vector<GuardEvent> guard_events;
};

// Runs the exact simulator, feeds the measured k2(0) into the moment
// integrator under both sign modes (constant closure, or the exact k2 series
// when the config's closure requests a time series) and identifies the sign
// mode that tracks the exact m(t) at short times. Writes compare.csv
// (t,m_exact,m_rate,abs_error for the winning mode) and report.json.
CompareResult compare_exact_vs_moments(const RunConfig& config);

// ---------------------------------------------------------------------------
// Collective N-scaling sweep
// ---------------------------------------------------------------------------

struct ScalingReport {
    std::vector<int> n_values;
    std::vector<double> rates;  // exact d<K1>/dt at t = 0 per N
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;      // max |rate - fit|
    double k2_initial = 0.0;
    double predicted_slope_as_printed = 0.0;  // -2 coupling k2(0)
    double predicted_slope_opposite = 0.0;    // +2 coupling k2(0)
    int measured_sign = 0;      // sign(slope * k2(0)); +1 means Opposite wins
};

// For each N, builds the same per-particle recipe and computes the exact
// initial k1 rate algebraically via exact_rate (no time stepping), then fits
// rate(N) = slope * N + intercept by least squares. Writes scaling.csv and
// report.json. Requires >= 3 values, each >= 2.
ScalingReport sweep_collective_scaling(const RunConfig& base_config,
                                       const std::vector<int>& n_values);

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
};

// Test-harness injection points for deliberately broken inputs.
struct ValidationHooks {
    const Operator* override_hamiltonian = nullptr;  // used by the Hermiticity check
};

// Bundles the module invariants (commutators, Hermiticity, Ehrenfest, norm
// drift, k2 reference values, determinism, ...) into named checks. Failures
// are report content, not exceptions. Writes report.json into output_dir.
ValidationReport validate_suite(const RunConfig& config, const ValidationHooks& hooks = {});

// ---------------------------------------------------------------------------
// Output helpers (deterministic formatting: %.16e scientific, 17 significant
// digits; NaN renders as "nan")
// ---------------------------------------------------------------------------

void write_series_csv(const std::string& path, const SeriesTable& table);
void write_compare_csv(const std::string& path, const CompareResult& result);
void write_scaling_csv(const std::string& path, const ScalingReport& report);

}  // namespace collcav

#endif
