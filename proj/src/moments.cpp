#include "collcav/moments.hpp"

#include <algorithm>
#include <cmath>

namespace collcav {

const char* to_string(SignMode mode) {
    return mode == SignMode::AsPrinted ? "as_printed" : "opposite";
}

double sign_factor(SignMode mode) { return mode == SignMode::AsPrinted ? -1.0 : 1.0; }

namespace {

class Closure {
public:
    explicit Closure(const ClosureConfig& config, const TimeGrid& grid) : config_(config) {
        if (!config.use_time_series) return;
        const auto& s = config.k2_series;
        if (s.size() < 2) throw ConfigError("k2 time series needs at least 2 points");
        for (std::size_t k = 1; k < s.size(); ++k)
            if (!(s[k].first > s[k - 1].first))
                throw ConfigError("k2 time series must have strictly increasing times");
        const double eps = 1e-9 * std::max(1.0, grid.t_max);
        if (s.front().first > eps || s.back().first < grid.t_max - eps)
            throw ConfigError("k2 time series does not cover the integration window");
    }

    double operator()(double t) const {
        if (!config_.use_time_series) return config_.k2_constant;
        const auto& s = config_.k2_series;
        if (t <= s.front().first) return s.front().second;
        if (t >= s.back().first) return s.back().second;
        auto it = std::upper_bound(s.begin(), s.end(), t,
                                   [](double x, const auto& p) { return x < p.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (t - lo.first) / (hi.first - lo.first);
        return lo.second + w * (hi.second - lo.second);
    }

private:
    const ClosureConfig& config_;
};

}  // namespace

SeriesTable integrate_moment_equations(const MomentState& init, const ModelParams& params,
                                       const ClosureConfig& closure, const TimeGrid& grid) {
    validate(params);
    validate(grid);
    const Closure k2_of(closure, grid);
    const double sigma = sign_factor(closure.sign_mode);
    const double eg = params.coupling;
    const double n = static_cast<double>(params.n_particles);

    // Classical 4th-order steps; sub-sampling aligned with the grid so a
    // piecewise-linear replayed k2 keeps its kinks on step boundaries.
    const int substeps = 16;
    const double dt = grid.dt() / substeps;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    SeriesTable table;
    table.rows.reserve(grid.n_samples);
    double m = init.m;
    double k1 = init.k1;

    auto push_row = [&](double t) {
        SeriesRow row;
        row.t = t;
        row.m = m;
        row.k1 = k1;
        row.k2 = k2_of(t);
        row.n_photon = nan;
        row.norm_drift = nan;
        if (m < 0.0) table.negative_m_seen = true;
        table.rows.push_back(row);
    };

    push_row(0.0);
    for (int k = 1; k < grid.n_samples; ++k) {
        const double t0_interval = grid.time(k - 1);
        for (int s = 0; s < substeps; ++s) {
            const double t0 = t0_interval + s * dt;
            // RK4 on (m, k1); k2 enters only through the closure.
            const auto f = [&](double t, double k1v) {
                return std::pair<double, double>{eg * k1v, sigma * 2.0 * n * eg * k2_of(t)};
            };
            const auto [dm1, dk1] = f(t0, k1);
            const auto [dm2, dk2] = f(t0 + 0.5 * dt, k1 + 0.5 * dt * dk1);
            const auto [dm3, dk3] = f(t0 + 0.5 * dt, k1 + 0.5 * dt * dk2);
            const auto [dm4, dk4] = f(t0 + dt, k1 + dt * dk3);
            m += (dt / 6.0) * (dm1 + 2.0 * dm2 + 2.0 * dm3 + dm4);
            k1 += (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);
        }
        push_row(grid.time(k));
    }
    return table;
}

double short_time_expansion(const MomentState& init, const ModelParams& params,
                            SignMode sign_mode, double t) {
    if (t < 0.0) throw ConfigError("short_time_expansion: t must be >= 0");
    const double eg = params.coupling;
    return init.m + eg * init.k1 * t +
           sign_factor(sign_mode) * params.n_particles * eg * eg * init.k2 * t * t;
}

}  // namespace collcav
