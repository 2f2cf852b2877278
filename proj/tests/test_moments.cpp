#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "collcav/moments.hpp"

using namespace collcav;

namespace {

ModelParams params_n(int n) { return {n, 0.1, 2, 3, 3}; }

ClosureConfig constant_closure(SignMode mode, double k2) {
    ClosureConfig c;
    c.sign_mode = mode;
    c.k2_constant = k2;
    c.has_explicit_constant = true;
    return c;
}

}  // namespace

TEST_CASE("frozen worked example: N=4, coupling 0.1, k2 = 1/4") {
    // Analytic solution with k1(0) = 0: m(t) = m(0) - 0.01 t^2.
    const MomentState init{1.0, 0.0, 0.25};
    const TimeGrid grid{1.0, 11};
    const auto table = integrate_moment_equations(
        init, params_n(4), constant_closure(SignMode::AsPrinted, 0.25), grid);
    REQUIRE(table.size() == 11);
    CHECK(std::abs(table.rows.back().m - 0.99) <= 1e-12);
    CHECK(std::abs(table.rows.back().k1 - (-0.2)) <= 1e-12);
    for (const auto& row : table.rows) {
        CHECK(std::abs(row.m - (1.0 - 0.01 * row.t * row.t)) <= 1e-12);
        CHECK(row.k2 == 0.25);
        CHECK(std::isnan(row.n_photon));
        CHECK(std::isnan(row.norm_drift));
    }
    CHECK(!table.has_emitted);
    CHECK(!table.negative_m_seen);
}

TEST_CASE("sign mode flips the quadratic response") {
    const MomentState init{1.0, 0.0, 0.25};
    const TimeGrid grid{1.0, 11};
    const auto printed = integrate_moment_equations(
        init, params_n(4), constant_closure(SignMode::AsPrinted, 0.25), grid);
    const auto opposite = integrate_moment_equations(
        init, params_n(4), constant_closure(SignMode::Opposite, 0.25), grid);
    CHECK(std::abs(opposite.rows.back().m - 1.01) <= 1e-12);
    for (std::size_t k = 0; k < printed.size(); ++k) {
        const double dm_p = printed.rows[k].m - init.m;
        const double dm_o = opposite.rows[k].m - init.m;
        CHECK(std::abs(dm_p + dm_o) <= 1e-15);
    }
}

TEST_CASE("zero k2 gives uniform k1 and linear m") {
    const MomentState init{0.5, 0.3, 0.0};
    const TimeGrid grid{4.0, 9};
    const auto table = integrate_moment_equations(
        init, params_n(2), constant_closure(SignMode::AsPrinted, 0.0), grid);
    for (const auto& row : table.rows) {
        CHECK(std::abs(row.k1 - 0.3) <= 1e-15);
        CHECK(std::abs(row.m - (0.5 + 0.1 * 0.3 * row.t)) <= 1e-14);
    }
}

TEST_CASE("quadratic term scales linearly with N") {
    const MomentState init{1.0, 0.0, 0.25};
    const TimeGrid grid{2.0, 5};
    const auto n2 = integrate_moment_equations(
        init, params_n(2), constant_closure(SignMode::Opposite, 0.25), grid);
    const auto n4 = integrate_moment_equations(
        init, params_n(4), constant_closure(SignMode::Opposite, 0.25), grid);
    for (std::size_t k = 1; k < n2.size(); ++k) {
        const double dm2 = n2.rows[k].m - init.m;
        const double dm4 = n4.rows[k].m - init.m;
        CHECK(dm4 / dm2 == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("short-time expansion matches the constant-k2 integrator") {
    const MomentState init{0.8, -0.2, 0.15};
    const TimeGrid grid{1.5, 16};
    for (SignMode mode : {SignMode::AsPrinted, SignMode::Opposite}) {
        const auto table = integrate_moment_equations(
            init, params_n(3), constant_closure(mode, 0.15), grid);
        for (const auto& row : table.rows)
            CHECK(std::abs(row.m - short_time_expansion(init, params_n(3), mode, row.t)) <=
                  1e-12);
    }
    CHECK_THROWS_AS(short_time_expansion(init, params_n(3), SignMode::AsPrinted, -0.5),
                    ConfigError);
}

TEST_CASE("replaying a constant table reproduces the constant closure") {
    const MomentState init{1.0, 0.1, 0.25};
    const TimeGrid grid{1.0, 6};
    ClosureConfig replay;
    replay.sign_mode = SignMode::Opposite;
    replay.use_time_series = true;
    replay.k2_series = {{0.0, 0.25}, {0.4, 0.25}, {1.0, 0.25}};
    const auto a = integrate_moment_equations(init, params_n(2), replay, grid);
    const auto b = integrate_moment_equations(
        init, params_n(2), constant_closure(SignMode::Opposite, 0.25), grid);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.rows[k].m == b.rows[k].m);
        CHECK(a.rows[k].k1 == b.rows[k].k1);
    }
}

TEST_CASE("linear-ramp table integrates to the cubic solution") {
    // k2(t) = t: k1(t) = sign 2 N c t^2 / 2, m(t) = m0 + sign N c^2 t^3 / 3.
    const MomentState init{0.0, 0.0, 0.0};
    const TimeGrid grid{2.0, 21};
    ClosureConfig replay;
    replay.sign_mode = SignMode::Opposite;
    replay.use_time_series = true;
    replay.k2_series = {{0.0, 0.0}, {2.0, 2.0}};
    const auto table = integrate_moment_equations(init, params_n(3), replay, grid);
    for (const auto& row : table.rows) {
        const double t = row.t;
        CHECK(std::abs(row.k1 - 3.0 * 0.1 * t * t) <= 1e-12);
        CHECK(std::abs(row.m - 3.0 * 0.01 * t * t * t / 3.0) <= 1e-12);
        CHECK(std::abs(row.k2 - t) <= 1e-12);
    }
}

TEST_CASE("time-series closures are validated") {
    const MomentState init{1.0, 0.0, 0.25};
    const TimeGrid grid{1.0, 5};
    ClosureConfig bad;
    bad.use_time_series = true;

    bad.k2_series = {{0.0, 0.25}};
    CHECK_THROWS_AS(integrate_moment_equations(init, params_n(2), bad, grid), ConfigError);

    bad.k2_series = {{0.0, 0.25}, {0.0, 0.3}};
    CHECK_THROWS_AS(integrate_moment_equations(init, params_n(2), bad, grid), ConfigError);

    bad.k2_series = {{0.0, 0.25}, {0.5, 0.3}};  // stops short of t_max
    CHECK_THROWS_AS(integrate_moment_equations(init, params_n(2), bad, grid), ConfigError);

    bad.k2_series = {{0.2, 0.25}, {1.0, 0.3}};  // starts after t = 0
    CHECK_THROWS_AS(integrate_moment_equations(init, params_n(2), bad, grid), ConfigError);
}

TEST_CASE("parameter and grid validation propagate") {
    const MomentState init{1.0, 0.0, 0.0};
    const auto closure = constant_closure(SignMode::AsPrinted, 0.0);
    CHECK_THROWS_AS(
        integrate_moment_equations(init, {0, 0.1, 2, 3, 3}, closure, {1.0, 5}),
        ConfigError);
    CHECK_THROWS_AS(
        integrate_moment_equations(init, {2, -0.1, 2, 3, 3}, closure, {1.0, 5}),
        ConfigError);
    CHECK_THROWS_AS(
        integrate_moment_equations(init, params_n(2), closure, {0.0, 5}), ConfigError);
    CHECK_THROWS_AS(
        integrate_moment_equations(init, params_n(2), closure, {1.0, 1}), ConfigError);
}

TEST_CASE("negative m sets the diagnostic flag") {
    const MomentState init{0.01, -1.0, 0.0};
    const auto table = integrate_moment_equations(
        init, params_n(2), constant_closure(SignMode::AsPrinted, 0.0), {1.0, 11});
    CHECK(table.negative_m_seen);
    CHECK(table.rows.back().m < 0.0);
}

TEST_CASE("vanishing-coupling limit freezes the moments") {
    const MomentState init{0.7, 0.4, 0.25};
    const ModelParams tiny{4, 1e-12, 2, 3, 3};
    const auto table = integrate_moment_equations(
        init, tiny, constant_closure(SignMode::AsPrinted, 0.25), {10.0, 11});
    for (const auto& row : table.rows) {
        CHECK(std::abs(row.m - init.m) <= 1e-10);
        CHECK(std::abs(row.k1 - init.k1) <= 1e-10);
    }
}
