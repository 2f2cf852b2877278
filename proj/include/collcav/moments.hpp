#ifndef COLLCAV_MOMENTS_HPP
#define COLLCAV_MOMENTS_HPP

#include <string>
#include <utility>
#include <vector>

#include "collcav/dynamics.hpp"
#include "collcav/model.hpp"

namespace collcav {

struct MomentState {
    double m = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
};

// Sign convention of the k1 rate equation: AsPrinted solves
// dk1/dt = -2 N coupling k2, Opposite flips the sign. Both are provided
// because the exact commutator oracle must adjudicate between them; the
// experiments module records which one tracks the exact dynamics.
enum class SignMode { AsPrinted, Opposite };

const char* to_string(SignMode mode);
double sign_factor(SignMode mode);  // -1 for AsPrinted, +1 for Opposite

// k2 has no evolution equation of its own in this model: it is either held
// constant or replayed from a (time, k2) table produced by an exact run.
struct ClosureConfig {
    SignMode sign_mode = SignMode::AsPrinted;
    bool use_time_series = false;
    double k2_constant = 0.0;
    bool has_explicit_constant = false;  // distinguishes user k2 from measured k2(0)
    std::vector<std::pair<double, double>> k2_series;  // strictly increasing times
    std::string source_csv;  // provenance echo for replayed tables
};

// Solves dm/dt = coupling * k1, dk1/dt = sign * 2 N coupling * k2(t) on the
// grid. For constant k2 the solution is polynomial and reproduced exactly;
// a time-series closure is linearly interpolated and must cover the grid.
// Output columns: t, m, k1, k2 (n_photon and norm_drift are NaN: the moment
// system tracks neither). Rows with m < 0 set the table's diagnostic flag.
SeriesTable integrate_moment_equations(const MomentState& init, const ModelParams& params,
                                       const ClosureConfig& closure, const TimeGrid& grid);

// Quadratic truncation of the constant-k2 solution:
// m(0) + coupling k1(0) t + sign N coupling^2 k2(0) t^2.
double short_time_expansion(const MomentState& init, const ModelParams& params,
                            SignMode sign_mode, double t);

}  // namespace collcav

#endif
