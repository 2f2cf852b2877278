#ifndef COLLCAV_DYNAMICS_HPP
#define COLLCAV_DYNAMICS_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "collcav/fock.hpp"
#include "collcav/model.hpp"

namespace collcav {

// Uniform sample grid starting at t = 0, times in units of 1/coupling.
struct TimeGrid {
    double t_max = 20.0;
    int n_samples = 201;

    double dt() const { return t_max / (n_samples - 1); }
    double time(int k) const { return t_max * k / (n_samples - 1); }
};

// Throws ConfigError on t_max <= 0 or n_samples < 2.
void validate(const TimeGrid& grid);

// One sampled row of real observable values. `emitted` is NaN except in decay
// runs, where it is the trajectory-averaged cumulative jump count.
struct SeriesRow {
    double t = 0.0;
    double m = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;        // NaN when N = 1 (K2 undefined there)
    double n_photon = 0.0;
    double norm_drift = 0.0;
    double emitted = std::numeric_limits<double>::quiet_NaN();
};

struct SeriesTable {
    std::vector<SeriesRow> rows;
    bool has_emitted = false;        // decay runs add the emitted column
    bool negative_m_seen = false;    // diagnostic flag set by the moment integrator

    std::size_t size() const { return rows.size(); }
};

// Cavity-decay extension parameters (beyond the closed unitary model).
struct DecayParams {
    double kappa = 0.0;      // cavity decay rate >= 0, units of coupling
    int n_traj = 1;
    std::uint64_t seed = 0;
};

void validate(const DecayParams& decay);

// Solves i d/dt psi = H psi (hbar = 1) with classical fixed-step 4th-order
// integration, doubling the substep count until max |norm - 1| over the grid
// is <= tol. The returned samples are NOT renormalized: the drift is the
// accuracy witness. Throws ConfigError for a generator without the Hermitian
// tag and InvariantError if the tolerance is unreachable within the step floor.
std::vector<StateVector> evolve(const StateVector& state, const Operator& h,
                                const TimeGrid& grid, double tol);

// Evaluates M, K1, K2, CavityPhotons and the norm drift at every sample.
// Expectations are taken on the raw (unnormalized) samples.
SeriesTable observable_series(const std::vector<StateVector>& samples, const TimeGrid& grid,
                              const ModelParams& params);

// <-i[A, H]> on the state, evaluated by sparse matrix products only (no time
// stepping). The complex residue is checked to be real within 1e-10.
double exact_rate(const StateVector& state, const Operator& observable, const Operator& h);

// max over interior samples of |central-difference dm/dt - coupling * k1|.
// Second-order accurate in the sample spacing; needs >= 3 rows.
double ehrenfest_residual(const SeriesTable& series, const ModelParams& params);

// Truncation guard: samples whose top-Fock-level population exceeds the
// threshold on any monitored mode. Modes of dim 2 are deliberate two-level
// systems and are not monitored; see README.
struct GuardEvent {
    std::string mode;
    double time = 0.0;
    double population = 0.0;
};

std::vector<GuardEvent> truncation_guard(const std::vector<StateVector>& samples,
                                         const TimeGrid& grid, double threshold = 1e-3);

// Quantum-jump unraveling with the single collapse channel sqrt(kappa) c:
// non-Hermitian drift H - (i/2) kappa c^dag c, a jump is triggered at substep
// granularity when the squared norm falls below the drawn uniform threshold,
// the state is renormalized after each jump and jumps are counted as emitted
// photons. Rows hold trajectory means; observables use normalized samples.
// Per-trajectory streams derive deterministically from decay.seed, and
// trajectories are reduced in index order, so the output is bit-reproducible.
// With kappa = 0 the code path is identical to evolve (same substep count).
// When guard_out is given it receives first-crossing truncation-guard events
// observed on any trajectory (normalized populations).
SeriesTable evolve_with_decay(const StateVector& state, const Operator& h,
                              const DecayParams& decay, const TimeGrid& grid,
                              const ModelParams& params, double tol,
                              std::vector<GuardEvent>* guard_out = nullptr);

}  // namespace collcav

#endif
