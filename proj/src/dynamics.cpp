#include "collcav/dynamics.hpp"

#include <cmath>

#include "collcav/rng.hpp"

namespace collcav {

void validate(const TimeGrid& grid) {
    if (!(grid.t_max > 0.0))
        throw ConfigError("t_max must be > 0, got " + std::to_string(grid.t_max));
    if (grid.n_samples < 2)
        throw ConfigError("n_samples must be >= 2, got " + std::to_string(grid.n_samples));
}

void validate(const DecayParams& decay) {
    if (decay.kappa < 0.0)
        throw ConfigError("kappa must be >= 0, got " + std::to_string(decay.kappa));
    if (decay.n_traj < 1)
        throw ConfigError("n_traj must be >= 1, got " + std::to_string(decay.n_traj));
}

namespace {

// Derivative of i d/dt psi = H_eff psi with optional cavity-loss drift:
// f(psi) = -i H psi - (kappa/2) n_c psi. The decay term is skipped entirely
// (not multiplied by zero) when absent so the kappa = 0 trajectory arithmetic
// is identical to the unitary propagator.
struct Stepper {
    const SparseMatrix* h = nullptr;
    const SparseMatrix* n_c = nullptr;
    double half_kappa = 0.0;

    DenseVector deriv(const DenseVector& v) const {
        DenseVector w = (*h) * v;
        w *= Complex(0.0, -1.0);
        if (n_c) w -= half_kappa * ((*n_c) * v);
        return w;
    }

    void rk4(DenseVector& psi, double dt) const {
        const DenseVector k1 = deriv(psi);
        const DenseVector k2 = deriv(psi + (0.5 * dt) * k1);
        const DenseVector k3 = deriv(psi + (0.5 * dt) * k2);
        const DenseVector k4 = deriv(psi + dt * k3);
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

constexpr int kMaxDoublings = 24;

std::vector<StateVector> propagate_unitary(const StateVector& state, const SparseMatrix& h,
                                           const TimeGrid& grid, int substeps) {
    Stepper stepper{&h, nullptr, 0.0};
    std::vector<StateVector> samples;
    samples.reserve(grid.n_samples);
    samples.push_back(state);
    DenseVector psi = state.amplitudes();
    const double dt = grid.dt() / substeps;
    for (int k = 1; k < grid.n_samples; ++k) {
        for (int s = 0; s < substeps; ++s) stepper.rk4(psi, dt);
        samples.push_back(StateVector::unchecked(state.space_ptr(), psi));
    }
    return samples;
}

double max_norm_drift(const std::vector<StateVector>& samples) {
    double worst = 0.0;
    for (const auto& s : samples) worst = std::max(worst, std::abs(s.norm() - 1.0));
    return worst;
}

void check_evolve_args(const StateVector& state, const Operator& h, double tol) {
    if (!state.space().same_as(h.space()))
        throw ConfigError("state and generator live on different spaces");
    if (!h.hermitian_hint())
        throw ConfigError("evolve requires a Hermitian-tagged generator");
    if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
}

// Shared calibration: smallest power-of-two substep count whose full-grid
// unitary run meets the norm-drift tolerance.
int calibrated_substeps(const StateVector& state, const Operator& h, const TimeGrid& grid,
                        double tol) {
    int substeps = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < kMaxDoublings; ++attempt, substeps *= 2) {
        const auto samples = propagate_unitary(state, h.matrix(), grid, substeps);
        const double drift = max_norm_drift(samples);
        best = std::min(best, drift);
        if (drift <= tol) return substeps;
    }
    throw InvariantError("norm-drift tolerance " + std::to_string(tol) +
                         " unreachable within the step floor; best drift " +
                         std::to_string(best));
}

}  // namespace

std::vector<StateVector> evolve(const StateVector& state, const Operator& h,
                                const TimeGrid& grid, double tol) {
    validate(grid);
    check_evolve_args(state, h, tol);
    int substeps = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < kMaxDoublings; ++attempt, substeps *= 2) {
        auto samples = propagate_unitary(state, h.matrix(), grid, substeps);
        const double drift = max_norm_drift(samples);
        best = std::min(best, drift);
        if (drift <= tol) return samples;
    }
    throw InvariantError("norm-drift tolerance " + std::to_string(tol) +
                         " unreachable within the step floor; best drift " +
                         std::to_string(best));
}

SeriesTable observable_series(const std::vector<StateVector>& samples, const TimeGrid& grid,
                              const ModelParams& params) {
    if (samples.empty()) throw ConfigError("observable_series: no samples");
    if (static_cast<int>(samples.size()) != grid.n_samples)
        throw ConfigError("observable_series: sample count does not match the grid");
    const SpacePtr space = samples.front().space_ptr();
    require_matching_space(params, *space);

    const Operator m_op = build_observable(params, space, ObservableKind::M);
    const Operator k1_op = build_observable(params, space, ObservableKind::K1);
    const Operator nc_op = build_observable(params, space, ObservableKind::CavityPhotons);
    const bool has_k2 = params.n_particles >= 2;
    const Operator k2_op = has_k2 ? build_observable(params, space, ObservableKind::K2)
                                  : identity_op(space);

    SeriesTable table;
    table.rows.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const StateVector& s = samples[k];
        if (!s.space().same_as(*space))
            throw ConfigError("observable_series: samples on mixed spaces");
        SeriesRow row;
        row.t = grid.time(static_cast<int>(k));
        row.m = real_expectation(s, m_op);
        row.k1 = real_expectation(s, k1_op);
        row.k2 = has_k2 ? real_expectation(s, k2_op)
                        : std::numeric_limits<double>::quiet_NaN();
        row.n_photon = real_expectation(s, nc_op);
        row.norm_drift = std::abs(s.norm() - 1.0);
        table.rows.push_back(row);
    }
    return table;
}

double exact_rate(const StateVector& state, const Operator& observable, const Operator& h) {
    if (!state.space().same_as(observable.space()) || !state.space().same_as(h.space()))
        throw ConfigError("exact_rate: state and operators live on different spaces");
    const DenseVector& psi = state.amplitudes();
    const DenseVector hpsi = h.apply(psi);
    const DenseVector apsi = observable.apply(psi);
    const Complex ah = psi.dot(observable.apply(hpsi));
    const Complex ha = psi.dot(h.apply(apsi));
    const Complex rate = Complex(0.0, -1.0) * (ah - ha);
    if (std::abs(rate.imag()) > 1e-10)
        throw InvariantError("exact_rate: imaginary residue " + std::to_string(rate.imag()));
    return rate.real();
}

double ehrenfest_residual(const SeriesTable& series, const ModelParams& params) {
    if (series.rows.size() < 3)
        throw ConfigError("ehrenfest_residual needs at least 3 rows");
    const double dt = series.rows[1].t - series.rows[0].t;
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < series.rows.size(); ++k) {
        const double dm = (series.rows[k + 1].m - series.rows[k - 1].m) / (2.0 * dt);
        worst = std::max(worst, std::abs(dm - params.coupling * series.rows[k].k1));
    }
    return worst;
}

SeriesTable evolve_with_decay(const StateVector& state, const Operator& h,
                              const DecayParams& decay, const TimeGrid& grid,
                              const ModelParams& params, double tol,
                              std::vector<GuardEvent>* guard_out) {
    validate(grid);
    validate(decay);
    check_evolve_args(state, h, tol);
    const SpacePtr space = state.space_ptr();
    require_matching_space(params, *space);

    const int substeps = calibrated_substeps(state, h, grid, tol);
    const double dt = grid.dt() / substeps;

    const Operator m_op = build_observable(params, space, ObservableKind::M);
    const Operator k1_op = build_observable(params, space, ObservableKind::K1);
    const Operator nc_op = build_observable(params, space, ObservableKind::CavityPhotons);
    const bool has_k2 = params.n_particles >= 2;
    const Operator k2_op = has_k2 ? build_observable(params, space, ObservableKind::K2)
                                  : identity_op(space);
    const Operator c_op = lowering_op(space, {ModeRole::Cavity, 0});

    const SparseMatrix& hm = h.matrix();
    const SparseMatrix& ncm = nc_op.matrix();
    Stepper stepper{&hm, decay.kappa > 0.0 ? &ncm : nullptr, 0.5 * decay.kappa};

    const int n = grid.n_samples;
    std::vector<double> m_sum(n, 0.0), k1_sum(n, 0.0), k2_sum(n, 0.0), nc_sum(n, 0.0),
        drift_sum(n, 0.0), emit_sum(n, 0.0);

    // Guard bookkeeping: earliest crossing per monitored mode over all
    // trajectories (trajectory order breaks ties deterministically).
    std::vector<std::size_t> monitored;
    for (std::size_t pos = 0; pos < space->num_modes(); ++pos)
        if (space->dim(pos) >= 3) monitored.push_back(pos);
    std::vector<int> guard_first_k(monitored.size(), std::numeric_limits<int>::max());
    std::vector<double> guard_pop(monitored.size(), 0.0);

    auto normalized_real = [](const DenseVector& psi, const SparseMatrix& op, double norm2) {
        const Complex v = psi.dot(op * psi);
        if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
            throw InvariantError("decay run: Hermitian expectation has imaginary part " +
                                 std::to_string(v.imag()));
        return v.real() / norm2;
    };

    for (int traj = 0; traj < decay.n_traj; ++traj) {
        CounterRng rng(decay.seed, static_cast<std::uint64_t>(traj));
        double threshold = rng.next_uniform();
        DenseVector psi = state.amplitudes();
        long jumps = 0;

        auto record = [&](int k) {
            const double norm2 = psi.squaredNorm();
            m_sum[k] += normalized_real(psi, m_op.matrix(), norm2);
            k1_sum[k] += normalized_real(psi, k1_op.matrix(), norm2);
            if (has_k2) k2_sum[k] += normalized_real(psi, k2_op.matrix(), norm2);
            nc_sum[k] += normalized_real(psi, ncm, norm2);
            drift_sum[k] += std::abs(std::sqrt(norm2) - 1.0);
            emit_sum[k] += static_cast<double>(jumps);
            if (guard_out && !monitored.empty()) {
                const StateVector view = StateVector::unchecked(space, psi);
                for (std::size_t q = 0; q < monitored.size(); ++q) {
                    const double pop = view.top_level_population(monitored[q]) / norm2;
                    if (pop > 1e-3 && k < guard_first_k[q]) {
                        guard_first_k[q] = k;
                        guard_pop[q] = pop;
                    }
                }
            }
        };

        record(0);
        for (int k = 1; k < n; ++k) {
            for (int s = 0; s < substeps; ++s) {
                stepper.rk4(psi, dt);
                if (decay.kappa > 0.0 && psi.squaredNorm() < threshold) {
                    DenseVector cpsi = c_op.matrix() * psi;
                    const double cnorm2 = cpsi.squaredNorm();
                    // An empty cavity cannot emit; integrator noise alone must
                    // not trigger a collapse onto the zero vector.
                    if (cnorm2 > 1e-300) {
                        psi = cpsi / std::sqrt(cnorm2);
                        ++jumps;
                        threshold = rng.next_uniform();
                    }
                }
            }
            record(k);
        }
    }

    if (guard_out) {
        guard_out->clear();
        for (std::size_t q = 0; q < monitored.size(); ++q)
            if (guard_first_k[q] != std::numeric_limits<int>::max())
                guard_out->push_back({to_string(space->modes()[monitored[q]].id),
                                      grid.time(guard_first_k[q]), guard_pop[q]});
    }

    SeriesTable table;
    table.has_emitted = true;
    table.rows.reserve(n);
    const double inv = 1.0 / decay.n_traj;
    for (int k = 0; k < n; ++k) {
        SeriesRow row;
        row.t = grid.time(k);
        row.m = m_sum[k] * inv;
        row.k1 = k1_sum[k] * inv;
        row.k2 = has_k2 ? k2_sum[k] * inv : std::numeric_limits<double>::quiet_NaN();
        row.n_photon = nc_sum[k] * inv;
        row.norm_drift = drift_sum[k] * inv;
        row.emitted = emit_sum[k] * inv;
        table.rows.push_back(row);
    }
    return table;
}

std::vector<GuardEvent> truncation_guard(const std::vector<StateVector>& samples,
                                         const TimeGrid& grid, double threshold) {
    std::vector<GuardEvent> events;
    if (samples.empty()) return events;
    const HilbertSpace& space = samples.front().space();
    for (std::size_t pos = 0; pos < space.num_modes(); ++pos) {
        if (space.dim(pos) < 3) continue;  // dim-2 modes are deliberate two-level systems
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const double pop = samples[k].top_level_population(pos);
            if (pop > threshold) {
                events.push_back({to_string(space.modes()[pos].id),
                                  grid.time(static_cast<int>(k)), pop});
                break;  // first crossing per mode
            }
        }
    }
    return events;
}

}  // namespace collcav
