#include "collcav/model.hpp"

namespace collcav {

void validate(const ModelParams& params) {
    if (params.n_particles < 1)
        throw ConfigError("n_particles must be >= 1, got " + std::to_string(params.n_particles));
    if (!(params.coupling > 0.0))
        throw ConfigError("coupling must be > 0, got " + std::to_string(params.coupling));
    if (params.dim_a < 2 || params.dim_b < 2 || params.dim_c < 2)
        throw ConfigError("all truncation dims must be >= 2");
}

SpacePtr make_space(const ModelParams& params) {
    validate(params);
    return make_particle_cavity_space(params.n_particles, params.dim_a, params.dim_b,
                                      params.dim_c);
}

void require_matching_space(const ModelParams& params, const HilbertSpace& space) {
    validate(params);
    const std::size_t expected = 2 * static_cast<std::size_t>(params.n_particles) + 1;
    if (space.num_modes() != expected)
        throw ConfigError("space has " + std::to_string(space.num_modes()) +
                          " modes; params require " + std::to_string(expected));
    for (int i = 1; i <= params.n_particles; ++i) {
        const ModeId a{ModeRole::ParticleA, i};
        const ModeId b{ModeRole::ParticleB, i};
        if (!space.has_mode(a) || space.dim(space.mode_position(a)) != params.dim_a)
            throw ConfigError("space lacks mode " + to_string(a) + " with dim " +
                              std::to_string(params.dim_a));
        if (!space.has_mode(b) || space.dim(space.mode_position(b)) != params.dim_b)
            throw ConfigError("space lacks mode " + to_string(b) + " with dim " +
                              std::to_string(params.dim_b));
    }
    const ModeId c{ModeRole::Cavity, 0};
    if (!space.has_mode(c) || space.dim(space.mode_position(c)) != params.dim_c)
        throw ConfigError("space lacks the cavity mode with dim " + std::to_string(params.dim_c));
}

const char* to_string(ObservableKind kind) {
    switch (kind) {
        case ObservableKind::M: return "M";
        case ObservableKind::K1: return "K1";
        case ObservableKind::K2: return "K2";
        case ObservableKind::CavityPhotons: return "CavityPhotons";
    }
    return "?";
}

namespace {

// a_i c^dag + a_i^dag c  (Hermitian, exchanges one excitation with the cavity)
Operator exchange_vertex(const SpacePtr& space, int i) {
    const Operator a = lowering_op(space, {ModeRole::ParticleA, i});
    const Operator c = lowering_op(space, {ModeRole::Cavity, 0});
    const Operator x = a * c.adjoint() + a.adjoint() * c;
    return Operator(x.space_ptr(), x.matrix(), true);
}

}  // namespace

Operator build_interaction_hamiltonian(const ModelParams& params, const SpacePtr& space) {
    require_matching_space(params, *space);
    SparseMatrix sum(space->total_dim(), space->total_dim());
    for (int i = 1; i <= params.n_particles; ++i) {
        const Operator b = lowering_op(space, {ModeRole::ParticleB, i});
        const Operator bb = b + b.adjoint();
        const Operator term = bb * exchange_vertex(space, i);
        sum += term.matrix();
    }
    return Operator(space, SparseMatrix(params.coupling * sum), true);
}

Operator build_observable(const ModelParams& params, const SpacePtr& space, ObservableKind kind) {
    require_matching_space(params, *space);
    const int n = params.n_particles;
    const std::int64_t d = space->total_dim();

    switch (kind) {
        case ObservableKind::M: {
            SparseMatrix sum(d, d);
            for (int i = 1; i <= n; ++i)
                sum += number_op(space, {ModeRole::ParticleB, i}).matrix();
            return Operator(space, SparseMatrix((1.0 / n) * sum), true);
        }
        case ObservableKind::K1: {
            SparseMatrix sum(d, d);
            for (int i = 1; i <= n; ++i) {
                const Operator b = lowering_op(space, {ModeRole::ParticleB, i});
                const Operator term =
                    Complex(0.0, 1.0) * ((b - b.adjoint()) * exchange_vertex(space, i));
                sum += term.matrix();
            }
            return Operator(space, SparseMatrix((1.0 / n) * sum), true);
        }
        case ObservableKind::K2: {
            if (n < 2)
                throw ConfigError("K2 is undefined for N = 1 (normalization 1/(N(N-1)))");
            // P_i = a_i b_i^dag, Q_i = a_i b_i; the pair terms are
            // P_i P_j^dag - Q_i Q_j^dag for i != j.
            std::vector<Operator> p, q;
            p.reserve(n);
            q.reserve(n);
            for (int i = 1; i <= n; ++i) {
                const Operator a = lowering_op(space, {ModeRole::ParticleA, i});
                const Operator b = lowering_op(space, {ModeRole::ParticleB, i});
                p.push_back(a * b.adjoint());
                q.push_back(a * b);
            }
            SparseMatrix sum(d, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    sum += (p[i] * p[j].adjoint()).matrix();
                    sum -= (q[i] * q[j].adjoint()).matrix();
                }
            const double norm = 1.0 / (static_cast<double>(n) * (n - 1));
            return Operator(space, SparseMatrix(norm * sum), true);
        }
        case ObservableKind::CavityPhotons:
            return number_op(space, {ModeRole::Cavity, 0});
    }
    throw ConfigError("unknown observable kind");
}

}  // namespace collcav
