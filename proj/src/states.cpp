#include "collcav/states.hpp"

#include <cmath>
#include <numbers>

namespace collcav {

const char* to_string(StateKind kind) {
    switch (kind) {
        case StateKind::Vacuum: return "vacuum";
        case StateKind::FockProduct: return "fock_product";
        case StateKind::Exchange: return "exchange";
        case StateKind::Pairing: return "pairing";
    }
    return "?";
}

namespace {

// Number of (a_i, b_i) pairs; throws unless the space is the particle-cavity
// layout required by Exchange/Pairing.
int particle_count(const HilbertSpace& space) {
    const std::size_t nm = space.num_modes();
    if (nm < 3 || nm % 2 == 0)
        throw ConfigError("recipe requires the N-pair + cavity mode layout");
    const int n = static_cast<int>((nm - 1) / 2);
    for (int i = 1; i <= n; ++i)
        if (!space.has_mode({ModeRole::ParticleA, i}) || !space.has_mode({ModeRole::ParticleB, i}))
            throw ConfigError("recipe requires the N-pair + cavity mode layout");
    if (!space.has_mode({ModeRole::Cavity, 0}))
        throw ConfigError("recipe requires a cavity mode");
    return n;
}

StateVector two_branch_product(const SpacePtr& space, const StateRecipe& recipe,
                               int na_lo, int nb_lo, int na_hi, int nb_hi) {
    const int n = particle_count(*space);
    for (int i = 1; i <= n; ++i) {
        const std::size_t pa = space->mode_position({ModeRole::ParticleA, i});
        const std::size_t pb = space->mode_position({ModeRole::ParticleB, i});
        if (space->dim(pa) <= na_hi || space->dim(pb) <= std::max(nb_lo, nb_hi))
            throw ConfigError("recipe needs at least two Fock levels on a and b modes");
    }
    const Complex lo(std::cos(recipe.theta), 0.0);
    const Complex hi = std::sin(recipe.theta) * std::exp(Complex(0.0, recipe.phi));

    DenseVector v = DenseVector::Zero(space->total_dim());
    // Each particle contributes one of two branches; enumerate by bitmask.
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
        Complex amp(1.0, 0.0);
        std::int64_t idx = 0;
        for (int i = 1; i <= n; ++i) {
            const bool up = (mask >> (i - 1)) & 1;
            amp *= up ? hi : lo;
            idx += (up ? na_hi : na_lo) * space->stride(space->mode_position({ModeRole::ParticleA, i}));
            idx += (up ? nb_hi : nb_lo) * space->stride(space->mode_position({ModeRole::ParticleB, i}));
        }
        v[idx] += amp;
    }
    return StateVector(space, std::move(v));
}

}  // namespace

StateVector build_state(const SpacePtr& space, const StateRecipe& recipe) {
    if (recipe.kind == StateKind::Exchange || recipe.kind == StateKind::Pairing) {
        if (recipe.theta < 0.0 || recipe.theta > std::numbers::pi / 2 + 1e-12)
            throw ConfigError("theta must lie in [0, pi/2]");
        if (recipe.phi < 0.0 || recipe.phi >= 2 * std::numbers::pi)
            throw ConfigError("phi must lie in [0, 2*pi)");
    }
    switch (recipe.kind) {
        case StateKind::Vacuum:
            return StateVector::basis_state(space,
                                            std::vector<int>(space->num_modes(), 0));
        case StateKind::FockProduct:
            return StateVector::basis_state(space, recipe.occupations);
        case StateKind::Exchange:
            return two_branch_product(space, recipe, 0, 1, 1, 0);
        case StateKind::Pairing:
            return two_branch_product(space, recipe, 0, 0, 1, 1);
    }
    throw ConfigError("unknown state kind");
}

}  // namespace collcav
