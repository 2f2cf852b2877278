#ifndef COLLCAV_MODEL_HPP
#define COLLCAV_MODEL_HPP

#include <string>

#include "collcav/fock.hpp"

namespace collcav {

// Physical parameters of the three-mode coupling model. hbar = 1 throughout:
// `coupling` is the product eta*g in units of angular frequency, times in
// units of 1/coupling.
struct ModelParams {
    int n_particles = 1;
    double coupling = 0.1;  // eta*g > 0
    int dim_a = 2;
    int dim_b = 3;
    int dim_c = 3;
};

// Throws ConfigError on n_particles < 1, coupling <= 0 or any dim < 2.
void validate(const ModelParams& params);

// N particle pairs (a_i, b_i) plus the cavity, canonical order.
SpacePtr make_space(const ModelParams& params);

// Throws ConfigError unless `space` is exactly the N-pair + cavity layout of
// `params` with matching dims.
void require_matching_space(const ModelParams& params, const HilbertSpace& space);

enum class ObservableKind { M, K1, K2, CavityPhotons };

const char* to_string(ObservableKind kind);

// H = sum_i coupling * (b_i + b_i^dag)(a_i c^dag + a_i^dag c).
// Hermitian-tagged and verified to 1e-12.
Operator build_interaction_hamiltonian(const ModelParams& params, const SpacePtr& space);

// M  = (1/N) sum_i b_i^dag b_i
// K1 = (1/N) sum_i i(b_i - b_i^dag)(a_i c^dag + a_i^dag c)
// K2 = (1/(N(N-1))) sum_{i != j} (a_i b_i^dag a_j^dag b_j - a_i b_i a_j^dag b_j^dag)
// CavityPhotons = c^dag c
// All Hermitian-tagged and verified. K2 with N = 1 throws ConfigError: its
// normalization is undefined there and a silent 0 would mask misconfiguration.
Operator build_observable(const ModelParams& params, const SpacePtr& space, ObservableKind kind);

}  // namespace collcav

#endif
