#ifndef COLLCAV_STATES_HPP
#define COLLCAV_STATES_HPP

#include <vector>

#include "collcav/fock.hpp"

namespace collcav {

enum class StateKind { Vacuum, FockProduct, Exchange, Pairing };

const char* to_string(StateKind kind);

// Initial-state recipes. Exchange and Pairing are identical-particle product
// states with the cavity in vacuum; their per-particle (a_i, b_i) state is
//   Exchange: cos(theta)|0,1> + e^{i phi} sin(theta)|1,0>   -> <K2> = +cos^2 sin^2
//   Pairing:  cos(theta)|0,0> + e^{i phi} sin(theta)|1,1>   -> <K2> = -cos^2 sin^2
// The two families drive the collective term with opposite signs.
struct StateRecipe {
    StateKind kind = StateKind::Vacuum;
    double theta = 0.0;  // [0, pi/2]
    double phi = 0.0;    // [0, 2*pi)
    std::vector<int> occupations;  // FockProduct only, canonical mode order
};

// Throws ConfigError on angle-range violations, occupation/space mismatches,
// or Exchange/Pairing on a space that is not the N-pair + cavity layout.
StateVector build_state(const SpacePtr& space, const StateRecipe& recipe);

}  // namespace collcav

#endif
