#ifndef COLLCAV_FOCK_HPP
#define COLLCAV_FOCK_HPP

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "collcav/errors.hpp"

namespace collcav {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Modes and spaces
// ---------------------------------------------------------------------------

enum class ModeRole { ParticleA, ParticleB, Cavity };

// Identity of one bosonic mode: a_i, b_i (i >= 1) or the single cavity mode c.
struct ModeId {
    ModeRole role;
    int index = 0;  // particle number for a/b, ignored (0) for the cavity

    bool operator==(const ModeId&) const = default;
};

std::string to_string(const ModeId& id);

struct ModeSpec {
    ModeId id;
    int dim = 2;  // number of retained Fock levels, >= 2
};

inline ModeSpec mode_a(int i, int dim) { return {{ModeRole::ParticleA, i}, dim}; }
inline ModeSpec mode_b(int i, int dim) { return {{ModeRole::ParticleB, i}, dim}; }
inline ModeSpec mode_c(int dim) { return {{ModeRole::Cavity, 0}, dim}; }

// Tensor product of truncated bosonic modes in the canonical order
// a_1, b_1, a_2, b_2, ..., a_N, b_N, c (cavity last). The first mode varies
// slowest in the basis index: index = sum_q n_q * stride_q with
// stride_q = product of dims of all modes after q.
class HilbertSpace {
public:
    const std::vector<ModeSpec>& modes() const { return modes_; }
    std::int64_t total_dim() const { return total_dim_; }
    std::size_t num_modes() const { return modes_.size(); }

    // Position of a mode in the canonical list; throws ConfigError if absent.
    std::size_t mode_position(const ModeId& id) const;
    bool has_mode(const ModeId& id) const;

    std::int64_t stride(std::size_t pos) const { return strides_[pos]; }
    int dim(std::size_t pos) const { return modes_[pos].dim; }

    // Occupation of mode `pos` encoded in basis index `idx`.
    int occupation(std::int64_t idx, std::size_t pos) const {
        return static_cast<int>((idx / strides_[pos]) % modes_[pos].dim);
    }

    bool same_as(const HilbertSpace& other) const;

private:
    friend std::shared_ptr<const HilbertSpace> make_space(std::vector<ModeSpec> specs);

    std::vector<ModeSpec> modes_;
    std::vector<std::int64_t> strides_;
    std::int64_t total_dim_ = 0;
};

using SpacePtr = std::shared_ptr<const HilbertSpace>;

// Validates the mode list, sorts it into canonical order and computes strides.
// Throws ConfigError on dim < 2, duplicate identities, or index overflow.
SpacePtr make_space(std::vector<ModeSpec> specs);

// Convenience: N particle pairs (a_i, b_i) plus the cavity.
SpacePtr make_particle_cavity_space(int n_particles, int dim_a, int dim_b, int dim_c);

// ---------------------------------------------------------------------------
// Operators and states
// ---------------------------------------------------------------------------

class Operator {
public:
    Operator(SpacePtr space, SparseMatrix matrix, bool hermitian_hint);

    const HilbertSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const SparseMatrix& matrix() const { return matrix_; }
    bool hermitian_hint() const { return hermitian_hint_; }

    DenseVector apply(const DenseVector& v) const { return matrix_ * v; }

    Operator adjoint() const;
    // max_{ij} |(A - A^dag)_{ij}|
    double hermiticity_defect() const;

    friend Operator operator+(const Operator& x, const Operator& y);
    friend Operator operator-(const Operator& x, const Operator& y);
    friend Operator operator*(const Operator& x, const Operator& y);
    friend Operator operator*(Complex s, const Operator& x);

private:
    SpacePtr space_;
    SparseMatrix matrix_;
    bool hermitian_hint_ = false;
};

class StateVector {
public:
    // Normalizes the amplitudes; throws ConfigError on zero norm or length
    // mismatch.
    StateVector(SpacePtr space, DenseVector amplitudes);

    // Basis vector |n_1, n_2, ...> in canonical mode order.
    static StateVector basis_state(SpacePtr space, const std::vector<int>& occupations);

    // Adopts amplitudes as-is. Propagation uses this: norm drift is the
    // integrator's accuracy witness and must not be silently removed.
    static StateVector unchecked(SpacePtr space, DenseVector amplitudes);

    const HilbertSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const DenseVector& amplitudes() const { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }

    // Total weight in the highest retained Fock level of the mode at `pos`.
    double top_level_population(std::size_t pos) const;

private:
    StateVector() = default;
    SpacePtr space_;
    DenseVector amplitudes_;
};

// ---------------------------------------------------------------------------
// Operator construction
// ---------------------------------------------------------------------------

// Truncated annihilation operator of one mode, embedded into the full space:
// entries sqrt(n) on the first superdiagonal of that mode's factor, identity
// elsewhere. The truncated commutator [x, x^dag] is diag(1, ..., 1, 1 - dim).
Operator lowering_op(const SpacePtr& space, const ModeId& mode);

// adjoint(lowering) * lowering; Hermitian.
Operator number_op(const SpacePtr& space, const ModeId& mode);

Operator identity_op(const SpacePtr& space);

// Embeds an arbitrary single-mode matrix (dim x dim of the mode at `pos`).
Operator embed_single_mode(const SpacePtr& space, std::size_t pos,
                           const Eigen::MatrixXcd& local, bool hermitian_hint);

// ---------------------------------------------------------------------------
// Expectation values
// ---------------------------------------------------------------------------

// <state|op|state>. For operators with hermitian_hint set, an imaginary part
// above 1e-10 signals a construction bug and throws InvariantError.
Complex expectation(const StateVector& state, const Operator& op);

// Real part of expectation for Hermitian-tagged operators (same check).
double real_expectation(const StateVector& state, const Operator& op);

// ---------------------------------------------------------------------------
// JSON serialization (debugging / cross-implementation comparison)
// ---------------------------------------------------------------------------
// Layout, documented in the README:
//   operator: {"modes": [{"role": "a", "index": 1, "dim": 2}, ...],
//              "shape": [D, D],
//              "entries": [[row, col, re, im], ...]}   sorted by (row, col)
//   state:    {"modes": [...], "amplitudes": [[re, im], ...]}

std::string operator_to_json(const Operator& op);
std::string state_to_json(const StateVector& state);
Operator operator_from_json(const std::string& text);
StateVector state_from_json(const std::string& text);

}  // namespace collcav

#endif
