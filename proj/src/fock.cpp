#include "collcav/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <json.hpp>

namespace collcav {

using nlohmann::json;

std::string to_string(const ModeId& id) {
    switch (id.role) {
        case ModeRole::ParticleA: return "a" + std::to_string(id.index);
        case ModeRole::ParticleB: return "b" + std::to_string(id.index);
        case ModeRole::Cavity: return "c";
    }
    return "?";
}

namespace {

// Canonical order key: a_1, b_1, a_2, b_2, ..., cavity last.
std::tuple<int, int, int> order_key(const ModeId& id) {
    if (id.role == ModeRole::Cavity) return {1, 0, 0};
    return {0, id.index, id.role == ModeRole::ParticleA ? 0 : 1};
}

}  // namespace

SpacePtr make_space(std::vector<ModeSpec> specs) {
    if (specs.empty()) throw ConfigError("make_space: empty mode list");
    for (const auto& s : specs) {
        if (s.dim < 2)
            throw ConfigError("make_space: mode " + to_string(s.id) + " has dim " +
                              std::to_string(s.dim) + " < 2");
        if (s.id.role == ModeRole::Cavity && s.id.index != 0)
            throw ConfigError("make_space: cavity mode must have index 0");
        if (s.id.role != ModeRole::Cavity && s.id.index < 1)
            throw ConfigError("make_space: particle mode index must be >= 1");
    }
    std::sort(specs.begin(), specs.end(), [](const ModeSpec& x, const ModeSpec& y) {
        return order_key(x.id) < order_key(y.id);
    });
    for (std::size_t q = 1; q < specs.size(); ++q) {
        if (specs[q].id == specs[q - 1].id)
            throw ConfigError("make_space: duplicate mode " + to_string(specs[q].id));
    }

    auto space = std::make_shared<HilbertSpace>();
    space->modes_ = std::move(specs);
    space->strides_.assign(space->modes_.size(), 1);
    std::int64_t total = 1;
    for (std::size_t q = space->modes_.size(); q-- > 0;) {
        space->strides_[q] = total;
        const std::int64_t d = space->modes_[q].dim;
        if (total > std::numeric_limits<std::int64_t>::max() / d)
            throw ConfigError("make_space: dimension product overflows the index type");
        total *= d;
    }
    space->total_dim_ = total;
    return space;
}

SpacePtr make_particle_cavity_space(int n_particles, int dim_a, int dim_b, int dim_c) {
    if (n_particles < 1) throw ConfigError("need at least one particle");
    std::vector<ModeSpec> specs;
    specs.reserve(2 * n_particles + 1);
    for (int i = 1; i <= n_particles; ++i) {
        specs.push_back(mode_a(i, dim_a));
        specs.push_back(mode_b(i, dim_b));
    }
    specs.push_back(mode_c(dim_c));
    return make_space(std::move(specs));
}

std::size_t HilbertSpace::mode_position(const ModeId& id) const {
    for (std::size_t q = 0; q < modes_.size(); ++q)
        if (modes_[q].id == id) return q;
    throw ConfigError("unknown mode " + to_string(id));
}

bool HilbertSpace::has_mode(const ModeId& id) const {
    for (const auto& m : modes_)
        if (m.id == id) return true;
    return false;
}

bool HilbertSpace::same_as(const HilbertSpace& other) const {
    if (this == &other) return true;
    if (modes_.size() != other.modes_.size()) return false;
    for (std::size_t q = 0; q < modes_.size(); ++q)
        if (!(modes_[q].id == other.modes_[q].id) || modes_[q].dim != other.modes_[q].dim)
            return false;
    return true;
}

// ---------------------------------------------------------------------------

Operator::Operator(SpacePtr space, SparseMatrix matrix, bool hermitian_hint)
    : space_(std::move(space)), matrix_(std::move(matrix)), hermitian_hint_(hermitian_hint) {
    const auto d = space_->total_dim();
    if (matrix_.rows() != d || matrix_.cols() != d)
        throw ConfigError("operator matrix shape does not match the space dimension");
    matrix_.makeCompressed();
    if (hermitian_hint_) {
        const double defect = hermiticity_defect();
        if (defect > 1e-12)
            throw InvariantError("operator tagged Hermitian has defect " + std::to_string(defect));
    }
}

Operator Operator::adjoint() const {
    return Operator(space_, SparseMatrix(matrix_.adjoint()), hermitian_hint_);
}

double Operator::hermiticity_defect() const {
    SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

namespace {

void check_same_space(const Operator& x, const Operator& y) {
    if (!x.space().same_as(y.space()))
        throw ConfigError("operators live on different spaces");
}

}  // namespace

Operator operator+(const Operator& x, const Operator& y) {
    check_same_space(x, y);
    return Operator(x.space_, SparseMatrix(x.matrix_ + y.matrix_),
                    x.hermitian_hint_ && y.hermitian_hint_);
}

Operator operator-(const Operator& x, const Operator& y) {
    check_same_space(x, y);
    return Operator(x.space_, SparseMatrix(x.matrix_ - y.matrix_),
                    x.hermitian_hint_ && y.hermitian_hint_);
}

Operator operator*(const Operator& x, const Operator& y) {
    check_same_space(x, y);
    return Operator(x.space_, SparseMatrix((x.matrix_ * y.matrix_).pruned()), false);
}

Operator operator*(Complex s, const Operator& x) {
    const bool herm = x.hermitian_hint_ && s.imag() == 0.0;
    return Operator(x.space_, SparseMatrix(s * x.matrix_), herm);
}

// ---------------------------------------------------------------------------

StateVector::StateVector(SpacePtr space, DenseVector amplitudes) {
    if (amplitudes.size() != space->total_dim())
        throw ConfigError("state vector length does not match the space dimension");
    const double n = amplitudes.norm();
    if (n < 1e-14) throw ConfigError("cannot normalize a zero state vector");
    space_ = std::move(space);
    amplitudes_ = amplitudes / n;
}

StateVector StateVector::basis_state(SpacePtr space, const std::vector<int>& occupations) {
    if (occupations.size() != space->num_modes())
        throw ConfigError("basis_state: need one occupation per mode");
    std::int64_t idx = 0;
    for (std::size_t q = 0; q < occupations.size(); ++q) {
        const int n = occupations[q];
        if (n < 0 || n >= space->dim(q))
            throw ConfigError("basis_state: occupation " + std::to_string(n) + " exceeds dim of " +
                              to_string(space->modes()[q].id));
        idx += n * space->stride(q);
    }
    DenseVector v = DenseVector::Zero(space->total_dim());
    v[idx] = 1.0;
    return unchecked(std::move(space), std::move(v));
}

StateVector StateVector::unchecked(SpacePtr space, DenseVector amplitudes) {
    StateVector s;
    s.space_ = std::move(space);
    s.amplitudes_ = std::move(amplitudes);
    return s;
}

double StateVector::top_level_population(std::size_t pos) const {
    const int top = space_->dim(pos) - 1;
    const auto stride = space_->stride(pos);
    const auto dim = space_->dim(pos);
    double pop = 0.0;
    for (std::int64_t idx = 0; idx < amplitudes_.size(); ++idx) {
        if ((idx / stride) % dim == top) pop += std::norm(amplitudes_[idx]);
    }
    return pop;
}

// ---------------------------------------------------------------------------

Operator embed_single_mode(const SpacePtr& space, std::size_t pos,
                           const Eigen::MatrixXcd& local, bool hermitian_hint) {
    const int d = space->dim(pos);
    if (local.rows() != d || local.cols() != d)
        throw ConfigError("embed_single_mode: local matrix does not match the mode dim");
    const std::int64_t stride = space->stride(pos);
    const std::int64_t outer = space->total_dim() / (d * stride);

    std::vector<Eigen::Triplet<Complex>> trips;
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const Complex v = local(r, c);
            if (v == Complex(0.0)) continue;
            for (std::int64_t o = 0; o < outer; ++o)
                for (std::int64_t i = 0; i < stride; ++i)
                    trips.emplace_back((o * d + r) * stride + i, (o * d + c) * stride + i, v);
        }
    SparseMatrix m(space->total_dim(), space->total_dim());
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(space, std::move(m), hermitian_hint);
}

Operator lowering_op(const SpacePtr& space, const ModeId& mode) {
    const std::size_t pos = space->mode_position(mode);
    const int d = space->dim(pos);
    Eigen::MatrixXcd local = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 1; n < d; ++n) local(n - 1, n) = std::sqrt(static_cast<double>(n));
    return embed_single_mode(space, pos, local, false);
}

Operator number_op(const SpacePtr& space, const ModeId& mode) {
    const std::size_t pos = space->mode_position(mode);
    const int d = space->dim(pos);
    Eigen::MatrixXcd local = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n < d; ++n) local(n, n) = static_cast<double>(n);
    return embed_single_mode(space, pos, local, true);
}

Operator identity_op(const SpacePtr& space) {
    SparseMatrix m(space->total_dim(), space->total_dim());
    m.setIdentity();
    return Operator(space, std::move(m), true);
}

// ---------------------------------------------------------------------------

Complex expectation(const StateVector& state, const Operator& op) {
    if (!state.space().same_as(op.space()))
        throw ConfigError("expectation: state and operator live on different spaces");
    const Complex value = state.amplitudes().dot(op.matrix() * state.amplitudes());
    if (op.hermitian_hint() && std::abs(value.imag()) > 1e-10)
        throw InvariantError("Hermitian expectation has imaginary part " +
                             std::to_string(value.imag()));
    return value;
}

double real_expectation(const StateVector& state, const Operator& op) {
    return expectation(state, op).real();
}

// ---------------------------------------------------------------------------

namespace {

json modes_to_json(const HilbertSpace& space) {
    json list = json::array();
    for (const auto& m : space.modes()) {
        const char* role = m.id.role == ModeRole::ParticleA ? "a"
                           : m.id.role == ModeRole::ParticleB ? "b"
                                                              : "c";
        list.push_back({{"role", role}, {"index", m.id.index}, {"dim", m.dim}});
    }
    return list;
}

SpacePtr modes_from_json(const json& list) {
    std::vector<ModeSpec> specs;
    for (const auto& item : list) {
        const std::string role = item.at("role").get<std::string>();
        ModeSpec s;
        s.id.index = item.at("index").get<int>();
        s.dim = item.at("dim").get<int>();
        if (role == "a") s.id.role = ModeRole::ParticleA;
        else if (role == "b") s.id.role = ModeRole::ParticleB;
        else if (role == "c") s.id.role = ModeRole::Cavity;
        else throw ConfigError("unknown mode role '" + role + "'");
        specs.push_back(s);
    }
    return make_space(std::move(specs));
}

}  // namespace

std::string operator_to_json(const Operator& op) {
    json j;
    j["modes"] = modes_to_json(op.space());
    j["shape"] = {op.space().total_dim(), op.space().total_dim()};
    j["hermitian_hint"] = op.hermitian_hint();
    // (row, col) sorted coordinate entries: deterministic for identical input.
    std::vector<std::tuple<std::int64_t, std::int64_t, Complex>> entries;
    const auto& m = op.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            entries.emplace_back(it.row(), it.col(), it.value());
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        return std::make_pair(std::get<0>(x), std::get<1>(x)) <
               std::make_pair(std::get<0>(y), std::get<1>(y));
    });
    json ents = json::array();
    for (const auto& [r, c, v] : entries) ents.push_back({r, c, v.real(), v.imag()});
    j["entries"] = std::move(ents);
    return j.dump();
}

std::string state_to_json(const StateVector& state) {
    json j;
    j["modes"] = modes_to_json(state.space());
    json amps = json::array();
    for (std::int64_t i = 0; i < state.amplitudes().size(); ++i)
        amps.push_back({state.amplitudes()[i].real(), state.amplitudes()[i].imag()});
    j["amplitudes"] = std::move(amps);
    return j.dump();
}

Operator operator_from_json(const std::string& text) {
    const json j = json::parse(text);
    SpacePtr space = modes_from_json(j.at("modes"));
    std::vector<Eigen::Triplet<Complex>> trips;
    for (const auto& e : j.at("entries"))
        trips.emplace_back(e.at(0).get<std::int64_t>(), e.at(1).get<std::int64_t>(),
                           Complex(e.at(2).get<double>(), e.at(3).get<double>()));
    SparseMatrix m(space->total_dim(), space->total_dim());
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(space, std::move(m), j.value("hermitian_hint", false));
}

StateVector state_from_json(const std::string& text) {
    const json j = json::parse(text);
    SpacePtr space = modes_from_json(j.at("modes"));
    const auto& amps = j.at("amplitudes");
    DenseVector v(space->total_dim());
    if (static_cast<std::int64_t>(amps.size()) != space->total_dim())
        throw ConfigError("state amplitudes length does not match the space");
    for (std::size_t i = 0; i < amps.size(); ++i)
        v[static_cast<std::int64_t>(i)] =
            Complex(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
    return StateVector(std::move(space), std::move(v));
}

}  // namespace collcav
