#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collcav/model.hpp"
#include "collcav/states.hpp"
#include "oracle_dense.hpp"

using namespace collcav;

namespace {

double sparse_max_abs(const SparseMatrix& m) {
    double worst = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

// Max deviation between a library operator and the oracle application,
// probed on every basis vector.
template <class F>
double max_dev_vs_oracle(const Operator& op, long total, F&& apply) {
    double worst = 0.0;
    for (long k = 0; k < total; ++k) {
        oracle::Vec e = oracle::Vec::Zero(total);
        e[k] = 1.0;
        worst = std::max(worst, (op.apply(e) - apply(e)).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

TEST_CASE("params validation") {
    CHECK_THROWS_AS(validate(ModelParams{0, 0.1, 2, 3, 3}), ConfigError);
    CHECK_THROWS_AS(validate(ModelParams{1, 0.0, 2, 3, 3}), ConfigError);
    CHECK_THROWS_AS(validate(ModelParams{1, 0.1, 1, 3, 3}), ConfigError);
    const ModelParams p{2, 0.1, 2, 3, 3};
    SpacePtr s = make_space(p);
    CHECK(s->total_dim() == 2 * 3 * 2 * 3 * 3);
    SpacePtr wrong = make_particle_cavity_space(2, 2, 2, 3);
    CHECK_THROWS_AS(build_interaction_hamiltonian(p, wrong), ConfigError);
}

TEST_CASE("hamiltonian matrix element and linearity") {
    const ModelParams p{1, 0.1, 2, 2, 2};
    SpacePtr s = make_space(p);
    const Operator h = build_interaction_hamiltonian(p, s);
    // <n_a=0, n_b=1, n_c=1| H |n_a=1, n_b=0, n_c=0> = coupling
    StateVector bra = StateVector::basis_state(s, {0, 1, 1});
    StateVector ket = StateVector::basis_state(s, {1, 0, 0});
    const Complex elem = bra.amplitudes().dot(h.apply(ket.amplitudes()));
    CHECK(std::abs(elem - Complex(0.1, 0.0)) <= 1e-15);

    ModelParams p2 = p;
    p2.coupling = 0.2;
    const Operator h2 = build_interaction_hamiltonian(p2, s);
    CHECK(sparse_max_abs((h2 - (Complex(2.0, 0.0) * h)).matrix()) <= 1e-16);
}

TEST_CASE("hamiltonian matches the oracle on every basis vector") {
    const ModelParams p{2, 0.07, 2, 3, 3};
    SpacePtr s = make_space(p);
    const oracle::Layout lay = oracle::Layout::particles(2, 2, 3, 3);
    const Operator h = build_interaction_hamiltonian(p, s);
    CHECK(max_dev_vs_oracle(h, lay.total, [&](const oracle::Vec& v) {
              return oracle::apply_h(lay, 0.07, v);
          }) <= 1e-15);
}

TEST_CASE("observables match the oracle and are Hermitian") {
    const ModelParams p{2, 0.1, 2, 3, 3};
    SpacePtr s = make_space(p);
    const oracle::Layout lay = oracle::Layout::particles(2, 2, 3, 3);

    const Operator m = build_observable(p, s, ObservableKind::M);
    const Operator k1 = build_observable(p, s, ObservableKind::K1);
    const Operator k2 = build_observable(p, s, ObservableKind::K2);
    const Operator nc = build_observable(p, s, ObservableKind::CavityPhotons);
    for (const Operator* op : {&m, &k1, &k2, &nc}) CHECK(op->hermiticity_defect() <= 1e-12);

    CHECK(max_dev_vs_oracle(m, lay.total,
                            [&](const oracle::Vec& v) { return oracle::apply_m(lay, v); }) <=
          1e-15);
    CHECK(max_dev_vs_oracle(k1, lay.total,
                            [&](const oracle::Vec& v) { return oracle::apply_k1(lay, v); }) <=
          1e-15);
    CHECK(max_dev_vs_oracle(k2, lay.total,
                            [&](const oracle::Vec& v) { return oracle::apply_k2(lay, v); }) <=
          1e-15);
}

TEST_CASE("K2 needs two particles") {
    const ModelParams p{1, 0.1, 2, 3, 3};
    SpacePtr s = make_space(p);
    CHECK_THROWS_AS(build_observable(p, s, ObservableKind::K2), ConfigError);
}

TEST_CASE("reference expectations") {
    const ModelParams p{2, 0.1, 2, 3, 3};
    SpacePtr s = make_space(p);
    const Operator m = build_observable(p, s, ObservableKind::M);
    const Operator k1 = build_observable(p, s, ObservableKind::K1);
    const Operator k2 = build_observable(p, s, ObservableKind::K2);

    StateVector vac = build_state(s, {StateKind::Vacuum, 0, 0, {}});
    CHECK(real_expectation(vac, m) == 0.0);

    StateVector ex = build_state(s, {StateKind::Exchange, std::numbers::pi / 4, 0, {}});
    CHECK(real_expectation(ex, m) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(real_expectation(ex, k2) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(real_expectation(ex, k1)) <= 1e-12);  // cavity vacuum factorizes
}

TEST_CASE("expectations are independent of N on identical product states") {
    for (int n : {2, 3, 4}) {
        const ModelParams p{n, 0.1, 2, 3, 3};
        SpacePtr s = make_space(p);
        StateVector psi = build_state(s, {StateKind::Pairing, 0.6, 1.3, {}});
        const double m = real_expectation(psi, build_observable(p, s, ObservableKind::M));
        const double k2 = real_expectation(psi, build_observable(p, s, ObservableKind::K2));
        const double s2 = std::pow(std::sin(0.6), 2);
        const double expected_k2 = -std::pow(std::cos(0.6) * std::sin(0.6), 2);
        CHECK(m == doctest::Approx(s2).epsilon(1e-12));
        CHECK(k2 == doctest::Approx(expected_k2).epsilon(1e-12));
    }
}

TEST_CASE("permutation symmetry of collective observables") {
    const ModelParams p{2, 0.1, 2, 3, 3};
    SpacePtr s = make_space(p);
    // One b-excitation on particle 1 vs on particle 2.
    StateVector psi1 = build_state(s, {StateKind::FockProduct, 0, 0, {0, 1, 0, 0, 0}});
    StateVector psi2 = build_state(s, {StateKind::FockProduct, 0, 0, {0, 0, 0, 1, 0}});
    for (auto kind : {ObservableKind::M, ObservableKind::K1, ObservableKind::K2}) {
        const Operator op = build_observable(p, s, kind);
        CHECK(std::abs(real_expectation(psi1, op) - real_expectation(psi2, op)) <= 1e-12);
    }
}
