// Independent brute-force oracle used only by the tests. It shares nothing
// with the library implementation except the canonical mode ordering
// convention (a_1, b_1, ..., a_N, b_N, c; first mode slowest): operators act
// by direct index arithmetic on state vectors, dense matrices are built
// column-by-column from those applications, and propagation goes through a
// full eigendecomposition.
#ifndef COLLCAV_TESTS_ORACLE_DENSE_HPP
#define COLLCAV_TESTS_ORACLE_DENSE_HPP

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

struct Layout {
    std::vector<int> dims;  // canonical mode order
    std::vector<long> strides;
    long total = 1;
    int n_particles = 0;

    explicit Layout(std::vector<int> d, int n) : dims(std::move(d)), n_particles(n) {
        strides.assign(dims.size(), 1);
        for (std::size_t q = dims.size(); q-- > 0;) {
            strides[q] = total;
            total *= dims[q];
        }
    }

    static Layout particles(int n, int da, int db, int dc) {
        std::vector<int> d;
        for (int i = 0; i < n; ++i) {
            d.push_back(da);
            d.push_back(db);
        }
        d.push_back(dc);
        return Layout(std::move(d), n);
    }

    int a_pos(int i) const { return 2 * (i - 1); }
    int b_pos(int i) const { return 2 * (i - 1) + 1; }
    int c_pos() const { return static_cast<int>(dims.size()) - 1; }
    int occ(long idx, int q) const {
        return static_cast<int>((idx / strides[q]) % dims[q]);
    }
};

// (x psi)[idx with occ m] = sqrt(m+1) psi[idx + stride] for m + 1 < dim.
inline Vec lower(const Layout& lay, int q, const Vec& v) {
    Vec out = Vec::Zero(lay.total);
    for (long i = 0; i < lay.total; ++i) {
        const int m = lay.occ(i, q);
        if (m + 1 < lay.dims[q]) out[i] = std::sqrt(double(m + 1)) * v[i + lay.strides[q]];
    }
    return out;
}

// (x^dag psi)[idx with occ m] = sqrt(m) psi[idx - stride] for m >= 1.
inline Vec raise(const Layout& lay, int q, const Vec& v) {
    Vec out = Vec::Zero(lay.total);
    for (long i = 0; i < lay.total; ++i) {
        const int m = lay.occ(i, q);
        if (m >= 1) out[i] = std::sqrt(double(m)) * v[i - lay.strides[q]];
    }
    return out;
}

inline Vec number(const Layout& lay, int q, const Vec& v) {
    Vec out = v;
    for (long i = 0; i < lay.total; ++i) out[i] *= double(lay.occ(i, q));
    return out;
}

// (a_i c^dag + a_i^dag c) psi
inline Vec vertex(const Layout& lay, int i, const Vec& v) {
    return raise(lay, lay.c_pos(), lower(lay, lay.a_pos(i), v)) +
           lower(lay, lay.c_pos(), raise(lay, lay.a_pos(i), v));
}

inline Vec apply_h(const Layout& lay, double eg, const Vec& v) {
    Vec out = Vec::Zero(lay.total);
    for (int i = 1; i <= lay.n_particles; ++i) {
        const Vec x = vertex(lay, i, v);
        out += lower(lay, lay.b_pos(i), x) + raise(lay, lay.b_pos(i), x);
    }
    return eg * out;
}

inline Vec apply_m(const Layout& lay, const Vec& v) {
    Vec out = Vec::Zero(lay.total);
    for (int i = 1; i <= lay.n_particles; ++i) out += number(lay, lay.b_pos(i), v);
    return out / double(lay.n_particles);
}

inline Vec apply_k1(const Layout& lay, const Vec& v) {
    Vec out = Vec::Zero(lay.total);
    for (int i = 1; i <= lay.n_particles; ++i) {
        const Vec x = vertex(lay, i, v);
        out += Complex(0.0, 1.0) * (lower(lay, lay.b_pos(i), x) - raise(lay, lay.b_pos(i), x));
    }
    return out / double(lay.n_particles);
}

inline Vec apply_k2(const Layout& lay, const Vec& v) {
    const int n = lay.n_particles;
    Vec out = Vec::Zero(lay.total);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (i == j) continue;
            // a_i b_i^dag a_j^dag b_j, applied right-to-left
            Vec w = lower(lay, lay.b_pos(j), v);
            w = raise(lay, lay.a_pos(j), w);
            w = raise(lay, lay.b_pos(i), w);
            w = lower(lay, lay.a_pos(i), w);
            out += w;
            // a_i b_i a_j^dag b_j^dag
            Vec u = raise(lay, lay.b_pos(j), v);
            u = raise(lay, lay.a_pos(j), u);
            u = lower(lay, lay.b_pos(i), u);
            u = lower(lay, lay.a_pos(i), u);
            out -= u;
        }
    return out / (double(n) * (n - 1));
}

inline Vec apply_nc(const Layout& lay, const Vec& v) { return number(lay, lay.c_pos(), v); }

template <class F>
inline Mat dense_of(long total, F&& apply) {
    Mat m(total, total);
    for (long k = 0; k < total; ++k) {
        Vec e = Vec::Zero(total);
        e[k] = 1.0;
        m.col(k) = apply(e);
    }
    return m;
}

inline Complex expect(const Vec& psi, const Vec& op_psi) { return psi.dot(op_psi); }

// <-i[A, H]> via the functional applications.
template <class FA, class FH>
inline double commutator_rate(const Vec& psi, FA&& apply_a, FH&& apply_h) {
    const Complex ah = psi.dot(apply_a(apply_h(psi)));
    const Complex ha = psi.dot(apply_h(apply_a(psi)));
    return (Complex(0.0, -1.0) * (ah - ha)).real();
}

inline Vec evolve_eigh(const Mat& h, const Vec& psi0, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec c = es.eigenvectors().adjoint() * psi0;
    for (long j = 0; j < c.size(); ++j)
        c[j] *= std::exp(Complex(0.0, -1.0) * es.eigenvalues()[j] * t);
    return es.eigenvectors() * c;
}

inline Vec kron_vec(const Vec& x, const Vec& y) {
    Vec out(x.size() * y.size());
    for (long i = 0; i < x.size(); ++i)
        for (long j = 0; j < y.size(); ++j) out[i * y.size() + j] = x[i] * y[j];
    return out;
}

// Per-particle two-level superposition as a (da*db)-vector, then kron over
// particles and the cavity vacuum.
inline Vec correlated_product(int n, int da, int db, int dc, double theta, double phi,
                              int na_lo, int nb_lo, int na_hi, int nb_hi) {
    Vec pair = Vec::Zero(long(da) * db);
    pair[long(na_lo) * db + nb_lo] = std::cos(theta);
    pair[long(na_hi) * db + nb_hi] = std::sin(theta) * std::exp(Complex(0.0, phi));
    Vec out = pair;
    for (int i = 1; i < n; ++i) out = kron_vec(out, pair);
    Vec cav = Vec::Zero(dc);
    cav[0] = 1.0;
    return kron_vec(out, cav);
}

inline Vec exchange_state(int n, int da, int db, int dc, double theta, double phi) {
    return correlated_product(n, da, db, dc, theta, phi, 0, 1, 1, 0);
}

inline Vec pairing_state(int n, int da, int db, int dc, double theta, double phi) {
    return correlated_product(n, da, db, dc, theta, phi, 0, 0, 1, 1);
}

inline Vec basis_state(const Layout& lay, const std::vector<int>& occ) {
    long idx = 0;
    for (std::size_t q = 0; q < occ.size(); ++q) idx += occ[q] * lay.strides[q];
    Vec v = Vec::Zero(lay.total);
    v[idx] = 1.0;
    return v;
}

}  // namespace oracle

#endif
